#include "relmem/selection.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relmem/errors.hpp"

using ordered_json = nlohmann::ordered_json;

namespace relmem {

std::string_view training_source_name(TrainingSource source) {
    switch (source) {
        case TrainingSource::Positive: return "positive";
        case TrainingSource::Negative: return "negative";
        case TrainingSource::Composite: return "composite";
    }
    return "positive";
}

VectorIndex index_schemas(const Catalog& catalog, EmbeddingProvider& provider) {
    if (catalog.empty()) raise(ErrorCode::EmptyInput, "catalog has no databases to index");
    VectorIndex index(provider.dimension());
    for (const auto& entry : catalog.entries())
        index.add(entry.id, embed(provider, serialize_schema(entry).text));
    return index;
}

std::vector<SelectionCandidate> select_top_k(const std::string& question,
                                             const VectorIndex& index,
                                             EmbeddingProvider& provider, size_t k) {
    if (index.empty()) raise(ErrorCode::EmptyInput, "selection index is empty");
    auto hits = index.search(embed(provider, question), k);
    std::vector<SelectionCandidate> out;
    out.reserve(hits.size());
    for (auto& hit : hits) out.push_back(SelectionCandidate{std::move(hit.id), hit.score});
    return out;
}

namespace {

// std::uniform_int_distribution is implementation-defined, so bounded draws
// go through this fixed reduction to keep outputs reproducible from the seed.
size_t draw_below(std::mt19937_64& rng, size_t n) {
    return static_cast<size_t>(rng() % n);
}

// Sample `count` distinct indexes out of [0, n) in draw order.
std::vector<size_t> sample_distinct(std::mt19937_64& rng, size_t n, size_t count) {
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<size_t> out;
    count = std::min(count, n);
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        size_t j = i + draw_below(rng, n - i);
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace

std::vector<SelectionTrainingRecord> compose_training_data(
    const std::vector<QaTriple>& qa_triples, const Catalog& catalog,
    const TrainingDataOptions& options) {
    if (options.negatives_per_positive < 1)
        raise(ErrorCode::UsageError, "negatives_per_positive must be >= 1");
    if (options.composite_k < 2) raise(ErrorCode::UsageError, "composite_k must be >= 2");
    if (options.num_composites < 0) raise(ErrorCode::UsageError, "num_composites must be >= 0");
    if (catalog.size() < 2)
        raise(ErrorCode::InsufficientCatalog,
              "need at least two databases to sample negatives");

    std::vector<SchemaText> schemas;
    schemas.reserve(catalog.size());
    for (const auto& entry : catalog.entries()) schemas.push_back(serialize_schema(entry));

    auto schema_index_of = [&](const std::string& db_id) -> size_t {
        for (size_t i = 0; i < schemas.size(); ++i)
            if (schemas[i].db_id == db_id) return i;
        raise(ErrorCode::UnknownColumn, "gold database not in catalog: " + db_id);
    };

    std::mt19937_64 rng(options.seed);
    std::vector<SelectionTrainingRecord> records;

    for (const auto& triple : qa_triples) {
        size_t gold = schema_index_of(triple.gold_db_id);
        records.push_back(SelectionTrainingRecord{triple.question, schemas[gold].text, 1,
                                                  TrainingSource::Positive});

        // Uniform without replacement over the non-gold databases; capped by
        // catalog size when fewer are available.
        std::vector<size_t> others;
        for (size_t i = 0; i < schemas.size(); ++i)
            if (i != gold) others.push_back(i);
        auto picks = sample_distinct(rng, others.size(),
                                     static_cast<size_t>(options.negatives_per_positive));
        for (size_t pick : picks)
            records.push_back(SelectionTrainingRecord{triple.question, schemas[others[pick]].text,
                                                      0, TrainingSource::Negative});
    }

    for (int c = 0; c < options.num_composites; ++c) {
        if (qa_triples.size() < static_cast<size_t>(options.composite_k))
            raise(ErrorCode::UsageError,
                  "composite_k exceeds the number of available questions");
        auto member_idx =
            sample_distinct(rng, qa_triples.size(), static_cast<size_t>(options.composite_k));

        std::string question;
        std::vector<size_t> gold_schemas;  // first-occurrence order
        for (size_t idx : member_idx) {
            if (!question.empty()) question += "; ";
            question += qa_triples[idx].question;
            size_t gold = schema_index_of(qa_triples[idx].gold_db_id);
            if (std::find(gold_schemas.begin(), gold_schemas.end(), gold) == gold_schemas.end())
                gold_schemas.push_back(gold);
        }

        for (size_t gold : gold_schemas)
            records.push_back(SelectionTrainingRecord{question, schemas[gold].text, 1,
                                                      TrainingSource::Composite});

        std::vector<size_t> non_gold;
        for (size_t i = 0; i < schemas.size(); ++i)
            if (std::find(gold_schemas.begin(), gold_schemas.end(), i) == gold_schemas.end())
                non_gold.push_back(i);
        auto picks = sample_distinct(rng, non_gold.size(),
                                     static_cast<size_t>(options.negatives_per_positive));
        for (size_t pick : picks)
            records.push_back(SelectionTrainingRecord{question, schemas[non_gold[pick]].text, 0,
                                                      TrainingSource::Composite});
    }

    return records;
}

std::string training_records_to_jsonl(const std::vector<SelectionTrainingRecord>& records) {
    std::ostringstream out;
    for (const auto& r : records) {
        ordered_json line;
        line["question"] = r.question;
        line["schema_text"] = r.schema_text;
        line["label"] = r.label;
        line["source"] = std::string(training_source_name(r.source));
        out << line.dump() << "\n";
    }
    return out.str();
}

}  // namespace relmem
