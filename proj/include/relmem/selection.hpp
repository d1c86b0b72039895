#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relmem/catalog.hpp"
#include "relmem/embedding.hpp"

namespace relmem {

struct SelectionCandidate {
    std::string db_id;
    double score = 0.0;  // cosine relevance, non-increasing within a result list
};

enum class TrainingSource { Positive, Negative, Composite };

std::string_view training_source_name(TrainingSource source);

struct SelectionTrainingRecord {
    std::string question;
    std::string schema_text;
    int label = 0;  // 1 = relevant database
    TrainingSource source = TrainingSource::Positive;
};

struct QaTriple {
    std::string question;
    std::string gold_db_id;
};

// One record per database: id = db_id, vector = embed(serialize_schema(entry)).
VectorIndex index_schemas(const Catalog& catalog, EmbeddingProvider& provider);

std::vector<SelectionCandidate> select_top_k(const std::string& question,
                                             const VectorIndex& index,
                                             EmbeddingProvider& provider, size_t k);

struct TrainingDataOptions {
    int negatives_per_positive = 1;
    int composite_k = 2;       // questions concatenated per composite
    int num_composites = 0;    // composite questions to generate
    uint64_t seed = 0;
};

// Emits the labeled dataset used to train an external selection classifier:
// per triple one positive plus sampled negatives, then composite questions
// joined with "; " and labeled positive for the gold database of any
// constituent. Fully reproducible from the seed.
std::vector<SelectionTrainingRecord> compose_training_data(
    const std::vector<QaTriple>& qa_triples, const Catalog& catalog,
    const TrainingDataOptions& options);

// JSON Lines form: {"question","schema_text","label":0|1,"source"}.
std::string training_records_to_jsonl(const std::vector<SelectionTrainingRecord>& records);

}  // namespace relmem
