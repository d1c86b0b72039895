#include "relmem/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "base64.hpp"
#include "relmem/errors.hpp"
#include "relmem/text.hpp"

using ordered_json = nlohmann::ordered_json;

namespace relmem {

namespace {

uint64_t fnv1a64(const char* data, size_t len) {
    uint64_t hash = 1469598103934665603ull;
    for (size_t i = 0; i < len; ++i) {
        hash ^= static_cast<uint8_t>(data[i]);
        hash *= 1099511628211ull;
    }
    return hash;
}

bool all_finite(const EmbeddingVector& v) {
    return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

double l2_norm(const EmbeddingVector& v) {
    double sum = 0.0;
    for (float x : v) sum += double(x) * double(x);
    return std::sqrt(sum);
}

}  // namespace

EmbeddingVector embed(EmbeddingProvider& provider, const std::string& text) {
    if (trim(text).empty())
        raise(ErrorCode::EmptyInput, "cannot embed empty text");
    EmbeddingVector v = provider.embed_text(text);
    if (static_cast<int>(v.size()) != provider.dimension())
        raise(ErrorCode::DimensionMismatch,
              "provider " + provider.name() + " returned " + std::to_string(v.size()) +
                  " floats, expected " + std::to_string(provider.dimension()));
    if (!all_finite(v))
        raise(ErrorCode::ProviderUnavailable,
              "provider " + provider.name() + " returned non-finite values");
    if (l2_norm(v) <= 0.0)
        raise(ErrorCode::ProviderUnavailable,
              "provider " + provider.name() + " returned a zero vector");
    return v;
}

EmbeddingVector TrigramEmbedder::embed_text(const std::string& text) {
    std::string folded = fold_text(text);
    EmbeddingVector counts(kDimension, 0.0f);
    if (folded.size() < 3) {
        // Too short for trigrams: hash the whole folded string as one token.
        counts[fnv1a64(folded.data(), folded.size()) % kDimension] += 1.0f;
    } else {
        for (size_t i = 0; i + 3 <= folded.size(); ++i)
            counts[fnv1a64(folded.data() + i, 3) % kDimension] += 1.0f;
    }
    double norm = l2_norm(counts);
    for (auto& x : counts) x = static_cast<float>(x / norm);
    return counts;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url, int dimension)
    : base_url_(std::move(base_url)), name_("http:" + base_url_), dimension_(dimension) {
    if (dimension_ <= 0) raise(ErrorCode::ConfigError, "embedding dimension must be positive");
}

EmbeddingVector HttpEmbeddingProvider::embed_text(const std::string& text) {
    httplib::Client client(base_url_);
    client.set_read_timeout(30, 0);
    ordered_json body;
    body["texts"] = ordered_json::array({text});
    auto res = client.Post("/embed", body.dump(), "application/json");
    if (!res || res->status != 200)
        raise(ErrorCode::ProviderUnavailable,
              "embedding endpoint " + base_url_ + " returned " +
                  (res ? std::to_string(res->status) : std::string("no response")));
    try {
        auto doc = nlohmann::json::parse(res->body);
        const auto& vectors = doc.at("vectors");
        if (!vectors.is_array() || vectors.size() != 1)
            raise(ErrorCode::ProviderUnavailable, "embedding endpoint returned bad vector count");
        EmbeddingVector out;
        for (const auto& x : vectors[0]) out.push_back(x.get<float>());
        return out;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ProviderUnavailable,
              "embedding endpoint returned malformed JSON: " + std::string(e.what()));
    }
}

VectorIndex::VectorIndex(int dimension) : dimension_(dimension) {
    if (dimension <= 0) raise(ErrorCode::DimensionMismatch, "index dimension must be positive");
}

void VectorIndex::add(const std::string& id, EmbeddingVector vector) {
    if (id.empty()) raise(ErrorCode::UsageError, "record id must be non-empty");
    if (static_cast<int>(vector.size()) != dimension_)
        raise(ErrorCode::DimensionMismatch,
              "record " + id + " has dimension " + std::to_string(vector.size()) +
                  ", index expects " + std::to_string(dimension_));
    if (!all_finite(vector))
        raise(ErrorCode::DimensionMismatch, "record " + id + " has non-finite entries");
    if (contains(id)) raise(ErrorCode::DuplicateId, "record id already present: " + id);
    double norm = l2_norm(vector);
    records_.push_back(Record{id, std::move(vector), norm});
}

bool VectorIndex::contains(std::string_view id) const {
    return vector_of(id) != nullptr;
}

const EmbeddingVector* VectorIndex::vector_of(std::string_view id) const {
    for (const auto& r : records_)
        if (r.id == id) return &r.vector;
    return nullptr;
}

std::vector<std::string> VectorIndex::ids() const {
    std::vector<std::string> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.id);
    return out;
}

std::vector<SearchHit> VectorIndex::search(const EmbeddingVector& query, size_t k) const {
    if (static_cast<int>(query.size()) != dimension_)
        raise(ErrorCode::DimensionMismatch,
              "query dimension " + std::to_string(query.size()) + " does not match index " +
                  std::to_string(dimension_));
    if (k == 0 || records_.empty()) return {};

    double query_norm = l2_norm(query);
    std::vector<SearchHit> hits;
    hits.reserve(records_.size());
    for (const auto& r : records_) {
        double dot = 0.0;
        for (int i = 0; i < dimension_; ++i) dot += double(query[i]) * double(r.vector[i]);
        double denom = query_norm * r.norm;
        double score = denom > 0.0 ? dot / denom : 0.0;
        hits.push_back(SearchHit{r.id, score});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::string VectorIndex::serialize() const {
    static_assert(std::endian::native == std::endian::little,
                  "index format is little-endian float32");
    std::ostringstream out;
    ordered_json header;
    header["format"] = "relmem-vindex";
    header["version"] = 1;
    header["dim"] = dimension_;
    header["metric"] = "cosine";
    header["count"] = records_.size();
    out << header.dump() << "\n";
    for (const auto& r : records_) {
        ordered_json rec;
        rec["id"] = r.id;
        rec["vec"] = detail::base64_encode(reinterpret_cast<const uint8_t*>(r.vector.data()),
                                           r.vector.size() * sizeof(float));
        out << rec.dump() << "\n";
    }
    return out.str();
}

void VectorIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write index: " + path);
    out << serialize();
}

VectorIndex VectorIndex::deserialize(std::string_view bytes, const std::string& origin) {
    std::istringstream in{std::string(bytes)};
    std::string line;
    if (!std::getline(in, line))
        raise(ErrorCode::CorruptIndex, origin + ": empty index file");

    ordered_json header;
    try {
        header = ordered_json::parse(line);
    } catch (const nlohmann::json::exception&) {
        raise(ErrorCode::CorruptIndex, origin + ": bad header");
    }
    if (header.value("format", "") != std::string("relmem-vindex"))
        raise(ErrorCode::CorruptIndex, origin + ": bad magic");
    if (header.value("version", 0) != 1)
        raise(ErrorCode::CorruptIndex, origin + ": unsupported version");
    if (header.value("metric", "") != std::string("cosine"))
        raise(ErrorCode::CorruptIndex, origin + ": unsupported metric");
    int dim = header.value("dim", 0);
    if (dim <= 0) raise(ErrorCode::CorruptIndex, origin + ": bad dimension");
    size_t count = header.value("count", size_t(0));

    VectorIndex index(dim);
    size_t seen = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ordered_json rec;
        try {
            rec = ordered_json::parse(line);
        } catch (const nlohmann::json::exception&) {
            raise(ErrorCode::CorruptIndex, origin + ": bad record line");
        }
        if (!rec.contains("id") || !rec.contains("vec"))
            raise(ErrorCode::CorruptIndex, origin + ": record missing fields");
        auto raw = detail::base64_decode(rec["vec"].get<std::string>());
        if (!raw || raw->size() != size_t(dim) * sizeof(float))
            raise(ErrorCode::CorruptIndex,
                  origin + ": record " + rec["id"].get<std::string>() + " has wrong vector size");
        EmbeddingVector vec(dim);
        std::memcpy(vec.data(), raw->data(), raw->size());
        try {
            index.add(rec["id"].get<std::string>(), std::move(vec));
        } catch (const Error& e) {
            raise(ErrorCode::CorruptIndex, origin + ": " + e.what());
        }
        ++seen;
    }
    if (seen != count)
        raise(ErrorCode::CorruptIndex, origin + ": expected " + std::to_string(count) +
                                           " records, found " + std::to_string(seen));
    return index;
}

VectorIndex VectorIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::CorruptIndex, "cannot read index: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str(), path);
}

}  // namespace relmem
