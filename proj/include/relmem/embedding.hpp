#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace relmem {

using EmbeddingVector = std::vector<float>;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual const std::string& name() const = 0;
    virtual int dimension() const = 0;

    // Deterministic per provider instance: identical text yields identical
    // bits. Implementations may throw ProviderUnavailable.
    virtual EmbeddingVector embed_text(const std::string& text) = 0;
};

// Validated entry point: enforces non-empty input, finite entries, provider
// dimension, and a positive norm.
EmbeddingVector embed(EmbeddingProvider& provider, const std::string& text);

// Offline fallback: case-folds and whitespace-collapses the text, hashes
// character trigrams into a 256-bucket count vector, then L2-normalizes.
class TrigramEmbedder : public EmbeddingProvider {
public:
    static constexpr int kDimension = 256;

    const std::string& name() const override { return name_; }
    int dimension() const override { return kDimension; }
    EmbeddingVector embed_text(const std::string& text) override;

private:
    std::string name_ = "trigram-256";
};

// Adapter for the remote provider contract:
//   POST <base_url>/embed  {"texts":["..."]} -> {"vectors":[[f32,...]]}
// Non-200 responses and transport failures map to ProviderUnavailable.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string base_url, int dimension);

    const std::string& name() const override { return name_; }
    int dimension() const override { return dimension_; }
    EmbeddingVector embed_text(const std::string& text) override;

private:
    std::string base_url_;
    std::string name_;
    int dimension_;
};

struct SearchHit {
    std::string id;
    double score = 0.0;  // cosine similarity
};

// Exhaustive cosine nearest-neighbor index. Immutable once built; results
// are sorted by (score desc, id asc) and therefore independent of insertion
// order.
class VectorIndex {
public:
    explicit VectorIndex(int dimension);

    int dimension() const { return dimension_; }
    size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    void add(const std::string& id, EmbeddingVector vector);
    bool contains(std::string_view id) const;
    const EmbeddingVector* vector_of(std::string_view id) const;
    std::vector<std::string> ids() const;

    std::vector<SearchHit> search(const EmbeddingVector& query, size_t k) const;

    // Line 1: JSON header {"format":"relmem-vindex","version":1,"dim":D,
    // "metric":"cosine","count":N}; then one JSON line per record
    // {"id":"...","vec":"<base64 little-endian float32>"}.
    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

    std::string serialize() const;
    static VectorIndex deserialize(std::string_view bytes, const std::string& origin = "<memory>");

private:
    struct Record {
        std::string id;
        EmbeddingVector vector;
        double norm = 0.0;
    };

    int dimension_;
    std::vector<Record> records_;
};

}  // namespace relmem
