#pragma once

#include <map>
#include <string>
#include <vector>

#include "relmem/catalog.hpp"
#include "relmem/embedding.hpp"

namespace relmem {

struct ColumnKey {
    std::string db_id;
    std::string table;
    std::string column;

    auto operator<=>(const ColumnKey&) const = default;
};

struct ValueHit {
    std::string value;  // original stored bytes
    double score = 0.0;
};

// Per-column embedding indexes over the distinct stored cell values of the
// text columns of one database. Immutable after build.
class ValueMemory {
public:
    ValueMemory() = default;

    const std::string& db_id() const { return db_id_; }
    bool has_column(const ColumnKey& key) const;
    std::vector<ColumnKey> columns() const;
    size_t distinct_count(const ColumnKey& key) const;

    std::vector<ValueHit> lookup_synonyms(const ColumnKey& key, const std::string& query_value,
                                          EmbeddingProvider& provider, size_t k) const;

    // One index file per column under <store_dir>/<db_id>/, plus a manifest
    // mapping record ids back to the raw values.
    void save(const std::string& store_dir) const;
    static ValueMemory load(const std::string& store_dir, const std::string& db_id);

private:
    friend ValueMemory build_value_memory(const DatabaseEntry&, EmbeddingProvider&, size_t);

    struct ColumnMemory {
        VectorIndex index{1};
        std::map<std::string, std::string> raw_values;  // record id -> stored bytes
    };

    std::string db_id_;
    std::map<ColumnKey, ColumnMemory> columns_;
};

// Indexes distinct (byte-exact) non-null values of every text-typed column;
// non-text columns are skipped. max_values_per_column = 0 means no cap.
ValueMemory build_value_memory(const DatabaseEntry& entry, EmbeddingProvider& provider,
                               size_t max_values_per_column = 0);

}  // namespace relmem
