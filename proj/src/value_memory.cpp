#include "relmem/value_memory.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "relmem/errors.hpp"
#include "relmem/text.hpp"
#include "sqlite_util.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace relmem {

namespace {

std::string record_id_for(size_t ordinal) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "v%06zu", ordinal);
    return buf;
}

// Table/column names become part of the index file name; keep it filesystem-safe.
std::string sanitize_component(const std::string& name) {
    std::string out;
    for (unsigned char c : name) {
        if (std::isalnum(c) || c == '_' || c == '-') {
            out.push_back(static_cast<char>(c));
        } else {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

std::string index_file_name(const ColumnKey& key) {
    return sanitize_component(key.table) + "." + sanitize_component(key.column) + ".vidx";
}

}  // namespace

bool ValueMemory::has_column(const ColumnKey& key) const {
    return columns_.count(key) > 0;
}

std::vector<ColumnKey> ValueMemory::columns() const {
    std::vector<ColumnKey> out;
    out.reserve(columns_.size());
    for (const auto& [key, mem] : columns_) out.push_back(key);
    return out;
}

size_t ValueMemory::distinct_count(const ColumnKey& key) const {
    auto it = columns_.find(key);
    return it == columns_.end() ? 0 : it->second.index.size();
}

std::vector<ValueHit> ValueMemory::lookup_synonyms(const ColumnKey& key,
                                                   const std::string& query_value,
                                                   EmbeddingProvider& provider, size_t k) const {
    auto it = columns_.find(key);
    if (it == columns_.end())
        raise(ErrorCode::UnknownColumn,
              "no value memory for " + key.db_id + "." + key.table + "." + key.column);
    if (it->second.index.empty()) return {};

    auto hits = it->second.index.search(embed(provider, query_value), k);
    std::vector<ValueHit> out;
    out.reserve(hits.size());
    for (const auto& hit : hits) {
        auto raw = it->second.raw_values.find(hit.id);
        if (raw == it->second.raw_values.end())
            raise(ErrorCode::Internal, "value record without raw value: " + hit.id);
        out.push_back(ValueHit{raw->second, hit.score});
    }
    return out;
}

ValueMemory build_value_memory(const DatabaseEntry& entry, EmbeddingProvider& provider,
                               size_t max_values_per_column) {
    detail::SqliteDb db(entry.location);

    ValueMemory memory;
    memory.db_id_ = entry.id;

    for (const auto& table : entry.tables) {
        for (const auto& column : table.columns) {
            if (column.declared_type != ColumnType::Text) continue;

            ValueMemory::ColumnMemory mem;
            mem.index = VectorIndex(provider.dimension());

            auto rows = db.prepare("SELECT " + detail::quote_identifier(column.name) + " FROM " +
                                   detail::quote_identifier(table.name) + " WHERE " +
                                   detail::quote_identifier(column.name) + " IS NOT NULL");
            std::unordered_set<std::string> seen;
            size_t ordinal = 0;
            while (rows.step()) {
                std::string value = rows.column_text(0);
                // Whitespace-only cells cannot be embedded and are useless as
                // synonym candidates; skip them.
                if (trim(value).empty()) continue;
                if (!seen.insert(value).second) continue;
                if (max_values_per_column && ordinal >= max_values_per_column) break;
                std::string id = record_id_for(ordinal++);
                mem.index.add(id, embed(provider, value));
                mem.raw_values.emplace(std::move(id), std::move(value));
            }

            memory.columns_.emplace(ColumnKey{entry.id, table.name, column.name},
                                    std::move(mem));
        }
    }
    return memory;
}

void ValueMemory::save(const std::string& store_dir) const {
    fs::path dir = fs::path(store_dir) / db_id_;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise(ErrorCode::IoError, "cannot create " + dir.string());

    ordered_json manifest;
    manifest["db_id"] = db_id_;
    manifest["columns"] = ordered_json::array();
    for (const auto& [key, mem] : columns_) {
        std::string file = index_file_name(key);
        mem.index.save((dir / file).string());

        ordered_json col;
        col["table"] = key.table;
        col["column"] = key.column;
        col["index_file"] = file;
        ordered_json values = ordered_json::object();
        for (const auto& [id, raw] : mem.raw_values) values[id] = raw;
        col["values"] = std::move(values);
        manifest["columns"].push_back(std::move(col));
    }

    std::ofstream out(dir / "values.json", std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write " + (dir / "values.json").string());
    out << manifest.dump(2) << "\n";
}

ValueMemory ValueMemory::load(const std::string& store_dir, const std::string& db_id) {
    fs::path dir = fs::path(store_dir) / db_id;
    fs::path manifest_path = dir / "values.json";
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) raise(ErrorCode::CorruptManifest, "cannot read " + manifest_path.string());

    ordered_json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::CorruptManifest, manifest_path.string() + ": " + e.what());
    }
    if (manifest.value("db_id", "") != db_id)
        raise(ErrorCode::CorruptManifest, manifest_path.string() + ": db_id mismatch");
    if (!manifest.contains("columns") || !manifest["columns"].is_array())
        raise(ErrorCode::CorruptManifest, manifest_path.string() + ": missing columns");

    ValueMemory memory;
    memory.db_id_ = db_id;
    for (const auto& col : manifest["columns"]) {
        if (!col.contains("table") || !col.contains("column") || !col.contains("index_file") ||
            !col.contains("values"))
            raise(ErrorCode::CorruptManifest, manifest_path.string() + ": malformed column");

        ColumnKey key{db_id, col["table"].get<std::string>(), col["column"].get<std::string>()};
        ColumnMemory mem;
        mem.index = VectorIndex::load((dir / col["index_file"].get<std::string>()).string());
        for (const auto& [id, raw] : col["values"].items())
            mem.raw_values.emplace(id, raw.get<std::string>());

        if (mem.index.size() != mem.raw_values.size())
            raise(ErrorCode::CorruptManifest,
                  manifest_path.string() + ": index/value count mismatch for " + key.table + "." +
                      key.column);
        for (const auto& id : mem.index.ids())
            if (!mem.raw_values.count(id))
                raise(ErrorCode::CorruptManifest,
                      manifest_path.string() + ": record " + id + " missing raw value");

        memory.columns_.emplace(std::move(key), std::move(mem));
    }
    return memory;
}

}  // namespace relmem
