#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace relmem {

enum class ColumnType { Text, Integer, Real, Blob, Unknown };

std::string_view column_type_name(ColumnType type);

// Maps a backing engine's free-form declared type to the 5-value enum,
// following SQLite affinity rules (empty declarations stay Unknown).
ColumnType normalize_declared_type(std::string_view declared);

struct ColumnDef {
    std::string name;
    ColumnType declared_type = ColumnType::Unknown;
};

struct ForeignKey {
    std::string local_column;
    std::string ref_table;
    std::string ref_column;
};

struct TableSchema {
    std::string name;
    std::vector<ColumnDef> columns;
    std::vector<std::string> primary_key;
    std::vector<ForeignKey> foreign_keys;

    const ColumnDef* find_column(std::string_view name) const;  // case-insensitive
};

struct DatabaseEntry {
    std::string id;
    std::string name;
    std::string location;
    std::vector<TableSchema> tables;

    const TableSchema* find_table(std::string_view name) const;  // case-insensitive
};

struct SchemaText {
    std::string db_id;
    std::string text;
};

// Canonical text form consumed by embeddings and prompts:
//   Database <name>
//   Table <t>(<c1>:<type>, ...)        one line per table, registration order
//   Foreign keys: <t1.c1> = <t2.c2>; ...   omitted when there are none
SchemaText serialize_schema(const DatabaseEntry& entry);

// Introspects a single-file SQLite database. System tables are excluded;
// display name defaults to the file stem.
DatabaseEntry introspect_database(const std::string& location, const std::string& id,
                                  std::string name = "");

class Catalog {
public:
    const DatabaseEntry& register_database(const std::string& location, const std::string& id,
                                           std::string name = "");
    void add_entry(DatabaseEntry entry);

    const std::vector<DatabaseEntry>& entries() const { return entries_; }
    const DatabaseEntry* find(std::string_view id) const;
    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }

    // Manifest: {"databases":[{"id","name","path"}]}
    void save_manifest(const std::string& path) const;
    static Catalog load_manifest(const std::string& path);

private:
    std::vector<DatabaseEntry> entries_;
};

}  // namespace relmem
