#include "relmem/catalog.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "relmem/errors.hpp"
#include "relmem/text.hpp"
#include "sqlite_util.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace relmem {

std::string_view column_type_name(ColumnType type) {
    switch (type) {
        case ColumnType::Text: return "text";
        case ColumnType::Integer: return "integer";
        case ColumnType::Real: return "real";
        case ColumnType::Blob: return "blob";
        case ColumnType::Unknown: return "unknown";
    }
    return "unknown";
}

ColumnType normalize_declared_type(std::string_view declared) {
    std::string d = to_lower(trim(declared));
    if (d.empty()) return ColumnType::Unknown;
    auto contains = [&](std::string_view needle) { return d.find(needle) != std::string::npos; };
    if (contains("int")) return ColumnType::Integer;
    if (contains("char") || contains("clob") || contains("text")) return ColumnType::Text;
    if (contains("blob")) return ColumnType::Blob;
    if (contains("real") || contains("floa") || contains("doub")) return ColumnType::Real;
    return ColumnType::Unknown;
}

const ColumnDef* TableSchema::find_column(std::string_view column) const {
    for (const auto& c : columns)
        if (iequals(c.name, column)) return &c;
    return nullptr;
}

const TableSchema* DatabaseEntry::find_table(std::string_view table) const {
    for (const auto& t : tables)
        if (iequals(t.name, table)) return &t;
    return nullptr;
}

namespace {

void validate_foreign_keys(const DatabaseEntry& entry) {
    for (const auto& table : entry.tables) {
        for (const auto& fk : table.foreign_keys) {
            if (!table.find_column(fk.local_column))
                raise(ErrorCode::UnreadableDatabase,
                      entry.location + ": foreign key column " + table.name + "." +
                          fk.local_column + " does not exist");
            const TableSchema* ref = entry.find_table(fk.ref_table);
            if (!ref || !ref->find_column(fk.ref_column))
                raise(ErrorCode::UnreadableDatabase,
                      entry.location + ": foreign key target " + fk.ref_table + "." +
                          fk.ref_column + " does not exist");
        }
    }
}

}  // namespace

DatabaseEntry introspect_database(const std::string& location, const std::string& id,
                                  std::string name) {
    if (id.empty()) raise(ErrorCode::UsageError, "database id must be non-empty");
    if (!fs::exists(location))
        raise(ErrorCode::UnreadableDatabase, location + ": file does not exist");

    detail::SqliteDb db(location);

    DatabaseEntry entry;
    entry.id = id;
    entry.name = name.empty() ? fs::path(location).stem().string() : std::move(name);
    entry.location = location;

    // sqlite_master rowid order preserves DDL creation order.
    auto tables = db.prepare(
        "SELECT name FROM sqlite_master WHERE type='table' "
        "AND name NOT LIKE 'sqlite\\_%' ESCAPE '\\' ORDER BY rowid");
    std::vector<std::string> table_names;
    while (tables.step()) table_names.push_back(tables.column_text(0));

    for (const auto& table_name : table_names) {
        TableSchema table;
        table.name = table_name;

        std::vector<std::pair<long long, std::string>> pk_cols;  // (pk position, name)
        auto cols = db.prepare("PRAGMA table_info(" + detail::quote_identifier(table_name) + ")");
        while (cols.step()) {
            ColumnDef col;
            col.name = cols.column_text(1);
            col.declared_type = normalize_declared_type(cols.column_text(2));
            long long pk = cols.column_int64(5);
            if (pk > 0) pk_cols.emplace_back(pk, col.name);
            if (table.find_column(col.name))
                raise(ErrorCode::UnreadableDatabase,
                      location + ": duplicate column " + table_name + "." + col.name);
            table.columns.push_back(std::move(col));
        }
        std::sort(pk_cols.begin(), pk_cols.end());
        for (auto& [pos, col] : pk_cols) table.primary_key.push_back(std::move(col));

        std::vector<std::tuple<long long, long long, ForeignKey>> fks;  // (id, seq, fk)
        auto fk_rows =
            db.prepare("PRAGMA foreign_key_list(" + detail::quote_identifier(table_name) + ")");
        while (fk_rows.step()) {
            ForeignKey fk;
            fk.local_column = fk_rows.column_text(3);
            fk.ref_table = fk_rows.column_text(2);
            // A NULL "to" column means the FK references the target's primary key.
            if (!fk_rows.column_is_null(4)) fk.ref_column = fk_rows.column_text(4);
            fks.emplace_back(fk_rows.column_int64(0), fk_rows.column_int64(1), std::move(fk));
        }
        std::sort(fks.begin(), fks.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<0>(a), std::get<1>(a)) <
                   std::tie(std::get<0>(b), std::get<1>(b));
        });
        for (auto& [fk_id, seq, fk] : fks) table.foreign_keys.push_back(std::move(fk));

        entry.tables.push_back(std::move(table));
    }

    // Resolve implicit primary-key references now that all tables are known.
    for (auto& table : entry.tables) {
        for (auto& fk : table.foreign_keys) {
            if (!fk.ref_column.empty()) continue;
            const TableSchema* ref = entry.find_table(fk.ref_table);
            if (ref && !ref->primary_key.empty()) fk.ref_column = ref->primary_key.front();
        }
    }

    validate_foreign_keys(entry);
    return entry;
}

SchemaText serialize_schema(const DatabaseEntry& entry) {
    std::string text = "Database " + entry.name;
    std::string fk_line;
    for (const auto& table : entry.tables) {
        text += "\nTable " + table.name + "(";
        for (size_t i = 0; i < table.columns.size(); ++i) {
            if (i) text += ", ";
            text += table.columns[i].name;
            text += ":";
            text += column_type_name(table.columns[i].declared_type);
        }
        text += ")";
        for (const auto& fk : table.foreign_keys) {
            if (!fk_line.empty()) fk_line += "; ";
            fk_line += table.name + "." + fk.local_column + " = " + fk.ref_table + "." +
                       fk.ref_column;
        }
    }
    if (!fk_line.empty()) text += "\nForeign keys: " + fk_line;
    return SchemaText{entry.id, std::move(text)};
}

const DatabaseEntry& Catalog::register_database(const std::string& location, const std::string& id,
                                                std::string name) {
    if (find(id)) raise(ErrorCode::DuplicateId, "database id already registered: " + id);
    entries_.push_back(introspect_database(location, id, std::move(name)));
    return entries_.back();
}

void Catalog::add_entry(DatabaseEntry entry) {
    if (find(entry.id)) raise(ErrorCode::DuplicateId, "database id already registered: " + entry.id);
    entries_.push_back(std::move(entry));
}

const DatabaseEntry* Catalog::find(std::string_view id) const {
    for (const auto& e : entries_)
        if (e.id == id) return &e;
    return nullptr;
}

void Catalog::save_manifest(const std::string& path) const {
    ordered_json doc;
    doc["databases"] = ordered_json::array();
    for (const auto& e : entries_) {
        ordered_json db;
        db["id"] = e.id;
        db["name"] = e.name;
        db["path"] = e.location;
        doc["databases"].push_back(std::move(db));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::IoError, "cannot write manifest: " + path);
    out << doc.dump(2) << "\n";
}

Catalog Catalog::load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::CorruptManifest, "cannot read manifest: " + path);
    ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::CorruptManifest, path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("databases") || !doc["databases"].is_array())
        raise(ErrorCode::CorruptManifest, path + ": missing databases array");

    Catalog catalog;
    for (const auto& db : doc["databases"]) {
        if (!db.is_object() || !db.contains("id") || !db.contains("path"))
            raise(ErrorCode::CorruptManifest, path + ": malformed database record");
        std::string name = db.value("name", std::string());
        catalog.register_database(db["path"].get<std::string>(), db["id"].get<std::string>(),
                                  name);
    }
    return catalog;
}

}  // namespace relmem
