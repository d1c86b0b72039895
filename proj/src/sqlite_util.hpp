#pragma once

#include <sqlite3.h>

#include <string>
#include <utility>

#include "relmem/errors.hpp"

namespace relmem::detail {

// RAII holders for the C API. All access in this project is read-only.

class SqliteStmt {
public:
    SqliteStmt() = default;
    SqliteStmt(sqlite3* db, const std::string& sql) {
        const char* tail = nullptr;
        if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, &tail) != SQLITE_OK) {
            std::string msg = sqlite3_errmsg(db);
            raise(ErrorCode::Internal, "prepare failed: " + msg + " [" + sql + "]");
        }
    }
    SqliteStmt(const SqliteStmt&) = delete;
    SqliteStmt& operator=(const SqliteStmt&) = delete;
    SqliteStmt(SqliteStmt&& other) noexcept : stmt_(std::exchange(other.stmt_, nullptr)) {}
    ~SqliteStmt() {
        if (stmt_) sqlite3_finalize(stmt_);
    }

    sqlite3_stmt* get() const { return stmt_; }
    bool step() { return sqlite3_step(stmt_) == SQLITE_ROW; }

    std::string column_text(int i) const {
        const unsigned char* p = sqlite3_column_text(stmt_, i);
        if (!p) return {};
        return std::string(reinterpret_cast<const char*>(p),
                           static_cast<size_t>(sqlite3_column_bytes(stmt_, i)));
    }
    bool column_is_null(int i) const { return sqlite3_column_type(stmt_, i) == SQLITE_NULL; }
    long long column_int64(int i) const { return sqlite3_column_int64(stmt_, i); }

private:
    sqlite3_stmt* stmt_ = nullptr;
};

class SqliteDb {
public:
    explicit SqliteDb(const std::string& path) : path_(path) {
        int rc = sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READONLY, nullptr);
        if (rc != SQLITE_OK) {
            std::string msg = db_ ? sqlite3_errmsg(db_) : "cannot open";
            close();
            raise(ErrorCode::UnreadableDatabase, path + ": " + msg);
        }
    }
    SqliteDb(const SqliteDb&) = delete;
    SqliteDb& operator=(const SqliteDb&) = delete;
    ~SqliteDb() { close(); }

    sqlite3* get() const { return db_; }
    const std::string& path() const { return path_; }

    SqliteStmt prepare(const std::string& sql) const { return SqliteStmt(db_, sql); }

private:
    void close() {
        if (db_) {
            sqlite3_close(db_);
            db_ = nullptr;
        }
    }

    sqlite3* db_ = nullptr;
    std::string path_;
};

inline std::string quote_identifier(const std::string& name) {
    std::string out = "\"";
    for (char c : name) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

}  // namespace relmem::detail
