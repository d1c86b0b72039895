#include "relmem/sql.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <sqlite3.h>

#include "relmem/errors.hpp"
#include "relmem/text.hpp"
#include "sqlite_util.hpp"

using ordered_json = nlohmann::ordered_json;

namespace relmem {

ExecutionOutcome execute_sql(const DatabaseEntry& entry, const std::string& sql,
                             double timeout_secs) {
    detail::SqliteDb db(entry.location);

    auto fail = [&](std::string message) {
        return ExecutionOutcome{ExecutionError{std::move(message), sql}};
    };

    sqlite3_stmt* stmt = nullptr;
    const char* tail = nullptr;
    if (sqlite3_prepare_v2(db.get(), sql.c_str(), -1, &stmt, &tail) != SQLITE_OK) {
        std::string msg = sqlite3_errmsg(db.get());
        if (stmt) sqlite3_finalize(stmt);
        return fail(msg);
    }
    if (!stmt) return fail("no SQL statement found");

    // Reject a second statement in the tail; a bare trailing ';' is fine.
    for (const char* p = tail; p && *p; ++p) {
        if (!is_space(*p) && *p != ';') {
            sqlite3_finalize(stmt);
            return fail("multiple SQL statements are not allowed");
        }
    }
    if (!sqlite3_stmt_readonly(stmt)) {
        sqlite3_finalize(stmt);
        return fail("write statements are not allowed");
    }

    using clock = std::chrono::steady_clock;
    auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(
                                       std::chrono::duration<double>(timeout_secs));
    sqlite3_progress_handler(
        db.get(), 500,
        [](void* ctx) -> int { return clock::now() > *static_cast<clock::time_point*>(ctx); },
        &deadline);

    SqlResult result;
    int ncols = sqlite3_column_count(stmt);
    for (int i = 0; i < ncols; ++i) {
        const char* name = sqlite3_column_name(stmt, i);
        result.columns.push_back(name ? name : "");
    }

    int rc;
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
        std::vector<SqlCell> row;
        row.reserve(ncols);
        for (int i = 0; i < ncols; ++i) {
            switch (sqlite3_column_type(stmt, i)) {
                case SQLITE_NULL: row.emplace_back(std::monostate{}); break;
                case SQLITE_INTEGER: row.emplace_back(int64_t(sqlite3_column_int64(stmt, i))); break;
                case SQLITE_FLOAT: row.emplace_back(sqlite3_column_double(stmt, i)); break;
                default: {
                    const unsigned char* p = sqlite3_column_text(stmt, i);
                    int n = sqlite3_column_bytes(stmt, i);
                    row.emplace_back(std::string(reinterpret_cast<const char*>(p), size_t(n)));
                }
            }
        }
        result.rows.push_back(std::move(row));
    }
    std::string step_error = sqlite3_errmsg(db.get());
    bool interrupted = (rc == SQLITE_INTERRUPT);
    sqlite3_finalize(stmt);

    if (interrupted)
        return fail("query timed out after " + std::to_string(timeout_secs) + " seconds");
    if (rc != SQLITE_DONE) return fail(step_error);
    return ExecutionOutcome{std::move(result)};
}

namespace {

bool cells_equal(const SqlCell& a, const SqlCell& b) {
    if (std::holds_alternative<std::monostate>(a) || std::holds_alternative<std::monostate>(b))
        return std::holds_alternative<std::monostate>(a) &&
               std::holds_alternative<std::monostate>(b);
    if (std::holds_alternative<std::string>(a) || std::holds_alternative<std::string>(b))
        return std::holds_alternative<std::string>(a) &&
               std::holds_alternative<std::string>(b) &&
               std::get<std::string>(a) == std::get<std::string>(b);
    if (std::holds_alternative<int64_t>(a) && std::holds_alternative<int64_t>(b))
        return std::get<int64_t>(a) == std::get<int64_t>(b);
    auto num = [](const SqlCell& c) {
        return std::holds_alternative<int64_t>(c) ? double(std::get<int64_t>(c))
                                                  : std::get<double>(c);
    };
    double x = num(a), y = num(b);
    return std::fabs(x - y) <= 1e-6 * std::max({std::fabs(x), std::fabs(y), 0.0});
}

bool rows_equal(const std::vector<SqlCell>& a, const std::vector<SqlCell>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!cells_equal(a[i], b[i])) return false;
    return true;
}

}  // namespace

bool results_equal(const SqlResult& a, const SqlResult& b) {
    if (a.columns.size() != b.columns.size()) return false;
    if (a.rows.size() != b.rows.size()) return false;
    // Multiset match via greedy assignment; fine at the result sizes the
    // pipeline handles.
    std::vector<bool> used(b.rows.size(), false);
    for (const auto& row : a.rows) {
        bool matched = false;
        for (size_t j = 0; j < b.rows.size(); ++j) {
            if (used[j] || !rows_equal(row, b.rows[j])) continue;
            used[j] = true;
            matched = true;
            break;
        }
        if (!matched) return false;
    }
    return true;
}

SqlResult truncate_result(const SqlResult& r, size_t n) {
    if (r.rows.size() <= n) return r;
    SqlResult out;
    out.columns = r.columns;
    out.rows.assign(r.rows.begin(), r.rows.begin() + n);
    out.truncated = true;
    return out;
}

nlohmann::ordered_json result_to_json(const SqlResult& r) {
    ordered_json doc;
    doc["columns"] = r.columns;
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows) {
        ordered_json jrow = ordered_json::array();
        for (const auto& cell : row) {
            if (std::holds_alternative<std::monostate>(cell))
                jrow.push_back(nullptr);
            else if (std::holds_alternative<int64_t>(cell))
                jrow.push_back(std::get<int64_t>(cell));
            else if (std::holds_alternative<double>(cell))
                jrow.push_back(std::get<double>(cell));
            else
                jrow.push_back(std::get<std::string>(cell));
        }
        rows.push_back(std::move(jrow));
    }
    doc["rows"] = std::move(rows);
    doc["truncated"] = r.truncated;
    return doc;
}

SqlResult result_from_json(const nlohmann::json& doc) {
    SqlResult out;
    for (const auto& c : doc.at("columns")) out.columns.push_back(c.get<std::string>());
    for (const auto& jrow : doc.at("rows")) {
        std::vector<SqlCell> row;
        for (const auto& cell : jrow) {
            if (cell.is_null())
                row.emplace_back(std::monostate{});
            else if (cell.is_number_integer())
                row.emplace_back(cell.get<int64_t>());
            else if (cell.is_number_float())
                row.emplace_back(cell.get<double>());
            else if (cell.is_boolean())
                row.emplace_back(int64_t(cell.get<bool>() ? 1 : 0));
            else
                row.emplace_back(cell.get<std::string>());
        }
        out.rows.push_back(std::move(row));
    }
    out.truncated = doc.value("truncated", false);
    return out;
}

std::string cell_to_string(const SqlCell& cell) {
    if (std::holds_alternative<std::monostate>(cell)) return "NULL";
    if (std::holds_alternative<int64_t>(cell)) return std::to_string(std::get<int64_t>(cell));
    if (std::holds_alternative<double>(cell)) {
        ordered_json j = std::get<double>(cell);
        return j.dump();
    }
    return std::get<std::string>(cell);
}

}  // namespace relmem
