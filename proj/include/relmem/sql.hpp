#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "relmem/catalog.hpp"

namespace relmem {

// null, integer, real, text
using SqlCell = std::variant<std::monostate, int64_t, double, std::string>;

struct SqlResult {
    std::vector<std::string> columns;
    std::vector<std::vector<SqlCell>> rows;
    bool truncated = false;
};

struct ExecutionError {
    std::string message;  // engine-produced text, verbatim
    std::string sql;
};

// Either a materialized result or the captured engine error.
struct ExecutionOutcome {
    std::variant<SqlResult, ExecutionError> value;

    bool ok() const { return std::holds_alternative<SqlResult>(value); }
    const SqlResult& result() const { return std::get<SqlResult>(value); }
    const ExecutionError& error() const { return std::get<ExecutionError>(value); }
};

struct SqlCondition {
    std::string table;
    std::string column;
    std::string op;       // one of =, !=, <>, LIKE, IN
    std::string literal;  // string value as written (quotes removed)

    bool operator==(const SqlCondition&) const = default;
};

// All string-literal comparison predicates in WHERE/HAVING clauses, including
// inside subqueries. Aliases are expanded and unqualified columns resolved via
// the schema; join-equality predicates and non-string literals are excluded.
std::vector<SqlCondition> extract_conditions(const std::string& sql, const DatabaseEntry& entry);

// Read-only execution with a statement timeout. Engine errors are captured
// verbatim; non-SELECT statements are rejected without touching the file.
ExecutionOutcome execute_sql(const DatabaseEntry& entry, const std::string& sql,
                             double timeout_secs = 5.0);

// Order-insensitive multiset comparison; numeric cells use relative tolerance
// 1e-6, text and null cells compare exactly.
bool results_equal(const SqlResult& a, const SqlResult& b);

SqlResult truncate_result(const SqlResult& r, size_t n);

// {"columns":[...],"rows":[[...]],"truncated":bool} with nulls as JSON null.
nlohmann::ordered_json result_to_json(const SqlResult& r);
SqlResult result_from_json(const nlohmann::json& doc);

std::string cell_to_string(const SqlCell& cell);

}  // namespace relmem
