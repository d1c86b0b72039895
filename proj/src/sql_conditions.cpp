#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <unordered_map>

#include "relmem/errors.hpp"
#include "relmem/sql.hpp"
#include "relmem/text.hpp"

namespace relmem {

namespace {

enum class TokKind { Ident, String, Number, Punct, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;   // identifier name (unquoted), string value (unescaped), or symbol
    std::string upper;  // uppercase of text, for keyword checks
    size_t pos = 0;
};

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
           static_cast<unsigned char>(c) >= 0x80;
}

bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9') || c == '$';
}

std::vector<Token> tokenize(const std::string& sql) {
    std::vector<Token> out;
    size_t i = 0;
    const size_t n = sql.size();
    auto push = [&](TokKind kind, std::string text, size_t pos) {
        Token t;
        t.kind = kind;
        t.upper = text;
        for (auto& ch : t.upper) ch = char(std::toupper(static_cast<unsigned char>(ch)));
        t.text = std::move(text);
        t.pos = pos;
        out.push_back(std::move(t));
    };

    while (i < n) {
        char c = sql[i];
        if (is_space(c)) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            size_t end = sql.find("*/", i + 2);
            if (end == std::string::npos)
                raise(ErrorCode::ParseError, "unterminated comment in SQL");
            i = end + 2;
            continue;
        }
        if (c == '\'') {
            std::string value;
            size_t start = i++;
            bool closed = false;
            while (i < n) {
                if (sql[i] == '\'') {
                    if (i + 1 < n && sql[i + 1] == '\'') {
                        value.push_back('\'');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                value.push_back(sql[i++]);
            }
            if (!closed) raise(ErrorCode::ParseError, "unterminated string literal in SQL");
            push(TokKind::String, std::move(value), start);
            continue;
        }
        if (c == '"' || c == '`' || c == '[') {
            char close = c == '[' ? ']' : c;
            std::string name;
            size_t start = i++;
            bool closed = false;
            while (i < n) {
                if (sql[i] == close) {
                    if (close != ']' && i + 1 < n && sql[i + 1] == close) {
                        name.push_back(close);
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                name.push_back(sql[i++]);
            }
            if (!closed) raise(ErrorCode::ParseError, "unterminated quoted identifier in SQL");
            push(TokKind::Ident, std::move(name), start);
            continue;
        }
        if (is_ident_start(c)) {
            size_t start = i;
            while (i < n && is_ident_char(sql[i])) ++i;
            push(TokKind::Ident, sql.substr(start, i - start), start);
            continue;
        }
        if ((c >= '0' && c <= '9') ||
            (c == '.' && i + 1 < n && sql[i + 1] >= '0' && sql[i + 1] <= '9')) {
            size_t start = i;
            while (i < n && (std::isdigit(static_cast<unsigned char>(sql[i])) || sql[i] == '.' ||
                             sql[i] == 'e' || sql[i] == 'E' ||
                             ((sql[i] == '+' || sql[i] == '-') && i > start &&
                              (sql[i - 1] == 'e' || sql[i - 1] == 'E'))))
                ++i;
            push(TokKind::Number, sql.substr(start, i - start), start);
            continue;
        }
        // Multi-char operators first.
        static const char* two_char[] = {"<>", "!=", "<=", ">=", "||", "=="};
        bool matched = false;
        for (const char* op : two_char) {
            if (c == op[0] && i + 1 < n && sql[i + 1] == op[1]) {
                push(TokKind::Punct, std::string(op), i);
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        push(TokKind::Punct, std::string(1, c), i);
        ++i;
    }
    push(TokKind::End, "", n);
    return out;
}

const std::set<std::string> kNotAnAlias = {
    "WHERE",  "JOIN",   "ON",     "GROUP",   "ORDER",  "LIMIT",  "HAVING", "UNION",
    "INTERSECT", "EXCEPT", "LEFT", "RIGHT",  "INNER",  "OUTER",  "CROSS",  "NATURAL",
    "FULL",   "AS",     "USING",  "SELECT",  "FROM",   "AND",    "OR",     "NOT",
    "SET",    "OFFSET", "WINDOW", "BY"};

struct AliasScope {
    // alias (lowercase) -> canonical schema table name; "" for derived tables
    std::unordered_map<std::string, std::string> aliases;
    // all schema tables referenced anywhere in the statement
    std::vector<const TableSchema*> referenced;
};

size_t skip_balanced(const std::vector<Token>& toks, size_t open_idx) {
    int depth = 0;
    size_t i = open_idx;
    for (; toks[i].kind != TokKind::End; ++i) {
        if (toks[i].kind == TokKind::Punct && toks[i].text == "(") ++depth;
        if (toks[i].kind == TokKind::Punct && toks[i].text == ")") {
            if (--depth == 0) return i + 1;
        }
    }
    raise(ErrorCode::ParseError, "unbalanced parentheses in SQL");
}

// Parses table references after FROM/JOIN, registering aliases.
size_t collect_table_ref(const std::vector<Token>& toks, size_t i, const DatabaseEntry& entry,
                         AliasScope& scope, bool allow_comma_list) {
    while (true) {
        const Token& t = toks[i];
        std::string canonical;
        std::string written;
        if (t.kind == TokKind::Punct && t.text == "(") {
            i = skip_balanced(toks, i);  // derived table or parenthesized join
        } else if (t.kind == TokKind::Ident) {
            written = t.text;
            ++i;
            // schema-qualified name: keep the last component
            while (toks[i].kind == TokKind::Punct && toks[i].text == "." &&
                   toks[i + 1].kind == TokKind::Ident) {
                written = toks[i + 1].text;
                i += 2;
            }
            const TableSchema* table = entry.find_table(written);
            if (table) {
                canonical = table->name;
                if (std::find(scope.referenced.begin(), scope.referenced.end(), table) ==
                    scope.referenced.end())
                    scope.referenced.push_back(table);
                scope.aliases.emplace(to_lower(table->name), table->name);
            }
        } else {
            return i;
        }

        // Optional alias: AS x, or a bare identifier that is not a keyword.
        if (toks[i].kind == TokKind::Ident && toks[i].upper == "AS" &&
            toks[i + 1].kind == TokKind::Ident) {
            scope.aliases[to_lower(toks[i + 1].text)] = canonical;
            i += 2;
        } else if (toks[i].kind == TokKind::Ident && !kNotAnAlias.count(toks[i].upper)) {
            scope.aliases[to_lower(toks[i].text)] = canonical;
            ++i;
        }

        if (allow_comma_list && toks[i].kind == TokKind::Punct && toks[i].text == ",") {
            ++i;
            continue;
        }
        return i;
    }
}

AliasScope build_alias_scope(const std::vector<Token>& toks, const DatabaseEntry& entry) {
    AliasScope scope;
    for (size_t i = 0; toks[i].kind != TokKind::End; ++i) {
        if (toks[i].kind != TokKind::Ident) continue;
        if (toks[i].upper == "FROM")
            collect_table_ref(toks, i + 1, entry, scope, /*allow_comma_list=*/true);
        else if (toks[i].upper == "JOIN")
            collect_table_ref(toks, i + 1, entry, scope, /*allow_comma_list=*/false);
    }
    return scope;
}

struct ColumnRef {
    std::string qualifier;  // as written; empty when unqualified
    std::string column;     // as written
    size_t next = 0;        // token index after the reference
};

std::optional<ColumnRef> match_column_ref(const std::vector<Token>& toks, size_t i) {
    if (toks[i].kind != TokKind::Ident) return std::nullopt;
    if (kNotAnAlias.count(toks[i].upper)) return std::nullopt;
    ColumnRef ref;
    if (toks[i + 1].kind == TokKind::Punct && toks[i + 1].text == "." &&
        toks[i + 2].kind == TokKind::Ident) {
        ref.qualifier = toks[i].text;
        ref.column = toks[i + 2].text;
        ref.next = i + 3;
    } else {
        ref.column = toks[i].text;
        ref.next = i + 1;
    }
    // A '(' right after means this is a function call, not a column.
    if (toks[ref.next].kind == TokKind::Punct && toks[ref.next].text == "(") return std::nullopt;
    return ref;
}

// Resolves a written reference to (table, column) in schema casing. Returns
// nullopt when the reference cannot belong to a schema table (derived table,
// unknown alias); throws for unknown/ambiguous columns on known tables.
std::optional<std::pair<std::string, std::string>> resolve_column(const ColumnRef& ref,
                                                                  const DatabaseEntry& entry,
                                                                  const AliasScope& scope) {
    if (!ref.qualifier.empty()) {
        auto it = scope.aliases.find(to_lower(ref.qualifier));
        std::string table_name;
        if (it != scope.aliases.end())
            table_name = it->second;
        else if (const TableSchema* t = entry.find_table(ref.qualifier))
            table_name = t->name;
        if (table_name.empty()) return std::nullopt;  // derived table or unknown alias
        const TableSchema* table = entry.find_table(table_name);
        const ColumnDef* col = table ? table->find_column(ref.column) : nullptr;
        if (!col)
            raise(ErrorCode::UnknownColumn,
                  "column " + ref.qualifier + "." + ref.column + " does not exist");
        return std::make_pair(table->name, col->name);
    }

    const TableSchema* owner = nullptr;
    const ColumnDef* found = nullptr;
    for (const TableSchema* table : scope.referenced) {
        if (const ColumnDef* col = table->find_column(ref.column)) {
            if (found)
                raise(ErrorCode::AmbiguousColumn,
                      "column " + ref.column + " is ambiguous between " + owner->name + " and " +
                          table->name);
            owner = table;
            found = col;
        }
    }
    if (!found) {
        if (scope.referenced.empty()) return std::nullopt;  // no schema tables in scope
        raise(ErrorCode::UnknownColumn, "column " + ref.column + " does not exist");
    }
    return std::make_pair(owner->name, found->name);
}

}  // namespace

std::vector<SqlCondition> extract_conditions(const std::string& sql, const DatabaseEntry& entry) {
    if (trim(sql).empty()) raise(ErrorCode::ParseError, "empty SQL");
    auto toks = tokenize(sql);

    // Single SELECT statement: a ';' may only be trailing.
    size_t last_real = 0;
    for (size_t i = 0; toks[i].kind != TokKind::End; ++i) last_real = i;
    for (size_t i = 0; toks[i].kind != TokKind::End; ++i) {
        if (toks[i].kind == TokKind::Punct && toks[i].text == ";" && i != last_real)
            raise(ErrorCode::ParseError, "multiple SQL statements");
    }
    if (toks[0].kind != TokKind::Ident || toks[0].upper != "SELECT")
        raise(ErrorCode::ParseError, "not a SELECT statement");

    AliasScope scope = build_alias_scope(toks, entry);

    std::vector<SqlCondition> out;
    // in_condition[d] tells whether depth d is inside a WHERE/HAVING clause.
    std::vector<bool> in_condition = {false};

    auto clause_breaker = [](const Token& t) {
        return t.kind == TokKind::Ident &&
               (t.upper == "GROUP" || t.upper == "ORDER" || t.upper == "LIMIT" ||
                t.upper == "WINDOW" || t.upper == "UNION" || t.upper == "INTERSECT" ||
                t.upper == "EXCEPT" || t.upper == "SELECT" || t.upper == "FROM");
    };

    for (size_t i = 0; toks[i].kind != TokKind::End; ++i) {
        const Token& t = toks[i];

        if (t.kind == TokKind::Punct && t.text == "(") {
            bool subquery = toks[i + 1].kind == TokKind::Ident && toks[i + 1].upper == "SELECT";
            in_condition.push_back(subquery ? false : in_condition.back());
            continue;
        }
        if (t.kind == TokKind::Punct && t.text == ")") {
            if (in_condition.size() > 1) in_condition.pop_back();
            continue;
        }
        if (t.kind == TokKind::Ident && (t.upper == "WHERE" || t.upper == "HAVING")) {
            in_condition.back() = true;
            continue;
        }
        if (clause_breaker(t)) {
            in_condition.back() = false;
            continue;
        }
        if (!in_condition.back()) continue;

        // column <op> 'literal'   |   'literal' <op> column
        auto ref = match_column_ref(toks, i);
        if (ref) {
            const Token& op = toks[ref->next];
            bool symbolic = op.kind == TokKind::Punct &&
                            (op.text == "=" || op.text == "!=" || op.text == "<>");
            bool like = op.kind == TokKind::Ident && op.upper == "LIKE";
            bool in_list = op.kind == TokKind::Ident && op.upper == "IN";

            if ((symbolic || like) && toks[ref->next + 1].kind == TokKind::String) {
                if (auto resolved = resolve_column(*ref, entry, scope))
                    out.push_back(SqlCondition{resolved->first, resolved->second,
                                               like ? "LIKE" : op.text,
                                               toks[ref->next + 1].text});
                i = ref->next + 1;
                continue;
            }
            if (in_list && toks[ref->next + 1].kind == TokKind::Punct &&
                toks[ref->next + 1].text == "(") {
                size_t j = ref->next + 2;
                if (toks[j].kind == TokKind::Ident && toks[j].upper == "SELECT")
                    continue;  // IN (SELECT ...): recursion via the depth scan
                auto resolved = resolve_column(*ref, entry, scope);
                for (; toks[j].kind != TokKind::End; ++j) {
                    if (toks[j].kind == TokKind::Punct && toks[j].text == ")") break;
                    if (toks[j].kind == TokKind::String && resolved)
                        out.push_back(SqlCondition{resolved->first, resolved->second, "IN",
                                                   toks[j].text});
                }
                i = j;
                continue;
            }
            // column <op> column (join equality) and non-string literals fall
            // through unextracted.
            if (symbolic || like) {
                i = ref->next;
                continue;
            }
        }

        // 'literal' <op> column
        if (t.kind == TokKind::String) {
            const Token& op = toks[i + 1];
            bool symbolic = op.kind == TokKind::Punct &&
                            (op.text == "=" || op.text == "!=" || op.text == "<>");
            bool like = op.kind == TokKind::Ident && op.upper == "LIKE";
            if (symbolic || like) {
                if (auto ref2 = match_column_ref(toks, i + 2)) {
                    if (auto resolved = resolve_column(*ref2, entry, scope))
                        out.push_back(SqlCondition{resolved->first, resolved->second,
                                                   like ? "LIKE" : op.text, t.text});
                    i = ref2->next - 1;
                }
            }
        }
    }
    return out;
}

}  // namespace relmem
