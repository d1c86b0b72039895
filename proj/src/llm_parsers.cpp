#include <cctype>
#include <sstream>

#include "relmem/llm.hpp"
#include "relmem/text.hpp"

namespace relmem {

ContextDecision parse_context_switch(const std::string& response) {
    size_t yes = response.find("(YES)");
    size_t no = response.find("(NO)");
    if (yes == std::string::npos && no == std::string::npos)
        return ContextDecision::NeedsRetrieval;  // malformed output, safe default
    if (yes == std::string::npos) return ContextDecision::NeedsRetrieval;
    if (no == std::string::npos) return ContextDecision::Answerable;
    return yes < no ? ContextDecision::Answerable : ContextDecision::NeedsRetrieval;
}

namespace {

std::string strip_decorations(std::string_view s) {
    auto t = trim(s);
    while (!t.empty() && (t.front() == ':' || t.front() == '"' || t.front() == '\'' ||
                          t.front() == '`' || t.front() == '*'))
        t.remove_prefix(1);
    while (!t.empty() && (t.back() == '.' || t.back() == '"' || t.back() == '\'' ||
                          t.back() == '`' || t.back() == '*' || t.back() == ','))
        t.remove_suffix(1);
    return std::string(trim(t));
}

bool word_boundary(const std::string& s, size_t pos, size_t len) {
    auto is_word = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    if (pos > 0 && is_word(s[pos - 1])) return false;
    if (pos + len < s.size() && is_word(s[pos + len])) return false;
    return true;
}

size_t find_ci(const std::string& haystack, const std::string& needle, size_t from = 0) {
    if (needle.empty()) return std::string::npos;
    std::string lower_h = to_lower(haystack);
    std::string lower_n = to_lower(needle);
    return lower_h.find(lower_n, from);
}

}  // namespace

RetrievalPlan parse_plan(const std::string& response, const std::vector<SchemaText>& candidates) {
    // Candidate lookup by display name (SchemaText line 1) and by id.
    std::map<std::string, std::string> by_key;
    for (const auto& schema : candidates) {
        by_key[to_lower(schema.db_id)] = schema.db_id;
        size_t nl = schema.text.find('\n');
        std::string first = nl == std::string::npos ? schema.text : schema.text.substr(0, nl);
        if (starts_with_ci(first, "Database "))
            by_key[to_lower(std::string(trim(first.substr(9))))] = schema.db_id;
    }

    RetrievalPlan plan;
    std::optional<std::string> goal;
    std::optional<std::string> sql;
    bool collecting_sql = false;
    std::string sql_buffer;

    static const std::string kBegin = "*Begin SQL*";
    static const std::string kEnd = "*End SQL*";

    std::istringstream in(response);
    std::string raw_line;
    while (std::getline(in, raw_line)) {
        std::string line(trim(raw_line));

        if (collecting_sql) {
            size_t end = line.find(kEnd);
            if (end == std::string::npos) {
                sql_buffer += (sql_buffer.empty() ? "" : " ") + line;
                continue;
            }
            sql_buffer += (sql_buffer.empty() ? "" : " ") + line.substr(0, end);
            sql = std::string(trim(sql_buffer));
            collecting_sql = false;
            line = std::string(trim(line.substr(end + kEnd.size())));
            if (line.empty()) continue;
        }

        if (starts_with_ci(line, "Goal:")) {
            goal = strip_decorations(line.substr(5));
            sql.reset();
            continue;
        }

        size_t begin = line.find(kBegin);
        if (begin != std::string::npos) {
            size_t end = line.find(kEnd, begin + kBegin.size());
            if (end != std::string::npos) {
                sql = std::string(trim(std::string_view(line).substr(begin + kBegin.size(),
                                                                     end - begin - kBegin.size())));
            } else {
                sql_buffer = std::string(trim(line.substr(begin + kBegin.size())));
                collecting_sql = true;
            }
            continue;
        }

        if (starts_with_ci(line, "Database") &&
            (line.size() == 8 || !std::isalnum(static_cast<unsigned char>(line[8])))) {
            std::string written = strip_decorations(line.substr(8));
            if (!goal && !sql) continue;  // header echo, not a plan block
            auto it = by_key.find(to_lower(written));
            if (it == by_key.end()) {
                plan.warnings.push_back("dropped plan block naming unknown database '" + written +
                                        "'");
            } else if (!sql || trim(*sql).empty()) {
                plan.warnings.push_back("dropped plan block for '" + written + "' without SQL");
            } else {
                plan.targets.push_back(
                    RetrievalTarget{goal.value_or(""), *sql, it->second});
            }
            goal.reset();
            sql.reset();
        }
    }
    return plan;
}

std::optional<std::string> extract_first_sql(const std::string& response) {
    // Fenced block first.
    size_t fence = response.find("```");
    if (fence != std::string::npos) {
        size_t body_start = fence + 3;
        size_t fence_end = response.find("```", body_start);
        std::string body = fence_end == std::string::npos
                               ? response.substr(body_start)
                               : response.substr(body_start, fence_end - body_start);
        // Drop a language tag on the fence line.
        size_t nl = body.find('\n');
        if (nl != std::string::npos && trim(body.substr(0, nl)).size() <= 12 &&
            body.substr(0, nl).find(' ') == std::string::npos)
            body = body.substr(nl + 1);
        size_t sel = find_ci(body, "select");
        if (sel != std::string::npos && word_boundary(body, sel, 6)) {
            std::string stmt = body.substr(sel);
            size_t semi = stmt.find(';');
            if (semi != std::string::npos) stmt = stmt.substr(0, semi);
            std::string out(trim(stmt));
            if (!out.empty()) return out;
        }
    }

    size_t sel = 0;
    while ((sel = find_ci(response, "select", sel)) != std::string::npos) {
        if (word_boundary(response, sel, 6)) break;
        sel += 6;
    }
    if (sel == std::string::npos) return std::nullopt;
    std::string stmt = response.substr(sel);
    size_t semi = stmt.find(';');
    if (semi != std::string::npos) stmt = stmt.substr(0, semi);
    size_t fence2 = stmt.find("```");
    if (fence2 != std::string::npos) stmt = stmt.substr(0, fence2);
    std::string out(trim(stmt));
    if (out.empty()) return std::nullopt;
    return out;
}

std::optional<std::string> parse_corrected_sql(const std::string& response) {
    static const std::string kMarker = "Corrected SQL:";
    size_t pos = response.rfind(kMarker);
    if (pos == std::string::npos) return std::nullopt;
    std::string tail = response.substr(pos + kMarker.size());
    size_t reasons = find_ci(tail, "reasons:");
    if (reasons != std::string::npos) tail = tail.substr(0, reasons);
    return extract_first_sql(tail);
}

std::optional<bool> parse_yes_no(const std::string& response) {
    std::string token;
    for (size_t i = 0; i <= response.size(); ++i) {
        char c = i < response.size() ? response[i] : ' ';
        if (std::isalpha(static_cast<unsigned char>(c))) {
            token.push_back(ascii_lower(c));
            continue;
        }
        if (token == "yes") return true;
        if (token == "no") return false;
        token.clear();
    }
    return std::nullopt;
}

}  // namespace relmem
