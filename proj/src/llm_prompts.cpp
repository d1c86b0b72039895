#include <map>

#include "relmem/errors.hpp"
#include "relmem/llm.hpp"
#include "relmem/prompts_embedded.hpp"
#include "relmem/text.hpp"

namespace relmem {

std::string_view prompt_template(PromptKind kind) {
    switch (kind) {
        case PromptKind::ContextSwitch: return embedded::context_switch;
        case PromptKind::PlanGeneration: return embedded::plan_generation;
        case PromptKind::ValueCorrection: return embedded::value_correction;
        case PromptKind::ErrorCorrection: return embedded::error_correction;
        case PromptKind::ReturnTypeDecision: return embedded::return_type_decision;
        case PromptKind::OutputGeneration: return embedded::output_generation;
        case PromptKind::AnswerJudge: return embedded::answer_judge;
        case PromptKind::TextToSql: return embedded::text_to_sql;
    }
    raise(ErrorCode::Internal, "unknown prompt kind");
}

namespace {

std::string render(PromptKind kind, const std::map<std::string, std::string>& slots) {
    std::string_view tmpl = prompt_template(kind);
    std::string out;
    out.reserve(tmpl.size() + 256);
    size_t i = 0;
    while (i < tmpl.size()) {
        size_t open = tmpl.find("<<", i);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        size_t close = tmpl.find(">>", open + 2);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        out.append(tmpl.substr(i, open - i));
        std::string name(tmpl.substr(open + 2, close - open - 2));
        auto it = slots.find(name);
        if (it == slots.end())
            raise(ErrorCode::Internal, "template slot without value: " + name);
        out.append(it->second);
        i = close + 2;
    }
    return out;
}

// Quotes a candidate value following the layout of the in-template example:
// single quotes by default, double quotes when the value itself has one.
std::string quote_value(const std::string& value) {
    bool has_single = value.find('\'') != std::string::npos;
    bool has_double = value.find('"') != std::string::npos;
    if (has_single && !has_double) return "\"" + value + "\"";
    if (has_single && has_double) {
        std::string out = "'";
        for (char c : value) {
            if (c == '\'') out += "\\'";
            else out.push_back(c);
        }
        return out + "'";
    }
    return "'" + value + "'";
}

}  // namespace

std::string render_context_switch(const std::string& question) {
    return render(PromptKind::ContextSwitch, {{"question", question}});
}

std::string render_plan_generation(const std::string& question,
                                   const std::vector<SchemaText>& candidate_schemas) {
    std::string block;
    for (size_t i = 0; i < candidate_schemas.size(); ++i) {
        if (i) block += "\n";
        const std::string& text = candidate_schemas[i].text;
        size_t nl = text.find('\n');
        // SchemaText line 1 is "Database <name>"; the rest goes under Schema:.
        block += nl == std::string::npos ? text : text.substr(0, nl);
        block += "\nSchema: ";
        if (nl != std::string::npos) block += text.substr(nl + 1);
    }
    return render(PromptKind::PlanGeneration, {{"schemas", block}, {"question", question}});
}

std::string render_value_correction(const std::string& sql,
                                    const std::vector<CandidateValueGroup>& candidates,
                                    const std::string& question) {
    std::string block;
    for (size_t i = 0; i < candidates.size(); ++i) {
        if (i) block += "\n";
        block += "Table: " + candidates[i].key.table + "; Column: " + candidates[i].key.column +
                 "; Values: [";
        for (size_t j = 0; j < candidates[i].values.size(); ++j) {
            if (j) block += ", ";
            block += quote_value(candidates[i].values[j]);
        }
        block += "]";
    }
    return render(PromptKind::ValueCorrection,
                  {{"sql", sql}, {"candidate_values", block}, {"question", question}});
}

std::string render_error_correction(const std::string& schema_text, const std::string& question,
                                    const std::string& sql, const std::string& error_message) {
    return render(PromptKind::ErrorCorrection, {{"schema", schema_text},
                                                {"question", question},
                                                {"sql", sql},
                                                {"error", error_message}});
}

std::string render_return_type_decision(const std::string& question, const std::string& sql) {
    return render(PromptKind::ReturnTypeDecision, {{"question", question}, {"sql", sql}});
}

std::string render_output_generation(const std::string& question,
                                     const std::vector<EvidenceItem>& evidence) {
    std::string block;
    if (evidence.empty()) {
        block = "(none)";
    } else {
        for (size_t i = 0; i < evidence.size(); ++i) {
            if (i) block += "\n";
            block += "SQL: " + evidence[i].sql + "\nResult: " +
                     result_to_json(evidence[i].result).dump();
        }
    }
    return render(PromptKind::OutputGeneration, {{"results", block}, {"question", question}});
}

std::string render_answer_judge(const std::string& gold_answer, const std::string& answer) {
    return render(PromptKind::AnswerJudge, {{"gold", gold_answer}, {"answer", answer}});
}

std::string render_text_to_sql(const std::string& goal, const std::string& schema_text,
                               const std::optional<std::string>& seed_sql) {
    std::string hint;
    if (seed_sql && !trim(*seed_sql).empty()) hint = "Example SQL: " + *seed_sql + "\n";
    return render(PromptKind::TextToSql,
                  {{"schema", schema_text}, {"goal", goal}, {"seed_hint", hint}});
}

}  // namespace relmem
