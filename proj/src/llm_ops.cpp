#include "relmem/errors.hpp"
#include "relmem/llm.hpp"
#include "relmem/text.hpp"

namespace relmem {

namespace {

std::string complete_checked(CompletionProvider& provider, const std::string& prompt) {
    if (prompt.size() > provider.max_prompt_chars())
        raise(ErrorCode::PromptTooLarge,
              "prompt of " + std::to_string(prompt.size()) + " chars exceeds provider limit of " +
                  std::to_string(provider.max_prompt_chars()));
    return provider.complete(prompt);
}

}  // namespace

ContextDecision decide_context_switch(CompletionProvider& provider, const std::string& question) {
    if (trim(question).empty()) raise(ErrorCode::EmptyInput, "question must be non-empty");
    return parse_context_switch(complete_checked(provider, render_context_switch(question)));
}

RetrievalPlan generate_plan(CompletionProvider& provider, const std::string& question,
                            const std::vector<SchemaText>& candidate_schemas) {
    if (candidate_schemas.empty())
        raise(ErrorCode::EmptyInput, "plan generation needs at least one candidate schema");
    std::string prompt = render_plan_generation(question, candidate_schemas);
    return parse_plan(complete_checked(provider, prompt), candidate_schemas);
}

std::string correct_sql_with_values(CompletionProvider& provider, const std::string& sql,
                                    const std::vector<CandidateValueGroup>& candidates,
                                    const std::string& question) {
    if (candidates.empty())
        raise(ErrorCode::EmptyInput, "value correction called without candidate values");
    std::string response =
        complete_checked(provider, render_value_correction(sql, candidates, question));
    if (auto corrected = parse_corrected_sql(response)) return *corrected;
    return sql;  // fail-safe: keep the original statement
}

std::string correct_sql_with_error(CompletionProvider& provider, const std::string& schema_text,
                                   const std::string& question, const std::string& sql,
                                   const ExecutionError& error) {
    if (error.message.empty()) raise(ErrorCode::EmptyInput, "error message must be non-empty");
    std::string response = complete_checked(
        provider, render_error_correction(schema_text, question, sql, error.message));
    if (auto corrected = extract_first_sql(response)) return *corrected;
    raise(ErrorCode::NoSqlInResponse, "error-correction response contains no SQL statement");
}

bool is_goal_sql_equivalent(CompletionProvider& provider, const std::string& goal,
                            const std::string& sql) {
    std::string response = complete_checked(provider, render_return_type_decision(goal, sql));
    // Ambiguity prefers a textual answer over returning a raw table.
    return parse_yes_no(response).value_or(false);
}

std::string generate_output(CompletionProvider& provider, const std::string& question,
                            const std::vector<EvidenceItem>& evidence) {
    std::string response = complete_checked(provider, render_output_generation(question, evidence));
    return std::string(trim(response));
}

bool judge_equivalence(CompletionProvider& provider, const std::string& gold_answer,
                       const std::string& answer) {
    if (trim(gold_answer).empty() || trim(answer).empty())
        raise(ErrorCode::EmptyInput, "judge needs two non-empty answers");
    if (fold_text(gold_answer) == fold_text(answer)) return true;
    std::string response = complete_checked(provider, render_answer_judge(gold_answer, answer));
    return parse_yes_no(response).value_or(false);
}

std::string text_to_sql(CompletionProvider& provider, const std::string& goal,
                        const std::string& schema_text,
                        const std::optional<std::string>& seed_sql) {
    if (trim(schema_text).empty()) raise(ErrorCode::EmptyInput, "schema text must be non-empty");
    std::string response =
        complete_checked(provider, render_text_to_sql(goal, schema_text, seed_sql));
    if (auto sql = extract_first_sql(response)) return *sql;
    raise(ErrorCode::NoSqlInResponse, "text-to-SQL response contains no SQL statement");
}

}  // namespace relmem
