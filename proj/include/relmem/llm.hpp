#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "relmem/catalog.hpp"
#include "relmem/sql.hpp"
#include "relmem/value_memory.hpp"

namespace relmem {

class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    virtual const std::string& name() const = 0;
    virtual size_t max_prompt_chars() const { return 1 << 20; }

    // Single prompt in, single completion out. Failures surface as typed
    // errors, never as empty-string success.
    virtual std::string complete(const std::string& prompt) = 0;
};

enum class PromptKind {
    ContextSwitch,
    PlanGeneration,
    ValueCorrection,
    ErrorCorrection,
    ReturnTypeDecision,
    OutputGeneration,
    AnswerJudge,
    TextToSql,
};

// Raw template text (embedded copy of resources/prompts/<kind>.txt).
std::string_view prompt_template(PromptKind kind);

// ---- Prompt rendering ------------------------------------------------------

std::string render_context_switch(const std::string& question);
std::string render_plan_generation(const std::string& question,
                                   const std::vector<SchemaText>& candidate_schemas);

struct CandidateValueGroup {
    ColumnKey key;
    std::vector<std::string> values;  // raw stored bytes, rank order
};

std::string render_value_correction(const std::string& sql,
                                    const std::vector<CandidateValueGroup>& candidates,
                                    const std::string& question);
std::string render_error_correction(const std::string& schema_text, const std::string& question,
                                    const std::string& sql, const std::string& error_message);
std::string render_return_type_decision(const std::string& question, const std::string& sql);
struct EvidenceItem {
    std::string sql;
    SqlResult result;  // already truncated for prompting
};
std::string render_output_generation(const std::string& question,
                                     const std::vector<EvidenceItem>& evidence);
std::string render_answer_judge(const std::string& gold_answer, const std::string& answer);
std::string render_text_to_sql(const std::string& goal, const std::string& schema_text,
                               const std::optional<std::string>& seed_sql);

// ---- Response parsing ------------------------------------------------------

enum class ContextDecision { Answerable, NeedsRetrieval };

struct RetrievalTarget {
    std::string goal;
    std::string candidate_sql;
    std::string db_id;
};

struct RetrievalPlan {
    std::vector<RetrievalTarget> targets;   // LLM emission order
    std::vector<std::string> warnings;      // dropped blocks and similar
};

// Ambiguous output (neither "(YES)" nor "(NO)") defaults to NeedsRetrieval.
ContextDecision parse_context_switch(const std::string& response);

// `candidates` maps each offered database for response matching; blocks
// naming anything else are dropped with a warning.
RetrievalPlan parse_plan(const std::string& response, const std::vector<SchemaText>& candidates);

// Statement after the final "Corrected SQL:" marker; nullopt when absent.
std::optional<std::string> parse_corrected_sql(const std::string& response);

// First SQL statement, fenced or starting with SELECT (case-insensitive).
std::optional<std::string> extract_first_sql(const std::string& response);

// First standalone yes/no token; nullopt when neither appears.
std::optional<bool> parse_yes_no(const std::string& response);

// ---- Operations ------------------------------------------------------------

ContextDecision decide_context_switch(CompletionProvider& provider, const std::string& question);
RetrievalPlan generate_plan(CompletionProvider& provider, const std::string& question,
                            const std::vector<SchemaText>& candidate_schemas);
// Returns the original sql unchanged when the response cannot be parsed.
std::string correct_sql_with_values(CompletionProvider& provider, const std::string& sql,
                                    const std::vector<CandidateValueGroup>& candidates,
                                    const std::string& question);
std::string correct_sql_with_error(CompletionProvider& provider, const std::string& schema_text,
                                   const std::string& question, const std::string& sql,
                                   const ExecutionError& error);
bool is_goal_sql_equivalent(CompletionProvider& provider, const std::string& goal,
                            const std::string& sql);
std::string generate_output(CompletionProvider& provider, const std::string& question,
                            const std::vector<EvidenceItem>& evidence);
// Case/whitespace-folded exact match short-circuits without a provider call.
bool judge_equivalence(CompletionProvider& provider, const std::string& gold_answer,
                       const std::string& answer);
std::string text_to_sql(CompletionProvider& provider, const std::string& goal,
                        const std::string& schema_text,
                        const std::optional<std::string>& seed_sql = std::nullopt);

// ---- Providers -------------------------------------------------------------

// Deterministic offline provider driven by ordered (matcher, response) rules.
// The first matching rule wins; rules marked once are consumed. A prompt that
// matches nothing raises UnmatchedPrompt so test scripts must be exhaustive.
class ScriptedMockProvider : public CompletionProvider {
public:
    ScriptedMockProvider() = default;

    // JSON Lines: {"match":"...","regex":bool,"response":"...","once":bool}
    static ScriptedMockProvider from_file(const std::string& path);
    static ScriptedMockProvider from_jsonl(const std::string& jsonl);

    void add_rule(const std::string& match, const std::string& response, bool regex = false,
                  bool once = false);

    const std::string& name() const override { return name_; }
    std::string complete(const std::string& prompt) override;

private:
    struct Rule {
        std::string match;
        std::string response;
        bool regex = false;
        bool once = false;
        bool used = false;
    };

    std::string name_ = "scripted-mock";
    std::vector<Rule> rules_;
    std::mutex mutex_;
};

// POST <base_url>/complete {"prompt":"..."} -> {"text":"..."}
class HttpCompletionProvider : public CompletionProvider {
public:
    explicit HttpCompletionProvider(std::string base_url, size_t max_prompt_chars = 1 << 20);

    const std::string& name() const override { return name_; }
    size_t max_prompt_chars() const override { return max_prompt_chars_; }
    std::string complete(const std::string& prompt) override;

private:
    std::string base_url_;
    std::string name_;
    size_t max_prompt_chars_;
};

// Wraps another provider and reports every prompt/response pair, used for
// the --trace JSON-lines log.
class TracingProvider : public CompletionProvider {
public:
    using Sink = std::function<void(const std::string& prompt, const std::string& response)>;

    TracingProvider(CompletionProvider& inner, Sink sink)
        : inner_(inner), sink_(std::move(sink)) {}

    const std::string& name() const override { return inner_.name(); }
    size_t max_prompt_chars() const override { return inner_.max_prompt_chars(); }
    std::string complete(const std::string& prompt) override {
        std::string response = inner_.complete(prompt);
        if (sink_) sink_(prompt, response);
        return response;
    }

private:
    CompletionProvider& inner_;
    Sink sink_;
};

}  // namespace relmem
