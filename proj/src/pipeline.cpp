#include "relmem/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <thread>

#include "relmem/errors.hpp"
#include "relmem/text.hpp"

using ordered_json = nlohmann::ordered_json;

namespace relmem {

nlohmann::ordered_json trace_to_json(const std::vector<TraceEvent>& trace, bool include_timings) {
    ordered_json out = ordered_json::array();
    for (const auto& event : trace) {
        ordered_json e;
        e["stage"] = event.stage;
        e["input"] = event.input;
        e["output"] = event.output;
        if (include_timings) e["duration_ms"] = event.duration_ms;
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

class StageTimer {
public:
    StageTimer(std::vector<TraceEvent>& trace, std::string stage, std::string input)
        : trace_(trace), start_(std::chrono::steady_clock::now()) {
        event_.stage = std::move(stage);
        event_.input = std::move(input);
    }
    void finish(std::string output) {
        event_.output = std::move(output);
        event_.duration_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
                .count();
        trace_.push_back(event_);
    }

private:
    std::vector<TraceEvent>& trace_;
    TraceEvent event_;
    std::chrono::steady_clock::time_point start_;
};

std::string format_score(double score) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", score);
    return buf;
}

std::string summarize_result(const SqlResult& result) {
    return "rows=" + std::to_string(result.rows.size()) +
           " cols=" + std::to_string(result.columns.size());
}

bool is_abort_code(ErrorCode code) {
    return code == ErrorCode::ProviderUnavailable || code == ErrorCode::UnmatchedPrompt ||
           code == ErrorCode::PromptTooLarge || code == ErrorCode::EmptyInput;
}

}  // namespace

Pipeline::Pipeline(const Catalog& catalog, const VectorIndex& selection_index,
                   const std::map<std::string, ValueMemory>& value_memories,
                   EmbeddingProvider& embedder, CompletionProvider& completion,
                   PipelineConfig config)
    : catalog_(&catalog),
      selection_index_(&selection_index),
      value_memories_(&value_memories),
      embedder_(&embedder),
      completion_(&completion),
      config_(config) {}

RetrievalOutcome Pipeline::run_target(const RetrievalTarget& target,
                                      std::vector<TraceEvent>& trace) const {
    RetrievalOutcome outcome;
    outcome.target = target;

    const DatabaseEntry* entry = catalog_->find(target.db_id);
    if (!entry) {
        outcome.excluded_reason = "database not in catalog: " + target.db_id;
        return outcome;
    }
    SchemaText schema = serialize_schema(*entry);

    // Text-to-SQL with the plan's candidate SQL as seed; the candidate is
    // also the fallback when the provider emits no statement.
    std::string sql;
    {
        StageTimer timer(trace, "text_to_sql", target.goal);
        try {
            sql = text_to_sql(*completion_, target.goal, schema.text, target.candidate_sql);
            timer.finish(sql);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoSqlInResponse) throw;
            sql = target.candidate_sql;
            timer.finish("no SQL in response; using plan candidate");
        }
    }
    if (trim(sql).empty()) {
        outcome.final_sql = sql;
        outcome.excluded_reason = "no SQL available for target";
        return outcome;
    }

    // Value grounding: look up synonyms for every string condition, then ask
    // the LLM to correct the statement when anything was found.
    {
        std::vector<SqlCondition> conditions;
        StageTimer timer(trace, "value_lookup", sql);
        std::string note;
        try {
            conditions = extract_conditions(sql, *entry);
        } catch (const Error& e) {
            note = std::string("condition extraction failed: ") + e.what();
        }

        std::vector<CandidateValueGroup> groups;
        auto memory_it = value_memories_->find(entry->id);
        if (!conditions.empty() && memory_it != value_memories_->end()) {
            for (const auto& cond : conditions) {
                ColumnKey key{entry->id, cond.table, cond.column};
                if (!memory_it->second.has_column(key)) continue;
                auto hits =
                    memory_it->second.lookup_synonyms(key, cond.literal, *embedder_,
                                                      config_.k_values);
                if (hits.empty()) continue;
                auto group = std::find_if(groups.begin(), groups.end(),
                                          [&](const CandidateValueGroup& g) { return g.key == key; });
                if (group == groups.end()) {
                    groups.push_back(CandidateValueGroup{key, {}});
                    group = groups.end() - 1;
                }
                for (auto& hit : hits)
                    if (std::find(group->values.begin(), group->values.end(), hit.value) ==
                        group->values.end())
                        group->values.push_back(hit.value);
            }
        }
        if (!note.empty())
            timer.finish(note);
        else
            timer.finish("conditions=" + std::to_string(conditions.size()) +
                         " candidate_columns=" + std::to_string(groups.size()));

        if (!groups.empty()) {
            StageTimer correct_timer(trace, "value_correction", sql);
            sql = correct_sql_with_values(*completion_, sql, groups, target.goal);
            correct_timer.finish(sql);
        }
    }

    // Execute; on engine errors, loop bounded error-based self-correction.
    ExecutionOutcome executed = [&] {
        StageTimer timer(trace, "execution", sql);
        auto out = execute_sql(*entry, sql, config_.execution_timeout_secs);
        timer.finish(out.ok() ? summarize_result(out.result()) : "error: " + out.error().message);
        return out;
    }();

    while (!executed.ok() && outcome.correction_attempts < config_.max_correction_attempts) {
        ++outcome.correction_attempts;
        {
            StageTimer timer(trace, "error_correction",
                             "attempt " + std::to_string(outcome.correction_attempts) + ": " +
                                 executed.error().message);
            try {
                sql = correct_sql_with_error(*completion_, schema.text, target.goal, sql,
                                             executed.error());
                timer.finish(sql);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NoSqlInResponse) throw;
                timer.finish("no SQL in response; keeping previous statement");
            }
        }
        StageTimer timer(trace, "execution", sql);
        executed = execute_sql(*entry, sql, config_.execution_timeout_secs);
        timer.finish(executed.ok() ? summarize_result(executed.result())
                                   : "error: " + executed.error().message);
    }

    outcome.final_sql = sql;
    if (executed.ok()) {
        outcome.result = executed.result();
    } else {
        outcome.excluded_reason = "execution failed after " +
                                  std::to_string(outcome.correction_attempts) +
                                  " correction attempts: " + executed.error().message;
    }
    return outcome;
}

PipelineResponse Pipeline::answer_impl(const std::string& question,
                                       std::vector<TraceEvent>& trace) const {
    PipelineResponse response;

    // (1) Context switch: skip retrieval when the question answers itself.
    ContextDecision decision;
    {
        StageTimer timer(trace, "context_switch", question);
        decision = decide_context_switch(*completion_, question);
        timer.finish(decision == ContextDecision::Answerable ? "answerable" : "needs_retrieval");
    }
    if (decision == ContextDecision::Answerable) {
        StageTimer timer(trace, "output_generation", "evidence=0");
        std::string text = generate_output(*completion_, question, {});
        timer.finish(text);
        response.kind = ResponseKind::Text;
        response.answer_text = text;
        response.trace = trace;
        return response;
    }

    // (2) Database selection memory.
    std::vector<SelectionCandidate> candidates;
    {
        StageTimer timer(trace, "selection", question);
        candidates = select_top_k(question, *selection_index_, *embedder_, config_.k_databases);
        std::string summary;
        for (const auto& c : candidates) {
            if (!summary.empty()) summary += ", ";
            summary += c.db_id + "(" + format_score(c.score) + ")";
        }
        timer.finish(summary);
    }
    std::vector<SchemaText> schemas;
    for (const auto& candidate : candidates) {
        response.candidate_db_ids.push_back(candidate.db_id);
        schemas.push_back(serialize_schema(*catalog_->find(candidate.db_id)));
    }

    // (3) LLM refinement and plan generation.
    RetrievalPlan plan;
    {
        StageTimer timer(trace, "plan", "candidates=" + std::to_string(schemas.size()));
        plan = generate_plan(*completion_, question, schemas);
        std::string summary = "targets=" + std::to_string(plan.targets.size());
        for (const auto& target : plan.targets) summary += " [" + target.db_id + "]";
        for (const auto& warning : plan.warnings) summary += " warning: " + warning;
        timer.finish(summary);
    }

    // (4)(5) Value-grounded SQL generation, execution, self-correction.
    for (const auto& target : plan.targets)
        response.outcomes.push_back(run_target(target, trace));

    // (6) Return-type decision: first goal-equivalent result wins.
    for (const auto& outcome : response.outcomes) {
        if (!outcome.ok()) continue;
        StageTimer timer(trace, "return_type", outcome.final_sql);
        bool equivalent = is_goal_sql_equivalent(*completion_, question, outcome.final_sql);
        timer.finish(equivalent ? "yes" : "no");
        if (equivalent) {
            response.kind = ResponseKind::SqlResult;
            response.answer_result =
                SqlAnswer{*outcome.result, outcome.final_sql, outcome.target.db_id};
            response.trace = trace;
            return response;
        }
    }

    // (7) Text output from the successful evidence.
    std::vector<EvidenceItem> evidence;
    for (const auto& outcome : response.outcomes)
        if (outcome.ok())
            evidence.push_back(EvidenceItem{
                outcome.final_sql, truncate_result(*outcome.result, config_.result_truncation_rows)});
    {
        StageTimer timer(trace, "output_generation", "evidence=" + std::to_string(evidence.size()));
        std::string text = generate_output(*completion_, question, evidence);
        timer.finish(text);
        response.kind = ResponseKind::Text;
        response.answer_text = text;
    }
    response.trace = trace;
    return response;
}

AnswerOutcome Pipeline::answer(const std::string& question) const {
    std::vector<TraceEvent> trace;
    AnswerOutcome outcome;
    try {
        outcome.response = answer_impl(question, trace);
    } catch (const Error& e) {
        if (!is_abort_code(e.code())) {
            outcome.failure = PipelineFailure{ErrorCode::Internal,
                                              std::string(e.code_name()) + ": " + e.what(), trace};
        } else {
            outcome.failure = PipelineFailure{e.code(), e.what(), trace};
        }
    } catch (const std::exception& e) {
        outcome.failure = PipelineFailure{ErrorCode::Internal, e.what(), trace};
    }
    return outcome;
}

std::vector<AnswerOutcome> Pipeline::answer_batch(const std::vector<std::string>& questions,
                                                  int parallelism) const {
    if (parallelism < 1) raise(ErrorCode::UsageError, "parallelism must be >= 1");
    std::vector<AnswerOutcome> results(questions.size());
    if (questions.empty()) return results;

    size_t workers = std::min<size_t>(parallelism, questions.size());
    if (workers == 1) {
        for (size_t i = 0; i < questions.size(); ++i) results[i] = answer(questions[i]);
        return results;
    }

    std::atomic<size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= questions.size()) break;
                results[i] = answer(questions[i]);
            }
        });
    }
    for (auto& t : threads) t.join();
    return results;
}

}  // namespace relmem
