#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relmem/catalog.hpp"
#include "relmem/embedding.hpp"
#include "relmem/llm.hpp"
#include "relmem/selection.hpp"
#include "relmem/sql.hpp"
#include "relmem/value_memory.hpp"

namespace relmem {

struct PipelineConfig {
    size_t k_databases = 5;            // selection memory top-K
    size_t k_values = 10;              // value synonyms per column
    int max_correction_attempts = 3;   // error-based self-correction bound
    size_t result_truncation_rows = 10;
    double execution_timeout_secs = 5.0;
    size_t max_values_per_column = 0;  // 0 = uncapped
};

struct TraceEvent {
    std::string stage;
    std::string input;
    std::string output;
    double duration_ms = 0.0;
};

// Durations are excluded unless asked for, so that traces of identical runs
// are byte-identical.
nlohmann::ordered_json trace_to_json(const std::vector<TraceEvent>& trace,
                                     bool include_timings = false);

enum class ResponseKind { Text, SqlResult };

struct SqlAnswer {
    SqlResult result;  // untruncated
    std::string sql;
    std::string db_id;
};

struct RetrievalOutcome {
    RetrievalTarget target;
    std::string final_sql;
    std::optional<SqlResult> result;
    std::optional<std::string> excluded_reason;
    int correction_attempts = 0;

    bool ok() const { return result.has_value(); }
};

struct PipelineResponse {
    ResponseKind kind = ResponseKind::Text;
    std::optional<std::string> answer_text;
    std::optional<SqlAnswer> answer_result;
    std::vector<TraceEvent> trace;

    // Structured extras consumed by the evaluation harness.
    std::vector<std::string> candidate_db_ids;  // selection memory output
    std::vector<RetrievalOutcome> outcomes;     // per plan target
};

struct PipelineFailure {
    ErrorCode code = ErrorCode::Internal;
    std::string message;
    std::vector<TraceEvent> trace;  // partial trace up to the failure
};

struct AnswerOutcome {
    std::optional<PipelineResponse> response;
    std::optional<PipelineFailure> failure;

    bool ok() const { return response.has_value(); }
};

// Stateless orchestrator; shares the immutable catalog and indexes across
// concurrent answer() calls. Providers are the only shared mutable parts.
class Pipeline {
public:
    Pipeline(const Catalog& catalog, const VectorIndex& selection_index,
             const std::map<std::string, ValueMemory>& value_memories,
             EmbeddingProvider& embedder, CompletionProvider& completion,
             PipelineConfig config = {});

    AnswerOutcome answer(const std::string& question) const;
    std::vector<AnswerOutcome> answer_batch(const std::vector<std::string>& questions,
                                            int parallelism = 1) const;

    const PipelineConfig& config() const { return config_; }
    const Catalog& catalog() const { return *catalog_; }

private:
    PipelineResponse answer_impl(const std::string& question, std::vector<TraceEvent>& trace) const;
    RetrievalOutcome run_target(const RetrievalTarget& target,
                                std::vector<TraceEvent>& trace) const;

    const Catalog* catalog_;
    const VectorIndex* selection_index_;
    const std::map<std::string, ValueMemory>* value_memories_;
    EmbeddingProvider* embedder_;
    CompletionProvider* completion_;
    PipelineConfig config_;
};

}  // namespace relmem
