#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relmem/pipeline.hpp"
#include "relmem/sql.hpp"

namespace relmem {

enum class QuestionType { ZeroDb, SingleDb, DoubleDb, Unanswerable };

std::string_view question_type_name(QuestionType type);
QuestionType question_type_from_name(std::string_view name);

struct EvalQuestion {
    std::string id;
    QuestionType qtype = QuestionType::ZeroDb;
    std::string question;
    std::vector<std::string> gold_db_ids;  // aligned with gold_sqls
    std::vector<std::string> gold_sqls;
    std::optional<std::string> gold_answer;
};

void validate_question(const EvalQuestion& q);

// JSON Lines: one EvalQuestion per line.
std::vector<EvalQuestion> load_dataset(const std::string& path);
std::string dataset_to_jsonl(const std::vector<EvalQuestion>& questions);

// Appendix-style composite: both inputs must be single-database questions
// whose gold SQL evaluates to a single numeric scalar on the given catalog.
EvalQuestion compose_double_db(const EvalQuestion& q1, const EvalQuestion& q2,
                               const Catalog& catalog);

// Exact-match retrieval accuracy per question type. Double-database matching
// is injective: each gold needs its own retrieved match unless the golds are
// themselves equal.
int sql_accuracy(const EvalQuestion& q, const std::vector<SqlResult>& retrieved,
                 const std::vector<SqlResult>& golds);

int answer_accuracy(const EvalQuestion& q, const PipelineResponse& response,
                    const std::vector<SqlResult>& golds, CompletionProvider& judge);

struct SelectionDecision {
    std::string question_id;
    std::string db_id;
    bool flag = false;  // selected (decisions) or relevant (gold)
};

struct SelectionMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Zero denominators yield 0 by convention.
SelectionMetrics selection_metrics(const std::vector<SelectionDecision>& decisions,
                                   const std::vector<SelectionDecision>& gold);

struct TypeReport {
    size_t count = 0;
    std::optional<double> sql_accuracy;  // absent for zero_db
    std::optional<double> answer_accuracy;
};

struct QuestionVerdict {
    std::string id;
    QuestionType qtype = QuestionType::ZeroDb;
    std::optional<int> sql_acc;
    std::optional<int> answer_acc;
    std::string note;
};

struct EvalReport {
    size_t total = 0;
    size_t evaluated = 0;  // unanswerable questions excluded
    std::map<QuestionType, TypeReport> types;
    SelectionMetrics selection;
    std::vector<QuestionVerdict> verdicts;

    nlohmann::ordered_json to_json() const;
    std::string to_table() const;  // fixed-width, question type x {SQL Acc, Answer Acc}
};

struct EvalOptions {
    int parallelism = 1;
    std::optional<std::string> report_dir;  // writes report.json and report.txt
};

EvalReport run_eval(const std::vector<EvalQuestion>& dataset, const Pipeline& pipeline,
                    CompletionProvider& judge, const EvalOptions& options = {});

}  // namespace relmem
