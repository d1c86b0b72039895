#include "relmem/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "relmem/errors.hpp"
#include "relmem/text.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace relmem {

std::string_view question_type_name(QuestionType type) {
    switch (type) {
        case QuestionType::ZeroDb: return "zero_db";
        case QuestionType::SingleDb: return "single_db";
        case QuestionType::DoubleDb: return "double_db";
        case QuestionType::Unanswerable: return "unanswerable";
    }
    return "zero_db";
}

QuestionType question_type_from_name(std::string_view name) {
    if (name == "zero_db") return QuestionType::ZeroDb;
    if (name == "single_db") return QuestionType::SingleDb;
    if (name == "double_db") return QuestionType::DoubleDb;
    if (name == "unanswerable") return QuestionType::Unanswerable;
    raise(ErrorCode::ParseError, "unknown question type: " + std::string(name));
}

void validate_question(const EvalQuestion& q) {
    if (q.id.empty() || trim(q.question).empty())
        raise(ErrorCode::ParseError, "question needs id and text");
    if (q.gold_db_ids.size() != q.gold_sqls.size())
        raise(ErrorCode::ParseError, q.id + ": gold_db_ids and gold_sqls must align");
    switch (q.qtype) {
        case QuestionType::ZeroDb:
            if (!q.gold_db_ids.empty() || !q.gold_answer)
                raise(ErrorCode::ParseError, q.id + ": zero_db needs a gold answer and no SQL");
            break;
        case QuestionType::SingleDb:
            if (q.gold_sqls.size() != 1)
                raise(ErrorCode::ParseError, q.id + ": single_db needs exactly one gold SQL");
            break;
        case QuestionType::DoubleDb:
            if (q.gold_sqls.size() != 2)
                raise(ErrorCode::ParseError, q.id + ": double_db needs exactly two gold SQLs");
            break;
        case QuestionType::Unanswerable:
            if (!q.gold_db_ids.empty() || q.gold_answer)
                raise(ErrorCode::ParseError,
                      q.id + ": unanswerable questions carry no gold data");
            break;
    }
}

std::vector<EvalQuestion> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot read dataset: " + path);
    std::vector<EvalQuestion> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::ParseError,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        EvalQuestion q;
        q.id = doc.value("id", "");
        q.qtype = question_type_from_name(doc.value("qtype", ""));
        q.question = doc.value("question", "");
        for (const auto& v : doc.value("gold_db_ids", nlohmann::json::array()))
            q.gold_db_ids.push_back(v.get<std::string>());
        for (const auto& v : doc.value("gold_sqls", nlohmann::json::array()))
            q.gold_sqls.push_back(v.get<std::string>());
        if (doc.contains("gold_answer") && !doc["gold_answer"].is_null())
            q.gold_answer = doc["gold_answer"].get<std::string>();
        validate_question(q);
        out.push_back(std::move(q));
    }
    return out;
}

std::string dataset_to_jsonl(const std::vector<EvalQuestion>& questions) {
    std::ostringstream out;
    for (const auto& q : questions) {
        ordered_json doc;
        doc["id"] = q.id;
        doc["qtype"] = std::string(question_type_name(q.qtype));
        doc["question"] = q.question;
        doc["gold_db_ids"] = q.gold_db_ids;
        doc["gold_sqls"] = q.gold_sqls;
        if (q.gold_answer) doc["gold_answer"] = *q.gold_answer;
        out << doc.dump() << "\n";
    }
    return out.str();
}

namespace {

double scalar_of(const EvalQuestion& q, const Catalog& catalog) {
    const DatabaseEntry* entry = catalog.find(q.gold_db_ids.at(0));
    if (!entry) raise(ErrorCode::ConfigError, q.id + ": gold database not registered");
    auto outcome = execute_sql(*entry, q.gold_sqls.at(0));
    if (!outcome.ok())
        raise(ErrorCode::NonScalarGold, q.id + ": gold SQL failed: " + outcome.error().message);
    const SqlResult& r = outcome.result();
    if (r.columns.size() != 1 || r.rows.size() != 1)
        raise(ErrorCode::NonScalarGold, q.id + ": gold SQL does not return a single value");
    const SqlCell& cell = r.rows[0][0];
    if (std::holds_alternative<int64_t>(cell)) return double(std::get<int64_t>(cell));
    if (std::holds_alternative<double>(cell)) return std::get<double>(cell);
    raise(ErrorCode::NonScalarGold, q.id + ": gold SQL returns a non-numeric value");
}

}  // namespace

EvalQuestion compose_double_db(const EvalQuestion& q1, const EvalQuestion& q2,
                               const Catalog& catalog) {
    if (q1.qtype != QuestionType::SingleDb || q2.qtype != QuestionType::SingleDb)
        raise(ErrorCode::UsageError, "composite inputs must be single_db questions");
    double n1 = scalar_of(q1, catalog);
    double n2 = scalar_of(q2, catalog);

    EvalQuestion out;
    out.id = q1.id + "+" + q2.id;
    out.qtype = QuestionType::DoubleDb;
    out.question = "Which question has a larger number as its answer. Q1: " + q1.question +
                   "; Q2: " + q2.question;
    out.gold_db_ids = {q1.gold_db_ids.at(0), q2.gold_db_ids.at(0)};
    out.gold_sqls = {q1.gold_sqls.at(0), q2.gold_sqls.at(0)};
    out.gold_answer = n1 >= n2 ? "Q1" : "Q2";  // ties go to Q1
    return out;
}

int sql_accuracy(const EvalQuestion& q, const std::vector<SqlResult>& retrieved,
                 const std::vector<SqlResult>& golds) {
    auto any_match = [&](const SqlResult& gold, size_t skip = size_t(-1)) -> std::optional<size_t> {
        for (size_t i = 0; i < retrieved.size(); ++i) {
            if (i == skip) continue;
            if (results_equal(retrieved[i], gold)) return i;
        }
        return std::nullopt;
    };

    if (q.qtype == QuestionType::SingleDb) {
        return any_match(golds.at(0)) ? 1 : 0;
    }
    if (q.qtype == QuestionType::DoubleDb) {
        const SqlResult& g1 = golds.at(0);
        const SqlResult& g2 = golds.at(1);
        // Equal golds may share one retrieved match; distinct golds need an
        // injective assignment.
        if (results_equal(g1, g2)) return any_match(g1) ? 1 : 0;
        for (size_t i = 0; i < retrieved.size(); ++i) {
            if (!results_equal(retrieved[i], g1)) continue;
            if (any_match(g2, i)) return 1;
        }
        return 0;
    }
    raise(ErrorCode::UsageError, "sql_accuracy is defined only for single_db/double_db");
}

int answer_accuracy(const EvalQuestion& q, const PipelineResponse& response,
                    const std::vector<SqlResult>& golds, CompletionProvider& judge) {
    switch (q.qtype) {
        case QuestionType::ZeroDb: {
            if (response.kind != ResponseKind::Text || !response.answer_text) return 0;
            if (!q.gold_answer) return 0;
            return judge_equivalence(judge, *q.gold_answer, *response.answer_text) ? 1 : 0;
        }
        case QuestionType::SingleDb: {
            if (response.kind != ResponseKind::SqlResult || !response.answer_result) return 0;
            return results_equal(response.answer_result->result, golds.at(0)) ? 1 : 0;
        }
        case QuestionType::DoubleDb: {
            std::vector<SqlResult> retrieved;
            for (const auto& outcome : response.outcomes)
                if (outcome.ok()) retrieved.push_back(*outcome.result);
            if (sql_accuracy(q, retrieved, golds) != 1) return 0;
            if (!q.gold_answer) return 0;
            // A SqlResult response is judged on its serialized form.
            std::string answer;
            if (response.kind == ResponseKind::Text && response.answer_text)
                answer = *response.answer_text;
            else if (response.answer_result)
                answer = result_to_json(response.answer_result->result).dump();
            else
                return 0;
            return judge_equivalence(judge, *q.gold_answer, answer) ? 1 : 0;
        }
        case QuestionType::Unanswerable: return 0;
    }
    return 0;
}

SelectionMetrics selection_metrics(const std::vector<SelectionDecision>& decisions,
                                   const std::vector<SelectionDecision>& gold) {
    auto key = [](const SelectionDecision& d) { return std::make_pair(d.question_id, d.db_id); };
    auto sorted = [&](std::vector<SelectionDecision> v) {
        std::sort(v.begin(), v.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
        return v;
    };
    auto d = sorted(decisions);
    auto g = sorted(gold);
    if (d.size() != g.size()) raise(ErrorCode::CoverageMismatch, "decision/gold size mismatch");
    for (size_t i = 0; i < d.size(); ++i)
        if (key(d[i]) != key(g[i]))
            raise(ErrorCode::CoverageMismatch,
                  "decisions and gold cover different (question, database) pairs");

    SelectionMetrics m;
    for (size_t i = 0; i < d.size(); ++i) {
        bool selected = d[i].flag;
        bool relevant = g[i].flag;
        if (selected && relevant) ++m.tp;
        else if (selected && !relevant) ++m.fp;
        else if (!selected && relevant) ++m.fn;
        else ++m.tn;
    }
    m.precision = (m.tp + m.fp) ? double(m.tp) / double(m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) ? double(m.tp) / double(m.tp + m.fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

nlohmann::ordered_json EvalReport::to_json() const {
    ordered_json doc;
    doc["total"] = total;
    doc["evaluated"] = evaluated;
    ordered_json jtypes = ordered_json::object();
    for (const auto& [type, report] : types) {
        ordered_json t;
        t["count"] = report.count;
        if (report.sql_accuracy) t["sql_acc"] = *report.sql_accuracy;
        if (report.answer_accuracy) t["answer_acc"] = *report.answer_accuracy;
        jtypes[std::string(question_type_name(type))] = std::move(t);
    }
    doc["types"] = std::move(jtypes);
    ordered_json sel;
    sel["precision"] = selection.precision;
    sel["recall"] = selection.recall;
    sel["f1"] = selection.f1;
    sel["tp"] = selection.tp;
    sel["fp"] = selection.fp;
    sel["fn"] = selection.fn;
    sel["tn"] = selection.tn;
    doc["selection"] = std::move(sel);
    ordered_json jverdicts = ordered_json::array();
    for (const auto& v : verdicts) {
        ordered_json jv;
        jv["id"] = v.id;
        jv["qtype"] = std::string(question_type_name(v.qtype));
        jv["sql_acc"] = v.sql_acc ? ordered_json(*v.sql_acc) : ordered_json(nullptr);
        jv["answer_acc"] = v.answer_acc ? ordered_json(*v.answer_acc) : ordered_json(nullptr);
        if (!v.note.empty()) jv["note"] = v.note;
        jverdicts.push_back(std::move(jv));
    }
    doc["questions"] = std::move(jverdicts);
    return doc;
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    char line[128];
    std::snprintf(line, sizeof(line), "%-14s %6s %8s %11s\n", "question type", "count", "SQL Acc",
                  "Answer Acc");
    out << line;
    auto fmt = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.3f", *v);
        return std::string(buf);
    };
    for (const auto& [type, report] : types) {
        std::snprintf(line, sizeof(line), "%-14s %6zu %8s %11s\n",
                      std::string(question_type_name(type)).c_str(), report.count,
                      fmt(report.sql_accuracy).c_str(), fmt(report.answer_accuracy).c_str());
        out << line;
    }
    std::snprintf(line, sizeof(line),
                  "selection: precision=%.3f recall=%.3f f1=%.3f (tp=%zu fp=%zu fn=%zu tn=%zu)\n",
                  selection.precision, selection.recall, selection.f1, selection.tp, selection.fp,
                  selection.fn, selection.tn);
    out << line;
    return out.str();
}

EvalReport run_eval(const std::vector<EvalQuestion>& dataset, const Pipeline& pipeline,
                    CompletionProvider& judge, const EvalOptions& options) {
    for (const auto& q : dataset) validate_question(q);

    EvalReport report;
    report.total = dataset.size();

    // Gold SQLs execute once, before any pipeline run.
    std::vector<std::vector<SqlResult>> golds(dataset.size());
    std::vector<std::string> gold_errors(dataset.size());
    for (size_t i = 0; i < dataset.size(); ++i) {
        const auto& q = dataset[i];
        for (size_t j = 0; j < q.gold_sqls.size(); ++j) {
            const DatabaseEntry* entry = pipeline.catalog().find(q.gold_db_ids[j]);
            if (!entry) raise(ErrorCode::ConfigError, q.id + ": gold database not registered");
            auto outcome = execute_sql(*entry, q.gold_sqls[j]);
            if (!outcome.ok()) {
                gold_errors[i] = "gold SQL failed: " + outcome.error().message;
                break;
            }
            golds[i].push_back(outcome.result());
        }
    }

    std::vector<std::string> questions;
    questions.reserve(dataset.size());
    for (const auto& q : dataset) questions.push_back(q.question);
    auto runs = pipeline.answer_batch(questions, options.parallelism);

    std::map<QuestionType, std::pair<size_t, size_t>> sql_tallies;     // (hits, count)
    std::map<QuestionType, std::pair<size_t, size_t>> answer_tallies;  // (hits, count)
    std::vector<SelectionDecision> decisions;
    std::vector<SelectionDecision> relevance;

    for (size_t i = 0; i < dataset.size(); ++i) {
        const EvalQuestion& q = dataset[i];
        QuestionVerdict verdict;
        verdict.id = q.id;
        verdict.qtype = q.qtype;

        if (q.qtype == QuestionType::Unanswerable) {
            verdict.note = "excluded: unanswerable";
            report.verdicts.push_back(std::move(verdict));
            continue;
        }
        ++report.evaluated;

        bool needs_sql = q.qtype != QuestionType::ZeroDb;
        const AnswerOutcome& run = runs[i];

        if (!gold_errors[i].empty() || !run.ok()) {
            verdict.note = !gold_errors[i].empty() ? gold_errors[i]
                                                   : "pipeline failure: " + run.failure->message;
            if (needs_sql) {
                verdict.sql_acc = 0;
                sql_tallies[q.qtype].second++;
            }
            verdict.answer_acc = 0;
            answer_tallies[q.qtype].second++;
        } else {
            const PipelineResponse& response = *run.response;
            if (needs_sql) {
                std::vector<SqlResult> retrieved;
                for (const auto& outcome : response.outcomes)
                    if (outcome.ok()) retrieved.push_back(*outcome.result);
                int acc = sql_accuracy(q, retrieved, golds[i]);
                verdict.sql_acc = acc;
                sql_tallies[q.qtype].first += size_t(acc);
                sql_tallies[q.qtype].second++;
            }
            int acc = answer_accuracy(q, response, golds[i], judge);
            verdict.answer_acc = acc;
            answer_tallies[q.qtype].first += size_t(acc);
            answer_tallies[q.qtype].second++;

            // Selection decisions: a database counts as selected when the
            // refined plan targeted it.
            for (const auto& entry : pipeline.catalog().entries()) {
                bool targeted = std::any_of(
                    response.outcomes.begin(), response.outcomes.end(),
                    [&](const RetrievalOutcome& o) { return o.target.db_id == entry.id; });
                bool relevant = std::find(q.gold_db_ids.begin(), q.gold_db_ids.end(), entry.id) !=
                                q.gold_db_ids.end();
                decisions.push_back(SelectionDecision{q.id, entry.id, targeted});
                relevance.push_back(SelectionDecision{q.id, entry.id, relevant});
            }
        }
        report.verdicts.push_back(std::move(verdict));
    }

    for (const auto& [type, tally] : answer_tallies) {
        TypeReport t;
        t.count = tally.second;
        t.answer_accuracy = tally.second ? double(tally.first) / double(tally.second) : 0.0;
        auto sql_it = sql_tallies.find(type);
        if (sql_it != sql_tallies.end() && sql_it->second.second)
            t.sql_accuracy = double(sql_it->second.first) / double(sql_it->second.second);
        report.types[type] = t;
    }
    if (!decisions.empty()) report.selection = selection_metrics(decisions, relevance);

    if (options.report_dir) {
        fs::create_directories(*options.report_dir);
        std::ofstream json_out(fs::path(*options.report_dir) / "report.json",
                               std::ios::binary | std::ios::trunc);
        if (!json_out) raise(ErrorCode::IoError, "cannot write report.json");
        json_out << report.to_json().dump(2) << "\n";
        std::ofstream table_out(fs::path(*options.report_dir) / "report.txt",
                                std::ios::binary | std::ios::trunc);
        if (!table_out) raise(ErrorCode::IoError, "cannot write report.txt");
        table_out << report.to_table();
    }
    return report;
}

}  // namespace relmem
