#include "relmem/service.hpp"

#include <httplib.h>

#include "relmem/errors.hpp"
#include "relmem/text.hpp"

using ordered_json = nlohmann::ordered_json;

namespace relmem {

struct AnswerService::Impl {
    const Pipeline* pipeline;
    httplib::Server server;
};

nlohmann::ordered_json AnswerService::response_to_json(const PipelineResponse& response,
                                                       bool include_trace) {
    ordered_json doc;
    if (response.kind == ResponseKind::Text) {
        doc["kind"] = "text";
        doc["answer"] = response.answer_text.value_or("");
    } else {
        doc["kind"] = "sql_result";
        ordered_json answer;
        answer["db_id"] = response.answer_result->db_id;
        answer["sql"] = response.answer_result->sql;
        answer["result"] = result_to_json(response.answer_result->result);
        doc["answer"] = std::move(answer);
    }
    if (include_trace) doc["trace"] = trace_to_json(response.trace);
    return doc;
}

AnswerService::AnswerService(const Pipeline& pipeline) : impl_(std::make_unique<Impl>()) {
    impl_->pipeline = &pipeline;

    impl_->server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
        ordered_json doc;
        doc["status"] = "ok";
        doc["databases"] = impl_->pipeline->catalog().size();
        res.set_content(doc.dump(), "application/json");
    });

    impl_->server.Post("/v1/answer", [this](const httplib::Request& req, httplib::Response& res) {
        std::string question;
        bool want_trace = false;
        try {
            auto body = nlohmann::json::parse(req.body);
            question = body.value("question", "");
            want_trace = body.value("trace", false);
        } catch (const nlohmann::json::exception& e) {
            ordered_json err;
            err["error"] = {{"code", "parse_error"}, {"message", e.what()}};
            res.status = 400;
            res.set_content(err.dump(), "application/json");
            return;
        }
        if (trim(question).empty()) {
            ordered_json err;
            err["error"] = {{"code", "empty_input"}, {"message", "question must be non-empty"}};
            res.status = 400;
            res.set_content(err.dump(), "application/json");
            return;
        }

        AnswerOutcome outcome = impl_->pipeline->answer(question);
        if (outcome.ok()) {
            res.set_content(response_to_json(*outcome.response, want_trace).dump(),
                            "application/json");
            return;
        }
        ordered_json err;
        err["error"] = {{"code", std::string(error_code_name(outcome.failure->code))},
                        {"message", outcome.failure->message}};
        if (want_trace) err["trace"] = trace_to_json(outcome.failure->trace);
        res.status = 502;
        res.set_content(err.dump(), "application/json");
    });
}

AnswerService::~AnswerService() { stop(); }

bool AnswerService::listen(const std::string& host, int port) {
    return impl_->server.listen(host, port);
}

int AnswerService::bind_any_port(const std::string& host) {
    return impl_->server.bind_to_any_port(host);
}

bool AnswerService::listen_after_bind() { return impl_->server.listen_after_bind(); }

void AnswerService::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace relmem
