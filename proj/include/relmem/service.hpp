#pragma once

#include <memory>
#include <string>

#include "relmem/pipeline.hpp"

namespace relmem {

// JSON-over-HTTP front end:
//   POST /v1/answer  {"question":"...","trace":bool}
//     -> {"kind":"text"|"sql_result","answer":...,"trace":[...]}
//   GET  /v1/health  -> {"status":"ok","databases":<count>}
class AnswerService {
public:
    explicit AnswerService(const Pipeline& pipeline);
    ~AnswerService();

    // Blocks until stop() is called from another thread.
    bool listen(const std::string& host, int port);
    // Binds an ephemeral port and returns it; serve with listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();

    static nlohmann::ordered_json response_to_json(const PipelineResponse& response,
                                                   bool include_trace);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace relmem
