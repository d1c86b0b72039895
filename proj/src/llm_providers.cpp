#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "relmem/errors.hpp"
#include "relmem/llm.hpp"
#include "relmem/text.hpp"

namespace relmem {

ScriptedMockProvider ScriptedMockProvider::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::ConfigError, "cannot read mock script: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_jsonl(buf.str());
}

ScriptedMockProvider ScriptedMockProvider::from_jsonl(const std::string& jsonl) {
    ScriptedMockProvider provider;
    std::istringstream in(jsonl);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::ConfigError,
                  "mock script line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!doc.contains("match") || !doc.contains("response"))
            raise(ErrorCode::ConfigError,
                  "mock script line " + std::to_string(lineno) + ": needs match and response");
        provider.add_rule(doc["match"].get<std::string>(), doc["response"].get<std::string>(),
                          doc.value("regex", false), doc.value("once", false));
    }
    return provider;
}

void ScriptedMockProvider::add_rule(const std::string& match, const std::string& response,
                                    bool regex, bool once) {
    if (regex) std::regex probe(match);  // validate eagerly
    rules_.push_back(Rule{match, response, regex, once, false});
}

std::string ScriptedMockProvider::complete(const std::string& prompt) {
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& rule : rules_) {
        if (rule.once && rule.used) continue;
        bool hit = rule.regex ? std::regex_search(prompt, std::regex(rule.match))
                              : prompt.find(rule.match) != std::string::npos;
        if (!hit) continue;
        if (rule.once) rule.used = true;
        return rule.response;
    }
    std::string head = prompt.substr(0, 160);
    raise(ErrorCode::UnmatchedPrompt, "no mock rule matches prompt: " + head +
                                          (prompt.size() > 160 ? "..." : ""));
}

HttpCompletionProvider::HttpCompletionProvider(std::string base_url, size_t max_prompt_chars)
    : base_url_(std::move(base_url)),
      name_("http:" + base_url_),
      max_prompt_chars_(max_prompt_chars) {}

std::string HttpCompletionProvider::complete(const std::string& prompt) {
    httplib::Client client(base_url_);
    client.set_read_timeout(120, 0);
    nlohmann::ordered_json body;
    body["prompt"] = prompt;
    auto res = client.Post("/complete", body.dump(), "application/json");
    if (!res || res->status != 200)
        raise(ErrorCode::ProviderUnavailable,
              "completion endpoint " + base_url_ + " returned " +
                  (res ? std::to_string(res->status) : std::string("no response")));
    try {
        auto doc = nlohmann::json::parse(res->body);
        return doc.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ProviderUnavailable,
              "completion endpoint returned malformed JSON: " + std::string(e.what()));
    }
}

}  // namespace relmem
