#pragma once

#include <map>
#include <optional>
#include <string>

#include "relmem/pipeline.hpp"

namespace relmem {

// Operator configuration. Layered precedence: built-in defaults, then
// environment variables, then the config file, then command-line flags.
struct CliConfig {
    std::string store_dir = "./store";
    std::string completion_provider = "none";  // none | mock:<script> | http:<url>
    std::string embedding_provider = "trigram";  // trigram | http:<url>
    int embedding_dim = 256;
    bool trace = false;
    std::string trace_file = "trace.jsonl";
    PipelineConfig pipeline;
};

// Sections: [store], [providers], [pipeline]. Unknown keys are errors.
CliConfig parse_config_text(const std::string& text, const CliConfig& base);
CliConfig load_config_file(const std::string& path, const CliConfig& base);

// RELMEM_STORE, RELMEM_MOCK_SCRIPT, RELMEM_COMPLETION_URL,
// RELMEM_EMBEDDING_URL, RELMEM_EMBEDDING_DIM seed the defaults.
CliConfig apply_env(const CliConfig& base);

}  // namespace relmem
