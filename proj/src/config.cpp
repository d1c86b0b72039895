#include "relmem/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "relmem/errors.hpp"
#include "relmem/text.hpp"

namespace relmem {

namespace {

long parse_long(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        long out = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing garbage");
        return out;
    } catch (const std::exception&) {
        raise(ErrorCode::ConfigError, key + ": expected an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        double out = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing garbage");
        return out;
    } catch (const std::exception&) {
        raise(ErrorCode::ConfigError, key + ": expected a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (iequals(value, "true") || value == "1" || iequals(value, "yes")) return true;
    if (iequals(value, "false") || value == "0" || iequals(value, "no")) return false;
    raise(ErrorCode::ConfigError, key + ": expected a boolean, got '" + value + "'");
}

}  // namespace

CliConfig parse_config_text(const std::string& text, const CliConfig& base) {
    CliConfig config = base;
    std::istringstream in(text);
    std::string raw_line;
    std::string section;
    size_t lineno = 0;
    while (std::getline(in, raw_line)) {
        ++lineno;
        std::string line(trim(raw_line));
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                raise(ErrorCode::ConfigError,
                      "line " + std::to_string(lineno) + ": malformed section header");
            section = to_lower(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            raise(ErrorCode::ConfigError,
                  "line " + std::to_string(lineno) + ": expected key = value");
        std::string key = to_lower(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        std::string qualified = section.empty() ? key : section + "." + key;

        if (qualified == "store.dir") config.store_dir = value;
        else if (qualified == "providers.completion") config.completion_provider = value;
        else if (qualified == "providers.embedding") config.embedding_provider = value;
        else if (qualified == "providers.embedding_dim")
            config.embedding_dim = int(parse_long(value, qualified));
        else if (qualified == "pipeline.k_databases")
            config.pipeline.k_databases = size_t(parse_long(value, qualified));
        else if (qualified == "pipeline.k_values")
            config.pipeline.k_values = size_t(parse_long(value, qualified));
        else if (qualified == "pipeline.max_correction_attempts")
            config.pipeline.max_correction_attempts = int(parse_long(value, qualified));
        else if (qualified == "pipeline.result_truncation_rows")
            config.pipeline.result_truncation_rows = size_t(parse_long(value, qualified));
        else if (qualified == "pipeline.execution_timeout_secs")
            config.pipeline.execution_timeout_secs = parse_double(value, qualified);
        else if (qualified == "pipeline.max_values_per_column")
            config.pipeline.max_values_per_column = size_t(parse_long(value, qualified));
        else if (qualified == "pipeline.trace") config.trace = parse_bool(value, qualified);
        else
            raise(ErrorCode::ConfigError,
                  "line " + std::to_string(lineno) + ": unknown key " + qualified);
    }

    if (config.pipeline.k_databases == 0 || config.pipeline.k_values == 0 ||
        config.pipeline.result_truncation_rows == 0 ||
        config.pipeline.max_correction_attempts < 0 ||
        config.pipeline.execution_timeout_secs <= 0 || config.embedding_dim <= 0)
        raise(ErrorCode::ConfigError, "configuration value out of range");
    return config;
}

CliConfig load_config_file(const std::string& path, const CliConfig& base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::ConfigError, "cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), base);
}

CliConfig apply_env(const CliConfig& base) {
    CliConfig config = base;
    if (const char* v = std::getenv("RELMEM_STORE")) config.store_dir = v;
    if (const char* v = std::getenv("RELMEM_MOCK_SCRIPT"))
        config.completion_provider = std::string("mock:") + v;
    if (const char* v = std::getenv("RELMEM_COMPLETION_URL"))
        config.completion_provider = std::string("http:") + v;
    if (const char* v = std::getenv("RELMEM_EMBEDDING_URL"))
        config.embedding_provider = std::string("http:") + v;
    if (const char* v = std::getenv("RELMEM_EMBEDDING_DIM"))
        config.embedding_dim = int(parse_long(v, "RELMEM_EMBEDDING_DIM"));
    return config;
}

}  // namespace relmem
