#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relmem {

enum class ErrorCode {
    UnreadableDatabase,
    DuplicateId,
    EmptyInput,
    ProviderUnavailable,
    DimensionMismatch,
    CorruptIndex,
    CorruptManifest,
    InsufficientCatalog,
    UnknownColumn,
    AmbiguousColumn,
    ParseError,
    PromptTooLarge,
    NoSqlInResponse,
    MalformedResponse,
    UnmatchedPrompt,
    NonScalarGold,
    CoverageMismatch,
    ConfigError,
    UsageError,
    IoError,
    Internal,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for all typed failures; `code()` carries the
// machine-readable identity used by the CLI and the HTTP service.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return error_code_name(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace relmem
