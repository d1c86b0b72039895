#include "relmem/errors.hpp"

namespace relmem {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnreadableDatabase: return "unreadable_database";
        case ErrorCode::DuplicateId: return "duplicate_id";
        case ErrorCode::EmptyInput: return "empty_input";
        case ErrorCode::ProviderUnavailable: return "provider_unavailable";
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::CorruptIndex: return "corrupt_index";
        case ErrorCode::CorruptManifest: return "corrupt_manifest";
        case ErrorCode::InsufficientCatalog: return "insufficient_catalog";
        case ErrorCode::UnknownColumn: return "unknown_column";
        case ErrorCode::AmbiguousColumn: return "ambiguous_column";
        case ErrorCode::ParseError: return "parse_error";
        case ErrorCode::PromptTooLarge: return "prompt_too_large";
        case ErrorCode::NoSqlInResponse: return "no_sql_in_response";
        case ErrorCode::MalformedResponse: return "malformed_response";
        case ErrorCode::UnmatchedPrompt: return "unmatched_prompt";
        case ErrorCode::NonScalarGold: return "non_scalar_gold";
        case ErrorCode::CoverageMismatch: return "coverage_mismatch";
        case ErrorCode::ConfigError: return "config_error";
        case ErrorCode::UsageError: return "usage_error";
        case ErrorCode::IoError: return "io_error";
        case ErrorCode::Internal: return "internal";
    }
    return "internal";
}

}  // namespace relmem
