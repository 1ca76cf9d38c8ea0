#include "rsmkit/error.hpp"

namespace rsmkit {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidFactor: return "InvalidFactor";
        case ErrorCode::DimensionOutOfRange: return "DimensionOutOfRange";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidAlpha: return "InvalidAlpha";
        case ErrorCode::EmptyDesign: return "EmptyDesign";
        case ErrorCode::UnsupportedDesign: return "UnsupportedDesign";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NonFiniteResponse: return "NonFiniteResponse";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::InvalidDf: return "InvalidDf";
        case ErrorCode::ZeroDfResidual: return "ZeroDfResidual";
        case ErrorCode::NoFirstOrderTerms: return "NoFirstOrderTerms";
        case ErrorCode::NoQuadraticTerms: return "NoQuadraticTerms";
        case ErrorCode::ZeroGradient: return "ZeroGradient";
        case ErrorCode::InvalidRange: return "InvalidRange";
        case ErrorCode::UnknownPhase: return "UnknownPhase";
        case ErrorCode::UnknownRun: return "UnknownRun";
        case ErrorCode::DuplicateRun: return "DuplicateRun";
        case ErrorCode::MalformedNumber: return "MalformedNumber";
        case ErrorCode::ResponseOutOfRange: return "ResponseOutOfRange";
        case ErrorCode::PhaseIncomplete: return "PhaseIncomplete";
        case ErrorCode::PhaseImmutable: return "PhaseImmutable";
        case ErrorCode::NoModel: return "NoModel";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::SchemaVersionUnsupported: return "SchemaVersionUnsupported";
        case ErrorCode::CorruptDocument: return "CorruptDocument";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::Internal: return "Internal";
        case ErrorCode::UsageError: return "UsageError";
    }
    return "Internal";
}

ErrorCategory category(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::RankDeficient:
        case ErrorCode::InvalidDf:
        case ErrorCode::ZeroDfResidual:
        case ErrorCode::ZeroGradient:
        case ErrorCode::NoFirstOrderTerms:
        case ErrorCode::NoQuadraticTerms:
        case ErrorCode::PhaseIncomplete:
        case ErrorCode::NoModel:
            return ErrorCategory::Numeric;
        case ErrorCode::UsageError:
            return ErrorCategory::Usage;
        case ErrorCode::UnknownPhase:
        case ErrorCode::NotFound:
            return ErrorCategory::NotFound;
        case ErrorCode::PhaseImmutable:
            return ErrorCategory::Conflict;
        case ErrorCode::SchemaVersionUnsupported:
        case ErrorCode::CorruptDocument:
        case ErrorCode::IoError:
        case ErrorCode::Internal:
            return ErrorCategory::Io;
        default:
            return ErrorCategory::Validation;
    }
}

Error::Error(ErrorCode code, std::string message, std::vector<std::string> detail)
    : std::runtime_error(std::move(message)), code_(code), detail_(std::move(detail)) {}

}  // namespace rsmkit
