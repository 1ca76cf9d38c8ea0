#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rsmkit {

// Closed set of failure codes. The names are part of the public surface:
// they appear verbatim in CLI error JSON and HTTP ApiError bodies.
enum class ErrorCode {
    InvalidArgument,
    InvalidFactor,
    DimensionOutOfRange,
    DimensionMismatch,
    InvalidAlpha,
    EmptyDesign,
    UnsupportedDesign,
    NonFiniteInput,
    LengthMismatch,
    NonFiniteResponse,
    RankDeficient,
    InvalidDf,
    ZeroDfResidual,
    NoFirstOrderTerms,
    NoQuadraticTerms,
    ZeroGradient,
    InvalidRange,
    UnknownPhase,
    UnknownRun,
    DuplicateRun,
    MalformedNumber,
    ResponseOutOfRange,
    PhaseIncomplete,
    PhaseImmutable,
    NoModel,
    NotFound,
    SchemaVersionUnsupported,
    CorruptDocument,
    IoError,
    Internal,
    UsageError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Broad classification used to pick CLI exit codes and HTTP statuses.
enum class ErrorCategory { Usage, Validation, NotFound, Conflict, Numeric, Io };

ErrorCategory category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::vector<std::string> detail = {});

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    // Structured payload, e.g. the inestimable term names for RankDeficient.
    [[nodiscard]] const std::vector<std::string>& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::vector<std::string> detail_;
};

}  // namespace rsmkit
