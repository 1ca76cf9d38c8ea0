#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rsmkit/error.hpp"

namespace rsmkit {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitIo = 5;

// Missing-state errors (PhaseIncomplete, NoModel) count as data errors.
int exit_code(ErrorCode code) noexcept;

// Runs one command. `args` excludes the program name; `env_project` is the
// RSMKIT_PROJECT fallback for --project.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::optional<std::string>& env_project = std::nullopt);

}  // namespace rsmkit
