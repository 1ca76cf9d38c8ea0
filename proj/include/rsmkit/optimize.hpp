#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rsmkit/fit.hpp"
#include "rsmkit/linalg.hpp"

namespace rsmkit {

enum class Goal { Minimize, Maximize };

std::string_view to_string(Goal g) noexcept;
Goal parse_goal(std::string_view s);  // "min" | "max" | "minimize" | "maximize"

// ŷ = b0 + bᵀx + xᵀBx over the factor coordinates; the block term is
// dropped since it is not a direction of movement.
struct QuadraticForm {
    double intercept = 0.0;
    std::vector<double> linear;  // b
    Matrix quadratic;            // B, symmetric; off-diagonals are half the interaction coefficients

    static QuadraticForm from_model(const FittedModel& model);
    [[nodiscard]] double value(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> gradient(std::span<const double> x) const;
};

struct PathStep {
    double radius = 0.0;
    std::vector<double> coded;
    double predicted = 0.0;
    bool extrapolated = false;

    bool operator==(const PathStep&) const = default;
};

struct DescentPath {
    Goal goal = Goal::Minimize;
    std::vector<double> origin;
    std::vector<PathStep> steps;

    bool operator==(const DescentPath&) const = default;
};

struct PathOptions {
    std::optional<std::vector<double>> origin;  // default: design center
    // Steps farther than this from the design center are flagged extrapolated.
    double region_radius = 1.0;
};

// First-order models move along ∓b/‖b‖; models with interaction or quadratic
// terms take the constrained optimum on each sphere ‖x − origin‖ = r
// (ridge analysis).
DescentPath steepest_path(const FittedModel& model, Goal goal, std::span<const double> radii,
                          const PathOptions& options = {});

// Ridge step for an explicit quadratic: best value of q on the sphere of
// the given radius around `origin`.
std::vector<double> ridge_point(const QuadraticForm& q, Goal goal, std::span<const double> origin, double radius);

enum class Nature { Minimum, Maximum, Saddle, Degenerate };

std::string_view to_string(Nature n) noexcept;
Nature parse_nature(std::string_view s);

struct StationaryPoint {
    std::optional<std::vector<double>> coded;  // absent when B is singular
    std::optional<double> predicted;
    std::vector<double> eigenvalues;  // ascending
    Matrix eigenvectors;              // orthonormal columns
    Nature nature = Nature::Degenerate;

    bool operator==(const StationaryPoint&) const = default;
};

Nature classify(std::span<const double> eigenvalues);

// Canonical analysis of the fitted quadratic. Needs pure-quadratic terms
// (NoQuadraticTerms otherwise); missing interactions count as zero.
StationaryPoint stationary_point(const FittedModel& model);
StationaryPoint stationary_point(const QuadraticForm& q);

}  // namespace rsmkit
