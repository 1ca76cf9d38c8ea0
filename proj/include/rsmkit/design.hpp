#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rsmkit {

// A controllable input with its natural-unit bounds. Coded value -1 maps to
// `low`, +1 to `high`, 0 to the midpoint.
struct FactorSpec {
    std::string name;
    double low = -1.0;
    double high = 1.0;
    std::string unit;

    [[nodiscard]] double center() const noexcept { return 0.5 * (high + low); }
    [[nodiscard]] double half_range() const noexcept { return 0.5 * (high - low); }

    bool operator==(const FactorSpec&) const = default;
};

// Throws InvalidFactor on empty/duplicate names or low >= high.
void validate_factors(std::span<const FactorSpec> factors);

enum class PointType { Factorial, Center, Axial };

std::string_view to_string(PointType t) noexcept;
PointType parse_point_type(std::string_view s);

struct DesignPoint {
    std::vector<double> coded;
    PointType point_type = PointType::Factorial;
    int block = 1;
    int std_order = 1;
    int run_order = 1;

    bool operator==(const DesignPoint&) const = default;
};

struct Design {
    std::vector<FactorSpec> factors;
    std::vector<DesignPoint> points;  // in std_order
    std::optional<double> alpha;
    int n_center_per_block = 0;
    int replicates = 1;
    int n_blocks = 1;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t k() const noexcept { return factors.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }

    bool operator==(const Design&) const = default;
};

struct AlphaRule {
    enum class Kind { Rotatable, Face, None, Explicit };
    Kind kind = Kind::Rotatable;
    double value = 0.0;  // used by Explicit only

    static AlphaRule rotatable() { return {Kind::Rotatable, 0.0}; }
    static AlphaRule face() { return {Kind::Face, 0.0}; }
    static AlphaRule none() { return {Kind::None, 0.0}; }
    static AlphaRule explicit_value(double a) { return {Kind::Explicit, a}; }

    // "rotatable" | "face" | "none" | decimal number
    static AlphaRule parse(std::string_view text);
    [[nodiscard]] std::string to_string() const;

    bool operator==(const AlphaRule&) const = default;
};

// 2^k corners in Yates order (first factor alternates fastest), generic
// factors x1..xk on [-1, 1], one block, run_order == std_order.
Design full_factorial(int k);
Design full_factorial(std::span<const FactorSpec> factors);

// Central composite design. Block 1 holds the replicated factorial core and
// its centers; with two blocks and axial points, block 2 holds the axial runs
// and their centers. Without axial points, two blocks split the replicated
// factorial+center sets evenly (replicates must be even).
Design ccd(std::span<const FactorSpec> factors, AlphaRule alpha_rule, int n_center, int replicates,
           int n_blocks, std::uint64_t seed);

// Box-Behnken design for 3 <= k <= 5.
Design box_behnken(std::span<const FactorSpec> factors, int n_center, std::uint64_t seed);

// Rejects fractional cores; `fraction_denominator` == 1 means a full factorial.
void require_full_factorial(int fraction_denominator);

double to_coded(const FactorSpec& factor, double natural);
double to_natural(const FactorSpec& factor, double coded);
std::vector<double> to_coded(std::span<const FactorSpec> factors, std::span<const double> natural);
std::vector<double> to_natural(std::span<const FactorSpec> factors, std::span<const double> coded);
// One natural-unit row per design point, in std_order.
std::vector<std::vector<double>> to_natural(const Design& design);

// Advisory notes, e.g. no replicated settings means no pure-error estimate.
std::vector<std::string> design_warnings(const Design& design);

// A permutation of 1..n: Fisher-Yates on a 64-bit Mersenne Twister with
// rejection-sampled bounds, so results are identical across standard libraries.
std::vector<int> seeded_permutation(int n, std::uint64_t seed);

}  // namespace rsmkit
