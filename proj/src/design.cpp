#include "rsmkit/design.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "rsmkit/error.hpp"
#include "rsmkit/format.hpp"

namespace rsmkit {

namespace {

constexpr int kMinFactors = 2;
constexpr int kMaxFactors = 8;

std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
    // Rejection sampling: drop the biased low slice of the 2^64 range.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = gen();
        if (r >= threshold) return r % n;
    }
}

template <class T>
void shuffle(std::vector<T>& items, std::mt19937_64& gen) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = bounded(gen, i);
        std::swap(items[i - 1], items[j]);
    }
}

std::vector<std::vector<double>> yates_corners(std::size_t k) {
    const std::size_t n = std::size_t{1} << k;
    std::vector<std::vector<double>> out(n, std::vector<double>(k));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < k; ++c) out[r][c] = ((r >> c) & 1U) ? 1.0 : -1.0;
    return out;
}

void check_factor_count(std::size_t k, int lo, int hi, std::string_view what) {
    if (k < static_cast<std::size_t>(lo) || k > static_cast<std::size_t>(hi)) {
        throw Error(ErrorCode::DimensionOutOfRange,
                    std::string(what) + " needs between " + std::to_string(lo) + " and " +
                        std::to_string(hi) + " factors, got " + std::to_string(k));
    }
}

std::vector<FactorSpec> generic_factors(int k) {
    std::vector<FactorSpec> f;
    for (int i = 1; i <= k; ++i) f.push_back({"x" + std::to_string(i), -1.0, 1.0, ""});
    return f;
}

// Assigns std_order sequentially and a seeded run_order within each block,
// blocks executed in label order.
void finalize_orders(Design& d) {
    for (std::size_t i = 0; i < d.points.size(); ++i) d.points[i].std_order = static_cast<int>(i) + 1;
    std::mt19937_64 gen(d.seed);
    int next_run = 1;
    for (int b = 1; b <= d.n_blocks; ++b) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < d.points.size(); ++i)
            if (d.points[i].block == b) members.push_back(i);
        shuffle(members, gen);
        for (std::size_t idx : members) d.points[idx].run_order = next_run++;
    }
}

void push_center(Design& d, int block) {
    d.points.push_back({std::vector<double>(d.k(), 0.0), PointType::Center, block, 0, 0});
}

void push_corners(Design& d, int block) {
    for (auto& c : yates_corners(d.k())) d.points.push_back({std::move(c), PointType::Factorial, block, 0, 0});
}

void push_axial(Design& d, double alpha, int block) {
    for (std::size_t i = 0; i < d.k(); ++i) {
        for (double sign : {-1.0, 1.0}) {
            std::vector<double> x(d.k(), 0.0);
            x[i] = sign * alpha;
            d.points.push_back({std::move(x), PointType::Axial, block, 0, 0});
        }
    }
}

}  // namespace

void validate_factors(std::span<const FactorSpec> factors) {
    std::set<std::string> names;
    for (const auto& f : factors) {
        if (f.name.empty()) throw Error(ErrorCode::InvalidFactor, "factor name must be nonempty");
        if (!names.insert(f.name).second)
            throw Error(ErrorCode::InvalidFactor, "duplicate factor name '" + f.name + "'");
        if (!std::isfinite(f.low) || !std::isfinite(f.high) || !(f.low < f.high))
            throw Error(ErrorCode::InvalidFactor, "factor '" + f.name + "' needs finite low < high");
    }
}

std::string_view to_string(PointType t) noexcept {
    switch (t) {
        case PointType::Factorial: return "factorial";
        case PointType::Center: return "center";
        case PointType::Axial: return "axial";
    }
    return "factorial";
}

PointType parse_point_type(std::string_view s) {
    if (s == "factorial") return PointType::Factorial;
    if (s == "center") return PointType::Center;
    if (s == "axial") return PointType::Axial;
    throw Error(ErrorCode::InvalidArgument, "unknown point type '" + std::string(s) + "'");
}

AlphaRule AlphaRule::parse(std::string_view text) {
    if (text == "rotatable") return rotatable();
    if (text == "face") return face();
    if (text == "none") return none();
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || text.empty())
        throw Error(ErrorCode::InvalidAlpha, "alpha must be rotatable, face, none or a number: '" +
                                                 std::string(text) + "'");
    return explicit_value(v);
}

std::string AlphaRule::to_string() const {
    switch (kind) {
        case Kind::Rotatable: return "rotatable";
        case Kind::Face: return "face";
        case Kind::None: return "none";
        case Kind::Explicit: return format_double(value);
    }
    return "none";
}

Design full_factorial(int k) {
    check_factor_count(static_cast<std::size_t>(std::max(k, 0)), kMinFactors, kMaxFactors, "full factorial");
    const auto factors = generic_factors(k);
    return full_factorial(factors);
}

Design full_factorial(std::span<const FactorSpec> factors) {
    check_factor_count(factors.size(), kMinFactors, kMaxFactors, "full factorial");
    validate_factors(factors);
    Design d;
    d.factors.assign(factors.begin(), factors.end());
    push_corners(d, 1);
    for (std::size_t i = 0; i < d.points.size(); ++i) {
        d.points[i].std_order = static_cast<int>(i) + 1;
        d.points[i].run_order = d.points[i].std_order;
    }
    return d;
}

void require_full_factorial(int fraction_denominator) {
    if (fraction_denominator != 1)
        throw Error(ErrorCode::UnsupportedDesign,
                    "fractional factorial cores (1/" + std::to_string(fraction_denominator) +
                        ") are not supported; use a full factorial");
}

Design ccd(std::span<const FactorSpec> factors, AlphaRule alpha_rule, int n_center, int replicates,
           int n_blocks, std::uint64_t seed) {
    check_factor_count(factors.size(), kMinFactors, kMaxFactors, "central composite design");
    validate_factors(factors);
    if (n_center < 0) throw Error(ErrorCode::InvalidArgument, "center point count must be >= 0");
    if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1");
    if (n_blocks != 1 && n_blocks != 2) throw Error(ErrorCode::InvalidArgument, "blocks must be 1 or 2");

    Design d;
    d.factors.assign(factors.begin(), factors.end());
    d.n_center_per_block = n_center;
    d.replicates = replicates;
    d.n_blocks = n_blocks;
    d.seed = seed;

    // Rotatable alpha uses the whole replicated factorial core: alpha^4 = F.
    const double corners = replicates * std::ldexp(1.0, static_cast<int>(d.k()));
    switch (alpha_rule.kind) {
        case AlphaRule::Kind::Rotatable: d.alpha = std::pow(corners, 0.25); break;
        case AlphaRule::Kind::Face: d.alpha = 1.0; break;
        case AlphaRule::Kind::Explicit:
            if (!std::isfinite(alpha_rule.value) || alpha_rule.value <= 0.0)
                throw Error(ErrorCode::InvalidAlpha, "explicit alpha must be a positive number");
            d.alpha = alpha_rule.value;
            break;
        case AlphaRule::Kind::None: break;
    }

    if (d.alpha) {
        for (int r = 0; r < replicates; ++r) push_corners(d, 1);
        if (n_blocks == 1) {
            push_axial(d, *d.alpha, 1);
            for (int c = 0; c < n_center; ++c) push_center(d, 1);
        } else {
            for (int c = 0; c < n_center; ++c) push_center(d, 1);
            push_axial(d, *d.alpha, 2);
            for (int c = 0; c < n_center; ++c) push_center(d, 2);
        }
    } else if (n_blocks == 1) {
        for (int r = 0; r < replicates; ++r) push_corners(d, 1);
        for (int c = 0; c < n_center; ++c) push_center(d, 1);
    } else {
        if (replicates % 2 != 0)
            throw Error(ErrorCode::UnsupportedDesign,
                        "two blocks without axial points need an even replicate count");
        for (int b = 1; b <= 2; ++b) {
            for (int r = 0; r < replicates / 2; ++r) push_corners(d, b);
            for (int c = 0; c < n_center; ++c) push_center(d, b);
        }
    }

    if (d.points.size() < d.k() + 1)
        throw Error(ErrorCode::EmptyDesign, "design would have fewer than k+1 runs");
    finalize_orders(d);
    return d;
}

Design box_behnken(std::span<const FactorSpec> factors, int n_center, std::uint64_t seed) {
    check_factor_count(factors.size(), 3, 5, "Box-Behnken design");
    validate_factors(factors);
    if (n_center < 0) throw Error(ErrorCode::InvalidArgument, "center point count must be >= 0");

    Design d;
    d.factors.assign(factors.begin(), factors.end());
    d.n_center_per_block = n_center;
    d.seed = seed;
    const std::size_t k = d.k();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            for (const auto& pair : yates_corners(2)) {
                std::vector<double> x(k, 0.0);
                x[i] = pair[0];
                x[j] = pair[1];
                d.points.push_back({std::move(x), PointType::Factorial, 1, 0, 0});
            }
        }
    }
    for (int c = 0; c < n_center; ++c) push_center(d, 1);
    finalize_orders(d);
    return d;
}

double to_coded(const FactorSpec& factor, double natural) {
    if (!std::isfinite(natural))
        throw Error(ErrorCode::NonFiniteInput, "non-finite value for factor '" + factor.name + "'");
    return (natural - factor.center()) / factor.half_range();
}

double to_natural(const FactorSpec& factor, double coded) {
    if (!std::isfinite(coded))
        throw Error(ErrorCode::NonFiniteInput, "non-finite coded value for factor '" + factor.name + "'");
    if (coded == -1.0) return factor.low;
    if (coded == 1.0) return factor.high;
    return factor.center() + coded * factor.half_range();
}

std::vector<double> to_coded(std::span<const FactorSpec> factors, std::span<const double> natural) {
    if (natural.size() != factors.size())
        throw Error(ErrorCode::DimensionMismatch, "point has " + std::to_string(natural.size()) +
                                                      " values for " + std::to_string(factors.size()) +
                                                      " factors");
    std::vector<double> out(factors.size());
    for (std::size_t i = 0; i < factors.size(); ++i) out[i] = to_coded(factors[i], natural[i]);
    return out;
}

std::vector<double> to_natural(std::span<const FactorSpec> factors, std::span<const double> coded) {
    if (coded.size() != factors.size())
        throw Error(ErrorCode::DimensionMismatch, "point has " + std::to_string(coded.size()) +
                                                      " values for " + std::to_string(factors.size()) +
                                                      " factors");
    std::vector<double> out(factors.size());
    for (std::size_t i = 0; i < factors.size(); ++i) out[i] = to_natural(factors[i], coded[i]);
    return out;
}

std::vector<std::vector<double>> to_natural(const Design& design) {
    std::vector<std::vector<double>> out;
    out.reserve(design.points.size());
    for (const auto& p : design.points) out.push_back(to_natural(design.factors, p.coded));
    return out;
}

std::vector<std::string> design_warnings(const Design& design) {
    std::vector<std::string> warnings;
    bool replicated = false;
    for (std::size_t i = 0; i < design.points.size() && !replicated; ++i)
        for (std::size_t j = i + 1; j < design.points.size(); ++j)
            if (design.points[i].block == design.points[j].block &&
                design.points[i].coded == design.points[j].coded) {
                replicated = true;
                break;
            }
    if (!replicated)
        warnings.emplace_back("no replicated settings: pure error and lack of fit cannot be estimated");
    const bool has_center = std::any_of(design.points.begin(), design.points.end(),
                                        [](const DesignPoint& p) { return p.point_type == PointType::Center; });
    if (!has_center && !design.alpha)
        warnings.emplace_back("no center points: curvature cannot be detected");
    return warnings;
}

std::vector<int> seeded_permutation(int n, std::uint64_t seed) {
    std::vector<int> out(static_cast<std::size_t>(std::max(n, 0)));
    std::iota(out.begin(), out.end(), 1);
    std::mt19937_64 gen(seed);
    shuffle(out, gen);
    return out;
}

}  // namespace rsmkit
