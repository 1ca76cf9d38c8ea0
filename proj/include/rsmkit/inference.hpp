#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsmkit/design.hpp"
#include "rsmkit/distributions.hpp"
#include "rsmkit/fit.hpp"

namespace rsmkit {

enum class AnovaSource { Block, FirstOrder, Interaction, PureQuadratic, Residual, LackOfFit, PureError };

std::string_view to_string(AnovaSource s) noexcept;
AnovaSource parse_anova_source(std::string_view s);

struct AnovaRow {
    AnovaSource source = AnovaSource::Residual;
    double ss = 0.0;
    int df = 0;
    double ms = 0.0;
    std::optional<double> f_stat;
    std::optional<double> p_value;

    bool operator==(const AnovaRow&) const = default;
};

// Sequential (type I) decomposition: Block, FirstOrder, Interaction,
// PureQuadratic, Residual, then LackOfFit/PureError when replicates exist.
struct AnovaTable {
    std::vector<AnovaRow> rows;
    double ss_total = 0.0;
    int df_total = 0;
    bool lack_of_fit_available = false;

    [[nodiscard]] const AnovaRow* find(AnovaSource s) const noexcept;

    bool operator==(const AnovaTable&) const = default;
};

// Replicate groups: runs with identical coded settings (within 1e-12) inside
// the same block. Returned as lists of run indices, singletons included.
std::vector<std::vector<std::size_t>> replicate_groups(const Design& design);

AnovaTable anova(const Design& design, std::span<const double> responses, const TermBasis& basis);

struct CoefficientTest {
    std::string term;
    double estimate = 0.0;
    double std_error = 0.0;
    std::optional<double> t_stat;  // absent for a nonzero estimate under a perfect fit
    double p_value = 1.0;

    bool operator==(const CoefficientTest&) const = default;
};

// Two-sided t tests. A perfect fit (residual RMS within kPerfectFitTolerance
// of the response RMS) reports p = 0 for nonzero estimates and p = 1 for
// zeros, relative to the same tolerance.
std::vector<CoefficientTest> coefficient_tests(const FittedModel& model);

inline constexpr double kDefaultSignificance = 0.05;
inline constexpr double kPerfectFitTolerance = 1e-12;

}  // namespace rsmkit
