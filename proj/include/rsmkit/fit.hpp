#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsmkit/design.hpp"
#include "rsmkit/linalg.hpp"

namespace rsmkit {

enum class TermGroup { Intercept, Block, FirstOrder, Interaction, PureQuadratic };

std::string_view to_string(TermGroup g) noexcept;

// Which regressors enter the model. Canonical column order:
//   intercept, block contrast, x1..xk, xi*xj (i<j, lexicographic), x1^2..xk^2
struct TermBasis {
    int k = 2;
    bool include_fo = true;
    bool include_twi = false;
    bool include_pq = false;
    bool include_block = false;

    static TermBasis first_order(int k) { return {k, true, false, false, false}; }
    static TermBasis second_order(int k, bool block = false) { return {k, true, true, true, block}; }

    // "fo[,twi][,pq][,block]"; fo is implied and may be omitted.
    static TermBasis parse(int k, std::string_view terms);
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] std::size_t term_count() const noexcept;
    [[nodiscard]] std::vector<TermGroup> groups() const;
    [[nodiscard]] bool is_second_order() const noexcept { return include_twi || include_pq; }

    bool operator==(const TermBasis&) const = default;
};

// Term labels over the given factor names: "(Intercept)", "Block", "a",
// "a:b", "a^2".
std::vector<std::string> term_names(const TermBasis& basis, std::span<const std::string> factor_names);

// Block label 1 -> -1, label 2 -> +1. Absent block contributes 0.
double block_contrast(int block_label);

// Basis expansion of one coded point.
std::vector<double> expand_point(const TermBasis& basis, std::span<const double> coded,
                                 std::optional<int> block = std::nullopt);

Matrix model_matrix(const Design& design, const TermBasis& basis);

struct FittedModel {
    TermBasis basis;
    std::vector<std::string> factor_names;
    std::vector<std::string> term_names;
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> residuals;
    std::vector<double> fitted_values;
    double sigma2 = 0.0;
    int df_residual = 0;
    double r_squared = 1.0;
    double ss_residual = 0.0;
    double ss_total = 0.0;
    Matrix unscaled_covariance;  // (MᵀM)⁻¹
    std::string design_ref;

    [[nodiscard]] std::optional<double> coefficient(std::string_view term) const;

    bool operator==(const FittedModel&) const = default;
};

// Relative pivot threshold for rank decisions in the QR factorization.
inline constexpr double kRankTolerance = 1e-10;

// Least squares through a column-pivoted Householder QR. `responses[i]`
// belongs to design.points[i].
FittedModel fit(const Design& design, std::span<const double> responses, const TermBasis& basis,
                std::string design_ref = {});

// Same on a prebuilt model matrix; used by ANOVA for nested sub-models.
FittedModel fit_matrix(const Matrix& model, std::span<const double> responses, const TermBasis& basis,
                       std::vector<std::string> factor_names, std::vector<std::string> names,
                       std::string design_ref = {});

double predict(const FittedModel& model, std::span<const double> coded_point,
               std::optional<int> block = std::nullopt);

// n·f(x)ᵀ(MᵀM)⁻¹f(x) for the design's model matrix.
double scaled_prediction_variance(const Design& design, const TermBasis& basis,
                                  std::span<const double> coded_point);

}  // namespace rsmkit
