#include "rsmkit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsmkit/error.hpp"

namespace rsmkit {

namespace {

constexpr double kZeroGradient = 1e-12;
constexpr double kSingularRatio = 1e-10;
constexpr double kClassifyRatio = 1e-8;
constexpr double kRadiusTolerance = 1e-10;

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

std::vector<double> eigen_column(const SymmetricEigen& e, std::size_t i) { return e.vectors.column(i); }

// Minimizer of cᵀz + zᵀBz on ‖z‖ = r.
std::vector<double> constrained_minimum(const Matrix& b_mat, std::span<const double> c, double r) {
    const std::size_t k = c.size();
    const SymmetricEigen eig = jacobi_eigen(b_mat);
    const auto& lambda = eig.values;
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = dot(eigen_column(eig, i), c);

    auto z_of = [&](double mu) {
        std::vector<double> z(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            const double coef = -0.5 * w[i] / (lambda[i] - mu);
            for (std::size_t row = 0; row < k; ++row) z[row] += coef * eig.vectors(row, i);
        }
        return z;
    };

    const double lam_min = lambda.front();
    const double lam_scale = max_abs(lambda);
    const double c_norm = norm2(c);
    const auto v_min = eigen_column(eig, 0);

    // Hard case: c has no component along the lowest eigenspace, so the
    // secular equation may have no root below lambda_min.
    double w_low = 0.0;
    std::vector<bool> low(k, false);
    for (std::size_t i = 0; i < k; ++i) {
        if (lambda[i] - lam_min <= kSingularRatio * std::max(lam_scale, 1e-300)) {
            low[i] = true;
            w_low += w[i] * w[i];
        }
    }
    w_low = std::sqrt(w_low);
    if (w_low <= 1e-12 * (c_norm + lam_scale * r)) {
        std::vector<double> z(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            if (low[i]) continue;
            const double coef = -0.5 * w[i] / (lambda[i] - lam_min);
            for (std::size_t row = 0; row < k; ++row) z[row] += coef * eig.vectors(row, i);
        }
        const double zn = norm2(z);
        if (zn <= r) {
            const double t = std::sqrt(std::max(0.0, r * r - zn * zn));
            for (std::size_t row = 0; row < k; ++row) z[row] += t * v_min[row];
            return z;
        }
    }

    // Safeguarded bisection on mu < lambda_min: ‖z(mu)‖ grows monotonically
    // toward lambda_min, and ‖z(lo)‖ <= r by the bound ‖c‖/(2(λmin − mu)).
    double lo = lam_min - c_norm / (2.0 * r) - 1e-300;
    double hi = lam_min;
    if (!(lo < hi)) lo = std::nextafter(hi, -INFINITY);
    std::vector<double> z = z_of(lo);
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const auto zm = z_of(mid);
        const double nm = norm2(zm);
        if (nm > r) {
            hi = mid;
        } else {
            lo = mid;
            z = zm;
            if (r - nm <= kRadiusTolerance * r) break;
        }
    }

    // Close any remaining radial gap along the lowest eigenvector.
    double zn = norm2(z);
    if (r - zn > kRadiusTolerance * r) {
        const double a = dot(z, v_min);
        const double disc = a * a - (zn * zn - r * r);
        const double t = a >= 0.0 ? -a + std::sqrt(disc) : -a - std::sqrt(disc);
        for (std::size_t row = 0; row < k; ++row) z[row] += t * v_min[row];
        zn = norm2(z);
    }
    if (zn > 0.0)
        for (double& v : z) v *= r / zn;
    return z;
}

}  // namespace

std::string_view to_string(Goal g) noexcept { return g == Goal::Minimize ? "min" : "max"; }

Goal parse_goal(std::string_view s) {
    if (s == "min" || s == "minimize") return Goal::Minimize;
    if (s == "max" || s == "maximize") return Goal::Maximize;
    throw Error(ErrorCode::InvalidArgument, "goal must be min or max, got '" + std::string(s) + "'");
}

QuadraticForm QuadraticForm::from_model(const FittedModel& model) {
    const auto& basis = model.basis;
    const auto k = static_cast<std::size_t>(basis.k);
    QuadraticForm q;
    q.linear.assign(k, 0.0);
    q.quadratic = Matrix(k, k);
    std::size_t idx = 0;
    q.intercept = model.coefficients[idx++];
    if (basis.include_block) ++idx;
    if (basis.include_fo)
        for (std::size_t i = 0; i < k; ++i) q.linear[i] = model.coefficients[idx++];
    if (basis.include_twi)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) {
                const double half = 0.5 * model.coefficients[idx++];
                q.quadratic(i, j) = half;
                q.quadratic(j, i) = half;
            }
    if (basis.include_pq)
        for (std::size_t i = 0; i < k; ++i) q.quadratic(i, i) = model.coefficients[idx++];
    return q;
}

double QuadraticForm::value(std::span<const double> x) const {
    const auto bx = quadratic * x;
    return intercept + dot(linear, x) + dot(x, bx);
}

std::vector<double> QuadraticForm::gradient(std::span<const double> x) const {
    auto g = quadratic * x;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = linear[i] + 2.0 * g[i];
    return g;
}

std::vector<double> ridge_point(const QuadraticForm& q, Goal goal, std::span<const double> origin, double radius) {
    const std::size_t k = q.linear.size();
    std::vector<double> out(origin.begin(), origin.end());
    if (radius == 0.0) return out;
    const double sign = goal == Goal::Minimize ? 1.0 : -1.0;
    Matrix b_mat = q.quadratic;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) b_mat(i, j) *= sign;
    // Linear term of the objective re-expanded around the origin.
    auto c = q.gradient(origin);
    for (double& v : c) v *= sign;
    const auto z = constrained_minimum(b_mat, c, radius);
    for (std::size_t i = 0; i < k; ++i) out[i] += z[i];
    return out;
}

DescentPath steepest_path(const FittedModel& model, Goal goal, std::span<const double> radii,
                          const PathOptions& options) {
    const auto k = static_cast<std::size_t>(model.basis.k);
    if (!model.basis.include_fo) throw Error(ErrorCode::NoFirstOrderTerms, "model has no first-order terms");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!std::isfinite(radii[i]) || radii[i] < 0.0)
            throw Error(ErrorCode::InvalidArgument, "path radii must be finite and >= 0");
        if (i > 0 && radii[i] < radii[i - 1])
            throw Error(ErrorCode::InvalidArgument, "path radii must be sorted ascending");
    }

    DescentPath path;
    path.goal = goal;
    path.origin = options.origin.value_or(std::vector<double>(k, 0.0));
    if (path.origin.size() != k)
        throw Error(ErrorCode::DimensionMismatch, "path origin has " + std::to_string(path.origin.size()) +
                                                      " coordinates, model has " + std::to_string(k));

    const QuadraticForm q = QuadraticForm::from_model(model);
    const bool second_order = model.basis.is_second_order();
    const auto g = q.gradient(path.origin);
    const double g_norm = norm2(g);
    if (g_norm < kZeroGradient && (!second_order || max_abs(q.quadratic.data()) < kZeroGradient))
        throw Error(ErrorCode::ZeroGradient, "fitted surface is flat at the origin: no direction of improvement");

    const double sign = goal == Goal::Minimize ? -1.0 : 1.0;
    for (double r : radii) {
        PathStep step;
        step.radius = r;
        if (second_order) {
            step.coded = ridge_point(q, goal, path.origin, r);
        } else {
            step.coded = path.origin;
            for (std::size_t i = 0; i < k; ++i) step.coded[i] += sign * r * g[i] / g_norm;
        }
        step.predicted = predict(model, step.coded);
        step.extrapolated = norm2(step.coded) > options.region_radius * (1.0 + 1e-12);
        path.steps.push_back(std::move(step));
    }
    return path;
}

std::string_view to_string(Nature n) noexcept {
    switch (n) {
        case Nature::Minimum: return "Minimum";
        case Nature::Maximum: return "Maximum";
        case Nature::Saddle: return "Saddle";
        case Nature::Degenerate: return "Degenerate";
    }
    return "Degenerate";
}

Nature parse_nature(std::string_view s) {
    for (auto n : {Nature::Minimum, Nature::Maximum, Nature::Saddle, Nature::Degenerate})
        if (to_string(n) == s) return n;
    throw Error(ErrorCode::InvalidArgument, "unknown stationary point nature '" + std::string(s) + "'");
}

Nature classify(std::span<const double> eigenvalues) {
    const double tau = kClassifyRatio * max_abs(eigenvalues);
    bool all_pos = true;
    bool all_neg = true;
    for (double l : eigenvalues) {
        if (std::fabs(l) <= tau) return Nature::Degenerate;
        all_pos = all_pos && l > tau;
        all_neg = all_neg && l < -tau;
    }
    if (all_pos) return Nature::Minimum;
    if (all_neg) return Nature::Maximum;
    return Nature::Saddle;
}

StationaryPoint stationary_point(const FittedModel& model) {
    if (!model.basis.include_pq)
        throw Error(ErrorCode::NoQuadraticTerms, "stationary point analysis needs pure quadratic terms");
    return stationary_point(QuadraticForm::from_model(model));
}

StationaryPoint stationary_point(const QuadraticForm& q) {
    const std::size_t k = q.linear.size();
    const SymmetricEigen eig = jacobi_eigen(q.quadratic);
    StationaryPoint sp;
    sp.eigenvalues = eig.values;
    sp.eigenvectors = eig.vectors;

    const double largest = max_abs(eig.values);
    double smallest = largest;
    for (double l : eig.values) smallest = std::min(smallest, std::fabs(l));
    if (largest == 0.0 || smallest < kSingularRatio * largest) {
        sp.nature = Nature::Degenerate;
        return sp;
    }
    std::vector<double> xs(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto v = eigen_column(eig, i);
        const double coef = -0.5 * dot(v, q.linear) / eig.values[i];
        for (std::size_t row = 0; row < k; ++row) xs[row] += coef * v[row];
    }
    sp.predicted = q.value(xs);
    sp.coded = std::move(xs);
    sp.nature = classify(eig.values);
    return sp;
}

}  // namespace rsmkit
