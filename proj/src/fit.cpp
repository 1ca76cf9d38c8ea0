#include "rsmkit/fit.hpp"

#include <algorithm>
#include <cmath>

#include "rsmkit/error.hpp"

namespace rsmkit {

namespace {

std::vector<std::string> default_factor_names(int k) {
    std::vector<std::string> names;
    for (int i = 1; i <= k; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

std::vector<std::string> factor_names_of(const Design& design) {
    std::vector<std::string> names;
    for (const auto& f : design.factors) names.push_back(f.name);
    return names;
}

// Mean with a shift so that constant data gives exactly zero deviations.
double stable_mean(std::span<const double> y) {
    if (y.empty()) return 0.0;
    const double shift = y.front();
    double s = 0.0;
    for (double v : y) s += v - shift;
    return shift + s / static_cast<double>(y.size());
}

// Canonical-order scan: a term is inestimable when its column adds no rank to
// the estimable terms before it.
std::vector<std::string> inestimable_terms(const Matrix& m, std::span<const std::string> names) {
    std::vector<std::size_t> accepted;
    std::vector<std::string> rejected;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        Matrix sub(m.rows(), accepted.size() + 1);
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < accepted.size(); ++c) sub(r, c) = m(r, accepted[c]);
            sub(r, accepted.size()) = m(r, j);
        }
        const auto qr = PivotedQr::factor(sub, kRankTolerance);
        if (qr.rank == accepted.size() + 1)
            accepted.push_back(j);
        else
            rejected.push_back(names[j]);
    }
    return rejected;
}

}  // namespace

std::string_view to_string(TermGroup g) noexcept {
    switch (g) {
        case TermGroup::Intercept: return "Intercept";
        case TermGroup::Block: return "Block";
        case TermGroup::FirstOrder: return "FirstOrder";
        case TermGroup::Interaction: return "Interaction";
        case TermGroup::PureQuadratic: return "PureQuadratic";
    }
    return "Intercept";
}

TermBasis TermBasis::parse(int k, std::string_view terms) {
    TermBasis b{k, true, false, false, false};
    std::size_t pos = 0;
    while (pos <= terms.size()) {
        const std::size_t comma = terms.find(',', pos);
        std::string_view tok = terms.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        if (tok == "fo" || tok.empty()) {
        } else if (tok == "twi") {
            b.include_twi = true;
        } else if (tok == "pq") {
            b.include_pq = true;
        } else if (tok == "so") {
            b.include_twi = b.include_pq = true;
        } else if (tok == "block") {
            b.include_block = true;
        } else {
            throw Error(ErrorCode::InvalidArgument,
                        "unknown term group '" + std::string(tok) + "' (expected fo, twi, pq, so, block)");
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return b;
}

std::string TermBasis::to_string() const {
    std::string s = "fo";
    if (include_twi) s += ",twi";
    if (include_pq) s += ",pq";
    if (include_block) s += ",block";
    return s;
}

std::size_t TermBasis::term_count() const noexcept {
    const auto kk = static_cast<std::size_t>(k);
    std::size_t p = 1;
    if (include_block) p += 1;
    if (include_fo) p += kk;
    if (include_twi) p += kk * (kk - 1) / 2;
    if (include_pq) p += kk;
    return p;
}

std::vector<TermGroup> TermBasis::groups() const {
    std::vector<TermGroup> g{TermGroup::Intercept};
    const auto kk = static_cast<std::size_t>(k);
    if (include_block) g.push_back(TermGroup::Block);
    if (include_fo) g.insert(g.end(), kk, TermGroup::FirstOrder);
    if (include_twi) g.insert(g.end(), kk * (kk - 1) / 2, TermGroup::Interaction);
    if (include_pq) g.insert(g.end(), kk, TermGroup::PureQuadratic);
    return g;
}

std::vector<std::string> term_names(const TermBasis& basis, std::span<const std::string> factor_names) {
    std::vector<std::string> fallback;
    if (factor_names.size() != static_cast<std::size_t>(basis.k)) {
        fallback = default_factor_names(basis.k);
        factor_names = fallback;
    }
    std::vector<std::string> names{"(Intercept)"};
    if (basis.include_block) names.emplace_back("Block");
    if (basis.include_fo)
        for (const auto& f : factor_names) names.push_back(f);
    if (basis.include_twi)
        for (std::size_t i = 0; i < factor_names.size(); ++i)
            for (std::size_t j = i + 1; j < factor_names.size(); ++j)
                names.push_back(factor_names[i] + ":" + factor_names[j]);
    if (basis.include_pq)
        for (const auto& f : factor_names) names.push_back(f + "^2");
    return names;
}

double block_contrast(int block_label) { return block_label == 1 ? -1.0 : 1.0; }

std::vector<double> expand_point(const TermBasis& basis, std::span<const double> coded, std::optional<int> block) {
    const auto k = static_cast<std::size_t>(basis.k);
    if (coded.size() != k)
        throw Error(ErrorCode::DimensionMismatch,
                    "point has " + std::to_string(coded.size()) + " coordinates, model has " + std::to_string(k));
    std::vector<double> row;
    row.reserve(basis.term_count());
    row.push_back(1.0);
    if (basis.include_block) row.push_back(block ? block_contrast(*block) : 0.0);
    if (basis.include_fo) row.insert(row.end(), coded.begin(), coded.end());
    if (basis.include_twi)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) row.push_back(coded[i] * coded[j]);
    if (basis.include_pq)
        for (std::size_t i = 0; i < k; ++i) row.push_back(coded[i] * coded[i]);
    return row;
}

Matrix model_matrix(const Design& design, const TermBasis& basis) {
    Matrix m(design.points.size(), basis.term_count());
    for (std::size_t r = 0; r < design.points.size(); ++r) {
        const auto& p = design.points[r];
        const auto row = expand_point(basis, p.coded, p.block);
        std::copy(row.begin(), row.end(), m.row(r).begin());
    }
    return m;
}

std::optional<double> FittedModel::coefficient(std::string_view term) const {
    for (std::size_t i = 0; i < term_names.size(); ++i)
        if (term_names[i] == term) return coefficients[i];
    return std::nullopt;
}

FittedModel fit(const Design& design, std::span<const double> responses, const TermBasis& basis,
                std::string design_ref) {
    if (responses.size() != design.points.size())
        throw Error(ErrorCode::LengthMismatch, std::to_string(responses.size()) + " responses for " +
                                                   std::to_string(design.points.size()) + " runs");
    if (static_cast<std::size_t>(basis.k) != design.k())
        throw Error(ErrorCode::DimensionMismatch, "term basis is for " + std::to_string(basis.k) +
                                                      " factors, design has " + std::to_string(design.k()));
    auto factor_names = factor_names_of(design);
    auto names = term_names(basis, factor_names);
    return fit_matrix(model_matrix(design, basis), responses, basis, std::move(factor_names), std::move(names),
                      std::move(design_ref));
}

FittedModel fit_matrix(const Matrix& model, std::span<const double> responses, const TermBasis& basis,
                       std::vector<std::string> factor_names, std::vector<std::string> names,
                       std::string design_ref) {
    if (responses.size() != model.rows())
        throw Error(ErrorCode::LengthMismatch, std::to_string(responses.size()) + " responses for " +
                                                   std::to_string(model.rows()) + " runs");
    for (std::size_t i = 0; i < responses.size(); ++i)
        if (!std::isfinite(responses[i]))
            throw Error(ErrorCode::NonFiniteResponse, "response " + std::to_string(i + 1) + " is not finite");

    const std::size_t n = model.rows();
    const std::size_t p = model.cols();
    const auto qr = PivotedQr::factor(model, kRankTolerance);
    if (qr.rank < p) {
        auto bad = inestimable_terms(model, names);
        if (bad.empty())
            for (std::size_t j = qr.rank; j < p; ++j) bad.push_back(names[qr.perm[j]]);
        std::string msg = "model matrix has rank " + std::to_string(qr.rank) + " < " + std::to_string(p) +
                          " terms; inestimable:";
        for (const auto& b : bad) msg += " " + b;
        throw Error(ErrorCode::RankDeficient, msg, bad);
    }

    FittedModel fm;
    fm.basis = basis;
    fm.factor_names = std::move(factor_names);
    fm.term_names = std::move(names);
    fm.design_ref = std::move(design_ref);
    fm.coefficients = qr.solve(responses);
    fm.fitted_values = model * std::span<const double>(fm.coefficients);
    fm.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fm.residuals[i] = responses[i] - fm.fitted_values[i];
        fm.ss_residual += fm.residuals[i] * fm.residuals[i];
    }
    const double ybar = stable_mean(responses);
    for (double y : responses) fm.ss_total += (y - ybar) * (y - ybar);
    fm.df_residual = static_cast<int>(n - p);
    fm.sigma2 = fm.df_residual > 0 ? fm.ss_residual / fm.df_residual : 0.0;
    if (fm.ss_total > 0.0) {
        fm.r_squared = std::clamp(1.0 - fm.ss_residual / fm.ss_total, 0.0, 1.0);
    } else {
        fm.r_squared = 1.0;
    }
    fm.unscaled_covariance = qr.inverse_gram();
    fm.std_errors.resize(p);
    for (std::size_t j = 0; j < p; ++j) fm.std_errors[j] = std::sqrt(fm.sigma2 * fm.unscaled_covariance(j, j));
    return fm;
}

double predict(const FittedModel& model, std::span<const double> coded_point, std::optional<int> block) {
    const auto row = expand_point(model.basis, coded_point, block);
    return dot(row, model.coefficients);
}

double scaled_prediction_variance(const Design& design, const TermBasis& basis,
                                  std::span<const double> coded_point) {
    const Matrix m = model_matrix(design, basis);
    const auto qr = PivotedQr::factor(m, kRankTolerance);
    if (qr.rank < m.cols())
        throw Error(ErrorCode::RankDeficient, "design cannot support the requested term basis");
    const Matrix cov = qr.inverse_gram();
    const auto f = expand_point(basis, coded_point);
    const auto cf = cov * std::span<const double>(f);
    return static_cast<double>(m.rows()) * dot(f, cf);
}

}  // namespace rsmkit
