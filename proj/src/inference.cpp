#include "rsmkit/inference.hpp"

#include <algorithm>
#include <cmath>

#include "rsmkit/error.hpp"

namespace rsmkit {

namespace {

constexpr double kReplicateTolerance = 1e-12;

bool same_setting(const DesignPoint& a, const DesignPoint& b) {
    if (a.block != b.block || a.coded.size() != b.coded.size()) return false;
    for (std::size_t i = 0; i < a.coded.size(); ++i)
        if (std::fabs(a.coded[i] - b.coded[i]) > kReplicateTolerance) return false;
    return true;
}

Matrix leading_columns(const Matrix& m, std::size_t count) {
    Matrix out(m.rows(), count);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < count; ++c) out(r, c) = m(r, c);
    return out;
}

// No F test against a denominator that is only rounding noise.
void attach_f(AnovaRow& row, const AnovaRow& denominator, double ss_floor) {
    if (row.df > 0 && denominator.df > 0 && denominator.ss > ss_floor) {
        row.f_stat = row.ms / denominator.ms;
        row.p_value = f_sf(*row.f_stat, row.df, denominator.df);
    }
}

// Sums of squares at or below this are indistinguishable from an exact fit.
double ss_floor(std::span<const double> responses) {
    double y2 = 0.0;
    for (double y : responses) y2 += y * y;
    return kPerfectFitTolerance * kPerfectFitTolerance * y2;
}

}  // namespace

std::string_view to_string(AnovaSource s) noexcept {
    switch (s) {
        case AnovaSource::Block: return "Block";
        case AnovaSource::FirstOrder: return "FirstOrder";
        case AnovaSource::Interaction: return "Interaction";
        case AnovaSource::PureQuadratic: return "PureQuadratic";
        case AnovaSource::Residual: return "Residual";
        case AnovaSource::LackOfFit: return "LackOfFit";
        case AnovaSource::PureError: return "PureError";
    }
    return "Residual";
}

AnovaSource parse_anova_source(std::string_view s) {
    for (auto src : {AnovaSource::Block, AnovaSource::FirstOrder, AnovaSource::Interaction,
                     AnovaSource::PureQuadratic, AnovaSource::Residual, AnovaSource::LackOfFit,
                     AnovaSource::PureError})
        if (to_string(src) == s) return src;
    throw Error(ErrorCode::InvalidArgument, "unknown ANOVA source '" + std::string(s) + "'");
}

const AnovaRow* AnovaTable::find(AnovaSource s) const noexcept {
    for (const auto& r : rows)
        if (r.source == s) return &r;
    return nullptr;
}

std::vector<std::vector<std::size_t>> replicate_groups(const Design& design) {
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < design.points.size(); ++i) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const std::vector<std::size_t>& g) {
            return same_setting(design.points[g.front()], design.points[i]);
        });
        if (it == groups.end())
            groups.push_back({i});
        else
            it->push_back(i);
    }
    return groups;
}

AnovaTable anova(const Design& design, std::span<const double> responses, const TermBasis& basis) {
    const FittedModel full = fit(design, responses, basis);
    const Matrix m = model_matrix(design, basis);
    const auto groups = basis.groups();

    AnovaTable table;
    table.ss_total = full.ss_total;
    table.df_total = static_cast<int>(design.points.size()) - 1;

    struct Step {
        TermGroup group;
        AnovaSource source;
    };
    const Step steps[] = {{TermGroup::Block, AnovaSource::Block},
                          {TermGroup::FirstOrder, AnovaSource::FirstOrder},
                          {TermGroup::Interaction, AnovaSource::Interaction},
                          {TermGroup::PureQuadratic, AnovaSource::PureQuadratic}};

    // Canonical column order makes each nested model a prefix of the columns.
    double previous_ss = full.ss_total;
    for (const auto& step : steps) {
        const auto first = std::find(groups.begin(), groups.end(), step.group);
        if (first == groups.end()) continue;
        const auto last = std::find_if(first, groups.end(), [&](TermGroup g) { return g != step.group; });
        const auto prefix = static_cast<std::size_t>(last - groups.begin());
        double ss_res = full.ss_residual;
        if (prefix < m.cols()) {
            const Matrix sub = leading_columns(m, prefix);
            ss_res = fit_matrix(sub, responses, basis, full.factor_names,
                                std::vector<std::string>(full.term_names.begin(),
                                                         full.term_names.begin() + static_cast<std::ptrdiff_t>(prefix)))
                         .ss_residual;
        }
        AnovaRow row;
        row.source = step.source;
        row.df = static_cast<int>(last - first);
        row.ss = std::max(0.0, previous_ss - ss_res);
        row.ms = row.df > 0 ? row.ss / row.df : 0.0;
        table.rows.push_back(row);
        previous_ss = ss_res;
    }

    AnovaRow residual;
    residual.source = AnovaSource::Residual;
    residual.ss = full.ss_residual;
    residual.df = full.df_residual;
    residual.ms = residual.df > 0 ? residual.ss / residual.df : 0.0;
    const double floor = ss_floor(responses);
    for (auto& row : table.rows) attach_f(row, residual, floor);
    table.rows.push_back(residual);

    double ss_pe = 0.0;
    int df_pe = 0;
    for (const auto& g : replicate_groups(design)) {
        if (g.size() < 2) continue;
        std::vector<double> ys;
        for (auto idx : g) ys.push_back(responses[idx]);
        const double shift = ys.front();
        double s = 0.0;
        for (double y : ys) s += y - shift;
        const double mean = shift + s / static_cast<double>(ys.size());
        for (double y : ys) ss_pe += (y - mean) * (y - mean);
        df_pe += static_cast<int>(g.size()) - 1;
    }
    if (df_pe > 0) {
        table.lack_of_fit_available = true;
        AnovaRow pe;
        pe.source = AnovaSource::PureError;
        pe.ss = std::min(ss_pe, full.ss_residual);
        pe.df = df_pe;
        pe.ms = pe.ss / pe.df;
        AnovaRow lof;
        lof.source = AnovaSource::LackOfFit;
        lof.ss = std::max(0.0, full.ss_residual - pe.ss);
        lof.df = residual.df - df_pe;
        lof.ms = lof.df > 0 ? lof.ss / lof.df : 0.0;
        attach_f(lof, pe, floor);
        table.rows.push_back(lof);
        table.rows.push_back(pe);
    }
    return table;
}

std::vector<CoefficientTest> coefficient_tests(const FittedModel& model) {
    if (model.df_residual < 1)
        throw Error(ErrorCode::ZeroDfResidual, "no residual degrees of freedom: the model is saturated");
    // A fit whose residual RMS is below 1e-12 of the response RMS is treated
    // as exact: σ̂² = 0, so nonzero estimates get p = 0 and ~zero ones p = 1.
    const std::size_t n = model.residuals.size();
    double y2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = model.fitted_values[i] + model.residuals[i];
        y2 += y * y;
    }
    const double y_rms = n > 0 ? std::sqrt(y2 / static_cast<double>(n)) : 0.0;
    const double res_rms = n > 0 ? std::sqrt(model.ss_residual / static_cast<double>(n)) : 0.0;
    const bool perfect = model.sigma2 == 0.0 || res_rms <= kPerfectFitTolerance * y_rms;

    std::vector<CoefficientTest> out;
    out.reserve(model.coefficients.size());
    for (std::size_t i = 0; i < model.coefficients.size(); ++i) {
        CoefficientTest t;
        t.term = i < model.term_names.size() ? model.term_names[i] : "b" + std::to_string(i);
        t.estimate = model.coefficients[i];
        t.std_error = model.std_errors[i];
        const bool zero = perfect ? std::fabs(t.estimate) <= kPerfectFitTolerance * y_rms : t.estimate == 0.0;
        if (zero) {
            t.t_stat = 0.0;
            t.p_value = 1.0;
        } else if (perfect || t.std_error == 0.0) {
            t.p_value = 0.0;
        } else {
            t.t_stat = t.estimate / t.std_error;
            t.p_value = t_two_sided_p(*t.t_stat, model.df_residual);
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace rsmkit
