#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rsmkit/design.hpp"
#include "rsmkit/error.hpp"
#include "rsmkit/fit.hpp"
#include "rsmkit/inference.hpp"

using namespace rsmkit;

namespace {

std::vector<FactorSpec> factors(int k) {
    std::vector<FactorSpec> out;
    for (int i = 0; i < k; ++i) out.push_back({"x" + std::to_string(i + 1), -1.0, 1.0, ""});
    return out;
}

double ss_of(const AnovaTable& t, AnovaSource s) {
    const AnovaRow* r = t.find(s);
    return r ? r->ss : 0.0;
}

void check_identities(const AnovaTable& t, std::size_t n) {
    const double total = t.ss_total;
    const double sum = ss_of(t, AnovaSource::Block) + ss_of(t, AnovaSource::FirstOrder) +
                       ss_of(t, AnovaSource::Interaction) + ss_of(t, AnovaSource::PureQuadratic) +
                       ss_of(t, AnovaSource::Residual);
    CHECK(std::fabs(sum - total) <= 1e-10 * total);
    int df = 0;
    for (const auto& r : t.rows) {
        CHECK(r.df >= 0);
        CHECK(r.ss >= 0.0);
        if (r.p_value) {
            CHECK(*r.p_value >= 0.0);
            CHECK(*r.p_value <= 1.0);
        }
        if (r.source != AnovaSource::LackOfFit && r.source != AnovaSource::PureError) df += r.df;
    }
    CHECK(df == static_cast<int>(n) - 1);
    CHECK(t.df_total == static_cast<int>(n) - 1);
    if (t.lack_of_fit_available) {
        const double res = ss_of(t, AnovaSource::Residual);
        CHECK(std::fabs(ss_of(t, AnovaSource::LackOfFit) + ss_of(t, AnovaSource::PureError) - res) <=
              1e-10 * total);
        CHECK(t.find(AnovaSource::LackOfFit)->df + t.find(AnovaSource::PureError)->df ==
              t.find(AnovaSource::Residual)->df);
    }
}

}  // namespace

TEST_CASE("sources appear in canonical order") {
    const Design d = ccd(factors(2), AlphaRule::rotatable(), 3, 1, 2, 1);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> y(d.size());
    for (auto& v : y) v = g(rng);
    const AnovaTable t = anova(d, y, TermBasis::second_order(2, true));
    std::vector<AnovaSource> order;
    for (const auto& r : t.rows) order.push_back(r.source);
    CHECK(order == std::vector<AnovaSource>{AnovaSource::Block, AnovaSource::FirstOrder, AnovaSource::Interaction,
                                            AnovaSource::PureQuadratic, AnovaSource::Residual,
                                            AnovaSource::LackOfFit, AnovaSource::PureError});
    check_identities(t, d.size());
}

TEST_CASE("constant responses give zero sums of squares") {
    const Design d = ccd(factors(2), AlphaRule::rotatable(), 3, 1, 1, 1);
    const std::vector<double> y(d.size(), 12.5);
    const AnovaTable t = anova(d, y, TermBasis::second_order(2));
    CHECK(t.ss_total == 0.0);
    for (const auto& r : t.rows) {
        CHECK(std::fabs(r.ss) <= 1e-20);
        CHECK_FALSE(r.f_stat.has_value());
    }
}

TEST_CASE("pure error from two center replicates") {
    const Design d = ccd(factors(2), AlphaRule::none(), 2, 1, 1, 4);
    std::vector<double> y(d.size());
    bool first = true;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& p = d.points[i];
        if (p.point_type == PointType::Center) {
            y[i] = first ? 9.0 : 11.0;
            first = false;
        } else {
            y[i] = 3.0 * p.coded[0] + p.coded[1];
        }
    }
    const AnovaTable t = anova(d, y, TermBasis::first_order(2));
    REQUIRE(t.lack_of_fit_available);
    CHECK(t.find(AnovaSource::PureError)->ss == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(t.find(AnovaSource::PureError)->df == 1);
    CHECK(t.find(AnovaSource::LackOfFit)->df == 2);  // 5 settings, 3 parameters
    check_identities(t, d.size());
}

TEST_CASE("no replicates: lack of fit rows are absent") {
    const Design d = ccd(factors(2), AlphaRule::none(), 1, 1, 1, 1);
    const std::vector<double> y{1.0, 2.5, 0.7, 4.0, 2.0};
    const AnovaTable t = anova(d, y, TermBasis::first_order(2));
    CHECK_FALSE(t.lack_of_fit_available);
    CHECK(t.find(AnovaSource::LackOfFit) == nullptr);
    CHECK(t.find(AnovaSource::PureError) == nullptr);
}

TEST_CASE("block shift matches the group-means oracle") {
    const Design d = ccd(factors(2), AlphaRule::none(), 2, 2, 2, 6);
    std::vector<double> y;
    std::vector<int> blocks;
    for (const auto& p : d.points) {
        y.push_back(p.block == 2 ? 5.0 : 0.0);
        blocks.push_back(p.block);
    }
    const AnovaTable t = anova(d, y, TermBasis::parse(2, "fo,block"));
    const double expected = oracle::block_ss(blocks, y);
    CHECK(expected == doctest::Approx(static_cast<double>(d.size()) * 25.0 / 4.0));
    CHECK(std::fabs(t.find(AnovaSource::Block)->ss - expected) <= 1e-10 * expected);
}

TEST_CASE("block row equals the group-means oracle whatever the other terms") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 40; ++trial) {
        const Design d = ccd(factors(2), AlphaRule::rotatable(), 3, 1, 2, static_cast<std::uint64_t>(trial));
        std::vector<double> y;
        std::vector<int> blocks;
        for (const auto& p : d.points) {
            y.push_back(4.0 + 2.0 * p.coded[0] - p.coded[1] * p.coded[1] + (p.block == 2 ? 1.5 : 0.0) + g(rng));
            blocks.push_back(p.block);
        }
        const double expected = oracle::block_ss(blocks, y);
        for (const char* terms : {"fo,block", "fo,twi,block", "fo,twi,pq,block"}) {
            const AnovaTable t = anova(d, y, TermBasis::parse(2, terms));
            CHECK(std::fabs(t.find(AnovaSource::Block)->ss - expected) <= 1e-10 * t.ss_total);
            check_identities(t, d.size());
        }
    }
}

TEST_CASE("sums of squares are additive on random data") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + trial % 2;
        const Design d = ccd(factors(k), AlphaRule::rotatable(), 2 + trial % 3, 1 + trial % 2, 1 + trial % 2,
                             static_cast<std::uint64_t>(trial));
        std::vector<double> y(d.size());
        for (auto& v : y) v = 20.0 + 3.0 * g(rng);
        const TermBasis basis = TermBasis::second_order(k, d.n_blocks == 2);
        const AnovaTable t = anova(d, y, basis);
        check_identities(t, d.size());
        std::vector<std::pair<int, std::vector<double>>> settings;
        for (const auto& p : d.points) settings.emplace_back(p.block, p.coded);
        if (t.lack_of_fit_available)
            CHECK(std::fabs(t.find(AnovaSource::PureError)->ss - oracle::pure_error_ss(settings, y)) <=
                  1e-10 * t.ss_total);
    }
}

TEST_CASE("F statistics and p values use the residual mean square") {
    const Design d = ccd(factors(2), AlphaRule::rotatable(), 5, 1, 1, 2);
    oracle::Normal noise(5);
    std::vector<double> y;
    for (const auto& p : d.points) y.push_back(1.0 + 0.8 * p.coded[0] + 0.5 * noise());
    const AnovaTable t = anova(d, y, TermBasis::second_order(2));
    const AnovaRow& res = *t.find(AnovaSource::Residual);
    const AnovaRow& fo = *t.find(AnovaSource::FirstOrder);
    REQUIRE(fo.f_stat.has_value());
    CHECK(*fo.f_stat == doctest::Approx(fo.ms / res.ms).epsilon(1e-12));
    CHECK(*fo.p_value == doctest::Approx(1.0 - oracle::f_cdf(*fo.f_stat, fo.df, res.df)).epsilon(1e-9));
}

TEST_CASE("coefficient tests: a zero estimate has p = 1") {
    // y = x1 on a 2^2 factorial plus one center: x2 estimate is exactly 0
    const Design with_center = ccd(factors(2), AlphaRule::none(), 1, 1, 1, 1);
    std::vector<double> y;
    for (const auto& p : with_center.points) y.push_back(p.coded[0] + (p.point_type == PointType::Center ? 0.3 : 0.0));
    const auto tests = coefficient_tests(fit(with_center, y, TermBasis::first_order(2)));
    REQUIRE(tests.size() == 3);
    CHECK(std::fabs(tests[2].estimate) <= 1e-15);
    CHECK(std::fabs(*tests[2].t_stat) <= 1e-12);
    CHECK(tests[2].p_value == doctest::Approx(1.0).epsilon(1e-12));
    CoefficientTest exact_zero = coefficient_tests([&] {
        FittedModel m = fit(with_center, y, TermBasis::first_order(2));
        m.coefficients[2] = 0.0;
        return m;
    }())[2];
    CHECK(*exact_zero.t_stat == 0.0);
    CHECK(exact_zero.p_value == 1.0);
}

TEST_CASE("coefficient tests under a perfect fit") {
    const Design d = ccd(factors(2), AlphaRule::none(), 1, 1, 1, 1);
    std::vector<double> y;
    for (const auto& p : d.points) y.push_back(2.0 + 3.0 * p.coded[0]);
    const auto tests = coefficient_tests(fit(d, y, TermBasis::first_order(2)));
    CHECK(tests[0].p_value == 0.0);
    CHECK(tests[1].p_value == 0.0);
    CHECK(tests[2].p_value == 1.0);
}

TEST_CASE("coefficient tests need residual degrees of freedom") {
    const Design d = full_factorial(2);
    const FittedModel m = fit(d, std::vector<double>{1, 2, 4, 3}, TermBasis::parse(2, "fo,twi"));
    CHECK(m.df_residual == 0);
    try {
        coefficient_tests(m);
        FAIL("expected ZeroDfResidual");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroDfResidual);
    }
}

TEST_CASE("simulated strong x1 effect and no x2 effect") {
    const Design d = ccd(factors(2), AlphaRule::rotatable(), 5, 1, 1, 17);
    oracle::Normal noise(2024);
    std::vector<double> y;
    for (const auto& p : d.points) y.push_back(3.0 * p.coded[0] + 0.1 * noise());
    const FittedModel m = fit(d, y, TermBasis::first_order(2));
    const auto tests = coefficient_tests(m);
    CHECK(tests[1].term == "x1");
    CHECK(tests[1].p_value < 0.001);
    CHECK(tests[2].p_value > 0.05);
    // t statistics against an independent computation
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const double t = m.coefficients[i] / m.std_errors[i];
        CHECK(*tests[i].t_stat == doctest::Approx(t).epsilon(1e-12));
        CHECK(tests[i].p_value == doctest::Approx(2.0 * oracle::t_cdf(-std::fabs(t), m.df_residual)).epsilon(1e-9));
    }
}

TEST_CASE("replicate groups respect blocks") {
    const Design d = ccd(factors(2), AlphaRule::rotatable(), 2, 1, 2, 1);
    const auto groups = replicate_groups(d);
    // centers in block 1 and block 2 form separate groups of two
    int center_groups = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) continue;
        const int b = d.points[g[0]].block;
        for (auto i : g) {
            CHECK(d.points[i].block == b);
            CHECK(d.points[i].coded == d.points[g[0]].coded);
        }
        ++center_groups;
    }
    CHECK(center_groups == 2);
}
