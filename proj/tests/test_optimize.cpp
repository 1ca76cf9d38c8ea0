#include <doctest.h>

#include <cmath>
#include <random>

#include "rsmkit/error.hpp"
#include "rsmkit/fit.hpp"
#include "rsmkit/optimize.hpp"

using namespace rsmkit;

namespace {

FittedModel model(const TermBasis& basis, std::vector<double> coefficients) {
    FittedModel m;
    m.basis = basis;
    for (int i = 0; i < basis.k; ++i) m.factor_names.push_back("x" + std::to_string(i + 1));
    m.term_names = term_names(basis, m.factor_names);
    REQUIRE(coefficients.size() == basis.term_count());
    m.coefficients = std::move(coefficients);
    m.std_errors.assign(m.coefficients.size(), 0.0);
    return m;
}

// 2-factor second-order model from ŷ = b0 + b1 x1 + b2 x2 + b12 x1x2 + b11 x1² + b22 x2²
FittedModel quad2(double b0, double b1, double b2, double b12, double b11, double b22) {
    return model(TermBasis::second_order(2), {b0, b1, b2, b12, b11, b22});
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an rsmkit::Error");
    return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("first-order path follows the negative gradient") {
    const FittedModel m = model(TermBasis::first_order(2), {50.0, -3.0, 4.0});
    const std::vector<double> radii{1.0};
    const DescentPath p = steepest_path(m, Goal::Minimize, radii);
    REQUIRE(p.steps.size() == 1);
    CHECK(p.steps[0].coded[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(p.steps[0].coded[1] == doctest::Approx(-0.8).epsilon(1e-15));
    CHECK(p.steps[0].predicted == doctest::Approx(45.0).epsilon(1e-15));
    CHECK_FALSE(p.steps[0].extrapolated);

    const DescentPath up = steepest_path(m, Goal::Maximize, radii);
    CHECK(up.steps[0].coded[0] == doctest::Approx(-0.6));
    CHECK(up.steps[0].predicted == doctest::Approx(55.0));
}

TEST_CASE("first-order path is monotone and on the requested radii") {
    const FittedModel m = model(TermBasis::parse(3, "fo,block"), {2.0, 0.7, 1.0, -0.4, 0.25});
    const std::vector<double> radii{0.0, 0.5, 1.0, 1.5, 2.0, 3.0};
    const DescentPath p = steepest_path(m, Goal::Minimize, radii);
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
        CHECK(std::fabs(norm2(p.steps[i].coded) - radii[i]) <= 1e-9);
        if (i > 0) CHECK(p.steps[i].predicted < p.steps[i - 1].predicted);
        CHECK(p.steps[i].extrapolated == (radii[i] > 1.0));
    }
}

TEST_CASE("flat first-order surface has no direction") {
    const FittedModel m = model(TermBasis::first_order(2), {7.0, 0.0, 0.0});
    const std::vector<double> radii{1.0};
    CHECK(code_of([&] { steepest_path(m, Goal::Minimize, radii); }) == ErrorCode::ZeroGradient);
}

TEST_CASE("path argument validation") {
    const FittedModel m = model(TermBasis::first_order(2), {0.0, 1.0, 1.0});
    CHECK(code_of([&] { steepest_path(m, Goal::Minimize, std::vector<double>{1.0, 0.5}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([&] { steepest_path(m, Goal::Minimize, std::vector<double>{-1.0}); }) ==
          ErrorCode::InvalidArgument);
    FittedModel no_fo = m;
    no_fo.basis.include_fo = false;
    CHECK(code_of([&] { steepest_path(no_fo, Goal::Minimize, std::vector<double>{1.0}); }) ==
          ErrorCode::NoFirstOrderTerms);
}

TEST_CASE("symmetric cap: every point on the circle is optimal") {
    const FittedModel m = quad2(0.0, 0.0, 0.0, 0.0, -1.0, -1.0);
    const std::vector<double> radii{0.5, 1.0, 2.0};
    const DescentPath p = steepest_path(m, Goal::Maximize, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        CHECK(std::fabs(norm2(p.steps[i].coded) - radii[i]) <= 1e-9);
        CHECK(std::fabs(p.steps[i].predicted + radii[i] * radii[i]) <= 1e-9);
    }
}

TEST_CASE("second-order steps beat random points on the same sphere") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 10; ++trial) {
        const FittedModel m = quad2(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
        const QuadraticForm q = QuadraticForm::from_model(m);
        for (Goal goal : {Goal::Minimize, Goal::Maximize}) {
            const std::vector<double> radii{0.3, 1.0, 1.7};
            const DescentPath p = steepest_path(m, goal, radii);
            for (const auto& s : p.steps) {
                CHECK(std::fabs(norm2(s.coded) - s.radius) <= 1e-9);
                for (int i = 0; i < 1000; ++i) {
                    std::vector<double> x{g(rng), g(rng)};
                    const double n = norm2(x);
                    for (auto& v : x) v *= s.radius / n;
                    const double v = q.value(x);
                    if (goal == Goal::Minimize)
                        CHECK(s.predicted <= v + 1e-9);
                    else
                        CHECK(s.predicted >= v - 1e-9);
                }
            }
        }
    }
}

TEST_CASE("quadratic form from a model") {
    const FittedModel m = model(TermBasis::second_order(2, true), {1.0, 9.0, 2.0, -3.0, 0.5, 1.0, -2.0});
    const QuadraticForm q = QuadraticForm::from_model(m);
    CHECK(q.intercept == 1.0);
    CHECK(q.linear == std::vector<double>{2.0, -3.0});
    CHECK(q.quadratic(0, 0) == 1.0);
    CHECK(q.quadratic(1, 1) == -2.0);
    CHECK(q.quadratic(0, 1) == 0.25);
    CHECK(q.quadratic(1, 0) == 0.25);
    const std::vector<double> x{1.0, 1.0};
    CHECK(q.value(x) == doctest::Approx(-0.5));
    CHECK(q.value(x) == doctest::Approx(predict(m, x)));
}

TEST_CASE("stationary point of a ridge maximum") {
    const StationaryPoint s = stationary_point(quad2(0.0, 2.0, 0.0, 0.0, -1.0, -2.0));
    REQUIRE(s.coded.has_value());
    CHECK((*s.coded)[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::fabs((*s.coded)[1]) <= 1e-14);
    CHECK(s.eigenvalues[0] == doctest::Approx(-2.0));
    CHECK(s.eigenvalues[1] == doctest::Approx(-1.0));
    CHECK(s.nature == Nature::Maximum);
    CHECK(*s.predicted == doctest::Approx(1.0));
}

TEST_CASE("symmetric bowl and saddle") {
    const StationaryPoint bowl = stationary_point(quad2(10.0, 0.0, 0.0, 0.0, -1.0, -1.0));
    CHECK(*bowl.coded == std::vector<double>{0.0, 0.0});
    CHECK(*bowl.predicted == 10.0);
    CHECK(bowl.nature == Nature::Maximum);

    const StationaryPoint saddle = stationary_point(quad2(0.0, 0.0, 0.0, 0.0, 1.0, -1.0));
    CHECK(*saddle.coded == std::vector<double>{0.0, 0.0});
    CHECK(saddle.eigenvalues == std::vector<double>{-1.0, 1.0});
    CHECK(saddle.nature == Nature::Saddle);
}

TEST_CASE("singular curvature is degenerate with eigen data") {
    const StationaryPoint s = stationary_point(quad2(0.0, 1.0, 1.0, 0.0, 1.0, 0.0));
    CHECK(s.nature == Nature::Degenerate);
    CHECK_FALSE(s.coded.has_value());
    CHECK(s.eigenvalues.size() == 2);
    CHECK(s.eigenvectors.rows() == 2);
}

TEST_CASE("stationary point requires quadratic terms") {
    const FittedModel m = model(TermBasis::parse(2, "fo,twi"), {0.0, 1.0, 1.0, 1.0});
    CHECK(code_of([&] { stationary_point(m); }) == ErrorCode::NoQuadraticTerms);
}

TEST_CASE("classification thresholds") {
    CHECK(classify(std::vector<double>{1.0, 2.0}) == Nature::Minimum);
    CHECK(classify(std::vector<double>{-3.0, -1.0}) == Nature::Maximum);
    CHECK(classify(std::vector<double>{-1.0, 1.0}) == Nature::Saddle);
    CHECK(classify(std::vector<double>{1e-9, 1.0}) == Nature::Degenerate);
    CHECK(classify(std::vector<double>{-1.0, 0.0, 1.0}) == Nature::Degenerate);
}

TEST_CASE("gradient vanishes at the stationary point and eigenpairs are correct") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + trial % 4;
        std::vector<double> coefs(TermBasis::second_order(k).term_count());
        for (auto& c : coefs) c = u(rng);
        const FittedModel m = model(TermBasis::second_order(k), coefs);
        const QuadraticForm q = QuadraticForm::from_model(m);
        const StationaryPoint s = stationary_point(m);
        for (std::size_t j = 0; j < s.eigenvalues.size(); ++j) {
            const auto v = s.eigenvectors.column(j);
            const auto bv = q.quadratic * std::span<const double>(v);
            for (int i = 0; i < k; ++i) CHECK(std::fabs(bv[i] - s.eigenvalues[j] * v[i]) <= 1e-10);
        }
        if (s.coded) CHECK(norm2(q.gradient(*s.coded)) <= 1e-8 * (1.0 + norm2(q.linear)));
    }
}

TEST_CASE("goal parsing") {
    CHECK(parse_goal("min") == Goal::Minimize);
    CHECK(parse_goal("maximize") == Goal::Maximize);
    CHECK_THROWS_AS(parse_goal("up"), Error);
}
