#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rsmkit/design.hpp"
#include "rsmkit/error.hpp"
#include "rsmkit/fit.hpp"

using namespace rsmkit;

namespace {

std::vector<FactorSpec> factors(int k) {
    std::vector<FactorSpec> out;
    for (int i = 0; i < k; ++i) out.push_back({"x" + std::to_string(i + 1), -1.0, 1.0, ""});
    return out;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
    return out;
}

double generator(const std::vector<double>& x) {
    return 1 + 2 * x[0] - 3 * x[1] + 0.5 * x[0] * x[1] + x[0] * x[0] - 2 * x[1] * x[1];
}

}  // namespace

TEST_CASE("term basis parsing and naming") {
    const TermBasis b = TermBasis::parse(2, "fo,twi,pq,block");
    CHECK(b == TermBasis::second_order(2, true));
    CHECK(b.term_count() == 7);
    CHECK(TermBasis::parse(2, "so") == TermBasis::second_order(2));
    CHECK(TermBasis::parse(3, "twi") == TermBasis{3, true, true, false, false});
    CHECK(b.to_string() == "fo,twi,pq,block");
    const std::vector<std::string> names{"liquid", "pressure"};
    CHECK(term_names(b, names) ==
          std::vector<std::string>{"(Intercept)", "Block", "liquid", "pressure", "liquid:pressure", "liquid^2",
                                   "pressure^2"});
    CHECK(term_names(TermBasis::second_order(3), std::vector<std::string>{"a", "b", "c"}) ==
          std::vector<std::string>{"(Intercept)", "a", "b", "c", "a:b", "a:c", "b:c", "a^2", "b^2", "c^2"});
    CHECK_THROWS_AS(TermBasis::parse(2, "fo,cubic"), Error);
}

TEST_CASE("model matrix rows") {
    const TermBasis full = TermBasis::second_order(2);
    CHECK(expand_point(full, std::vector<double>{0, 0}) == std::vector<double>{1, 0, 0, 0, 0, 0});
    const TermBasis twi = TermBasis::parse(2, "fo,twi");
    CHECK(expand_point(twi, std::vector<double>{1, -1}) == std::vector<double>{1, 1, -1, -1});
    const TermBasis blocked = TermBasis::second_order(2, true);
    CHECK(expand_point(blocked, std::vector<double>{1, 1}, 1) == std::vector<double>{1, -1, 1, 1, 1, 1, 1});
    CHECK(expand_point(blocked, std::vector<double>{1, 1}, 2) == std::vector<double>{1, 1, 1, 1, 1, 1, 1});
    CHECK(expand_point(blocked, std::vector<double>{1, 1}) == std::vector<double>{1, 0, 1, 1, 1, 1, 1});

    const Design d = ccd(factors(2), AlphaRule::rotatable(), 2, 1, 2, 3);
    const Matrix m = model_matrix(d, blocked);
    CHECK(m.rows() == d.size());
    CHECK(m.cols() == 7);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& x = d.points[i].coded;
        CHECK(m(i, 1) == (d.points[i].block == 1 ? -1.0 : 1.0));
        CHECK(m(i, 4) == x[0] * x[1]);
        CHECK(m(i, 5) == x[0] * x[0]);
    }
}

TEST_CASE("noiseless second-order responses are recovered exactly") {
    const Design d = ccd(factors(2), AlphaRule::rotatable(), 3, 1, 1, 1);
    std::vector<double> y;
    for (const auto& p : d.points) y.push_back(generator(p.coded));
    const FittedModel m = fit(d, y, TermBasis::second_order(2));
    const std::vector<double> truth{1, 2, -3, 0.5, 1, -2};
    const auto expected = oracle::normal_equations(rows_of(model_matrix(d, m.basis)), y);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        CHECK(std::fabs(m.coefficients[i] - truth[i]) <= 1e-9);
        CHECK(std::fabs(m.coefficients[i] - expected[i]) <= 1e-9);
    }
    CHECK(predict(m, std::vector<double>{1, 1}) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(predict(m, std::vector<double>{0, 0}) == doctest::Approx(m.coefficients[0]));
    CHECK(m.r_squared == doctest::Approx(1.0));
}

TEST_CASE("constant responses") {
    const Design d = ccd(factors(3), AlphaRule::face(), 2, 1, 1, 1);
    const std::vector<double> y(d.size(), 4.25);
    const FittedModel m = fit(d, y, TermBasis::second_order(3));
    CHECK(m.coefficients[0] == doctest::Approx(4.25).epsilon(1e-14));
    for (std::size_t i = 1; i < m.coefficients.size(); ++i) CHECK(std::fabs(m.coefficients[i]) <= 1e-13);
    for (double r : m.residuals) CHECK(std::fabs(r) <= 1e-13);
    CHECK(m.r_squared == 1.0);
    CHECK(m.ss_total == 0.0);
}

TEST_CASE("intercept-only model predicts beta0 everywhere") {
    const Design d = ccd(factors(2), AlphaRule::face(), 1, 1, 1, 1);
    std::vector<double> y(d.size(), 3.0);
    FittedModel m = fit(d, y, TermBasis::first_order(2));
    m.coefficients = {7.0, 0.0, 0.0};
    CHECK(predict(m, std::vector<double>{0.3, -2.0}) == 7.0);
}

TEST_CASE("pure 2^2 factorial cannot support quadratic terms") {
    const Design d = full_factorial(2);
    const std::vector<double> y{1, 2, 3, 4};
    try {
        fit(d, y, TermBasis::second_order(2));
        FAIL("expected RankDeficient");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
        CHECK(e.detail() == std::vector<std::string>{"x1^2", "x2^2"});
    }
}

TEST_CASE("inestimable terms agree with the rank oracle") {
    const Design d = ccd(factors(2), AlphaRule::none(), 1, 1, 1, 1);
    const TermBasis basis = TermBasis::second_order(2);
    const auto dep = oracle::dependent_columns(rows_of(model_matrix(d, basis)));
    const auto names = term_names(basis, std::vector<std::string>{"x1", "x2"});
    std::vector<std::string> expected;
    for (auto c : dep) expected.push_back(names[c]);
    REQUIRE(expected.size() == 1);
    const std::vector<double> y{1, 2, 3, 4, 5};
    try {
        fit(d, y, basis);
        FAIL("expected RankDeficient");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
        CHECK(e.detail() == expected);
    }
}

TEST_CASE("input validation") {
    const Design d = full_factorial(2);
    CHECK_THROWS_WITH_AS(fit(d, std::vector<double>{1, 2, 3}, TermBasis::first_order(2)), doctest::Contains("3"),
                         Error);
    try {
        fit(d, std::vector<double>{1, 2, NAN, 4}, TermBasis::first_order(2));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteResponse);
    }
    try {
        fit(d, std::vector<double>{1, 2}, TermBasis::first_order(2));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LengthMismatch);
    }
    const FittedModel m = fit(d, std::vector<double>{1, 2, 3, 5}, TermBasis::first_order(2));
    try {
        predict(m, std::vector<double>{1, 2, 3});
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("residuals are orthogonal to the model matrix") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int trial = 0; trial < 25; ++trial) {
        const Design d = ccd(factors(3), AlphaRule::rotatable(), 3, 1, 2, static_cast<std::uint64_t>(trial));
        std::vector<double> y(d.size());
        for (auto& v : y) v = 10 + g(rng);
        const TermBasis basis = TermBasis::second_order(3, true);
        const FittedModel m = fit(d, y, basis);
        const Matrix mm = model_matrix(d, basis);
        const double ny = norm2(y);
        for (std::size_t c = 0; c < mm.cols(); ++c) CHECK(std::fabs(dot(mm.column(c), m.residuals)) <= 1e-8 * ny);
        CHECK(m.df_residual == static_cast<int>(d.size() - basis.term_count()));
    }
}

TEST_CASE("standard errors equal sigma times the root of the inverse Gram diagonal") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    const Design d = ccd(factors(2), AlphaRule::rotatable(), 5, 1, 1, 2);
    std::vector<double> y(d.size());
    for (auto& v : y) v = g(rng);
    const FittedModel m = fit(d, y, TermBasis::second_order(2));
    const auto rows = rows_of(model_matrix(d, m.basis));
    const std::size_t p = m.coefficients.size();
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<std::vector<double>> gram(p, std::vector<double>(p, 0.0));
        for (const auto& r : rows)
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b < p; ++b) gram[a][b] += r[a] * r[b];
        std::vector<double> e(p, 0.0);
        e[j] = 1.0;
        // least squares on the square Gram matrix is G⁻¹e
        const auto col = oracle::normal_equations(gram, e);
        CHECK(m.std_errors[j] == doctest::Approx(std::sqrt(m.sigma2 * col[j])).epsilon(1e-9));
    }
}

TEST_CASE("permuting runs together with responses leaves coefficients unchanged") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    Design d = ccd(factors(3), AlphaRule::rotatable(), 4, 1, 2, 1);
    std::vector<double> y(d.size());
    for (auto& v : y) v = g(rng);
    const TermBasis basis = TermBasis::second_order(3, true);
    const FittedModel a = fit(d, y, basis);
    std::vector<std::size_t> idx(d.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    Design shuffled = d;
    std::vector<double> ys(y.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        shuffled.points[i] = d.points[idx[i]];
        ys[i] = y[idx[i]];
    }
    const FittedModel b = fit(shuffled, ys, basis);
    for (std::size_t i = 0; i < a.coefficients.size(); ++i)
        CHECK(std::fabs(a.coefficients[i] - b.coefficients[i]) <= 1e-12);
}

TEST_CASE("adding terms never increases the residual sum of squares") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    const std::vector<std::string> chain{"fo", "fo,block", "fo,twi,block", "fo,twi,pq,block"};
    for (int trial = 0; trial < 30; ++trial) {
        const Design d = ccd(factors(2), AlphaRule::rotatable(), 3, 2, 2, static_cast<std::uint64_t>(trial));
        std::vector<double> y(d.size());
        for (auto& v : y) v = 5 + g(rng);
        double prev = INFINITY;
        for (const auto& terms : chain) {
            const double ss = fit(d, y, TermBasis::parse(2, terms)).ss_residual;
            CHECK(ss <= prev * (1 + 1e-10));
            prev = ss;
        }
    }
}

TEST_CASE("prediction through natural units matches the coded prediction") {
    const std::vector<FactorSpec> f{{"liquid", 0.2, 0.4, "%"}, {"pressure", 150, 200, "kPa"}};
    const Design d = ccd(f, AlphaRule::rotatable(), 3, 1, 1, 1);
    std::vector<double> y;
    for (const auto& p : d.points) y.push_back(generator(p.coded));
    const FittedModel m = fit(d, y, TermBasis::second_order(2));
    const std::vector<double> coded{0.3, -0.7};
    const auto natural = to_natural(f, coded);
    const auto back = to_coded(f, natural);
    CHECK(predict(m, back) == doctest::Approx(predict(m, coded)).epsilon(1e-14));
}

TEST_CASE("block contrast coding") {
    CHECK(block_contrast(1) == -1.0);
    CHECK(block_contrast(2) == 1.0);
}
