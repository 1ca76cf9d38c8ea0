#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rsmkit/error.hpp"
#include "rsmkit/fit.hpp"
#include "rsmkit/optimize.hpp"
#include "rsmkit/surface.hpp"

using namespace rsmkit;

namespace {

FittedModel model(const TermBasis& basis, std::vector<double> coefficients) {
    FittedModel m;
    m.basis = basis;
    for (int i = 0; i < basis.k; ++i) m.factor_names.push_back("x" + std::to_string(i + 1));
    m.term_names = term_names(basis, m.factor_names);
    m.coefficients = std::move(coefficients);
    m.std_errors.assign(m.coefficients.size(), 0.0);
    return m;
}

FittedModel paraboloid() { return model(TermBasis::second_order(2), {0, 0, 0, 0, 1, 1}); }

SurfaceGrid grid_of(const FittedModel& m, std::size_t n, double half) {
    const std::vector<double> fixed(m.basis.k, 0.0);
    return evaluate_grid(m, 0, 1, fixed, n, n, {-half, half}, {-half, half});
}

// Bilinear interpolation of the grid at (x, y).
double interpolate(const SurfaceGrid& g, double x, double y) {
    const double fx = (x - g.x_range.min) / (g.x_range.max - g.x_range.min) * static_cast<double>(g.nx - 1);
    const double fy = (y - g.y_range.min) / (g.y_range.max - g.y_range.min) * static_cast<double>(g.ny - 1);
    const auto j = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(fx))), g.nx - 2);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(fy))), g.ny - 2);
    const double tx = fx - static_cast<double>(j);
    const double ty = fy - static_cast<double>(i);
    return (1 - tx) * (1 - ty) * g.at(i, j) + tx * (1 - ty) * g.at(i, j + 1) + (1 - tx) * ty * g.at(i + 1, j) +
           tx * ty * g.at(i + 1, j + 1);
}

}  // namespace

TEST_CASE("constant and linear grids") {
    const SurfaceGrid c = grid_of(model(TermBasis::first_order(2), {7, 0, 0}), 4, 1.0);
    for (double z : c.z) CHECK(z == 7.0);

    const std::vector<double> fixed{0.0, 0.0};
    const SurfaceGrid lin = evaluate_grid(model(TermBasis::first_order(2), {0, 1, 0}), 0, 1, fixed, 3, 3,
                                          {-1, 1}, {-1, 1});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(lin.at(i, 0) == -1.0);
        CHECK(lin.at(i, 1) == 0.0);
        CHECK(lin.at(i, 2) == 1.0);
    }
}

TEST_CASE("paraboloid corners and center") {
    const SurfaceGrid g = grid_of(paraboloid(), 5, 1.0);
    CHECK(g.at(0, 0) == 2.0);
    CHECK(g.at(4, 4) == 2.0);
    CHECK(g.at(0, 4) == 2.0);
    CHECK(g.at(2, 2) == 0.0);
}

TEST_CASE("grid nodes equal predictions exactly") {
    const FittedModel m = model(TermBasis::second_order(3), {1, 0.3, -2, 0.7, 0.1, -0.4, 0.9, 1.1, -0.6, 0.2});
    const std::vector<double> fixed{0.0, 0.0, 0.5};
    const SurfaceGrid g = evaluate_grid(m, 2, 0, fixed, 7, 5, {-1.5, 1.5}, {-1, 2});
    for (std::size_t i = 0; i < g.ny; ++i)
        for (std::size_t j = 0; j < g.nx; ++j) {
            std::vector<double> x = fixed;
            x[2] = g.x_at(j);
            x[0] = g.y_at(i);
            CHECK(g.at(i, j) == predict(m, x));
        }
}

TEST_CASE("grid argument validation") {
    const FittedModel m = paraboloid();
    const std::vector<double> fixed{0.0, 0.0};
    auto code_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Internal;
    };
    CHECK(code_of([&] { evaluate_grid(m, 0, 0, fixed, 5, 5, {-1, 1}, {-1, 1}); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { evaluate_grid(m, 0, 2, fixed, 5, 5, {-1, 1}, {-1, 1}); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { evaluate_grid(m, 0, 1, std::vector<double>{0.0}, 5, 5, {-1, 1}, {-1, 1}); }) ==
          ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { evaluate_grid(m, 0, 1, fixed, 1, 5, {-1, 1}, {-1, 1}); }) == ErrorCode::InvalidRange);
    CHECK(code_of([&] { evaluate_grid(m, 0, 1, fixed, 5, 5, {1, 1}, {-1, 1}); }) == ErrorCode::InvalidRange);
    CHECK(code_of([&] { evaluate_grid(m, 0, 1, fixed, 5, 5, {-1, INFINITY}, {-1, 1}); }) == ErrorCode::InvalidRange);
}

TEST_CASE("default ranges and levels") {
    CHECK(default_range(std::nullopt) == Range{-1.25, 1.25});
    CHECK(default_range(std::sqrt(2.0)) == Range{-std::sqrt(2.0), std::sqrt(2.0)});
    const SurfaceGrid g = grid_of(paraboloid(), 11, 1.0);
    const auto levels = default_levels(g, 10);
    REQUIRE(levels.size() == 10);
    CHECK(std::is_sorted(levels.begin(), levels.end()));
    CHECK(levels.front() > 0.0);
    CHECK(levels.back() < 2.0);
}

TEST_CASE("unit circle contour of the paraboloid") {
    const SurfaceGrid g = grid_of(paraboloid(), 201, 1.5);
    const std::vector<double> levels{1.0};
    const ContourSet cs = contours(g, levels);
    REQUIRE(cs.polylines.size() == 1);
    REQUIRE(cs.polylines[0].size() == 1);
    const Polyline& line = cs.polylines[0][0];
    CHECK(line.closed);
    CHECK(line.points.front() == line.points.back());
    CHECK(line.points.size() > 100);
    for (const auto& p : line.points) CHECK(std::fabs(std::hypot(p.x, p.y) - 1.0) <= 0.01);
}

TEST_CASE("levels outside the data give nothing") {
    const SurfaceGrid g = grid_of(paraboloid(), 21, 1.0);
    const std::vector<double> levels{-1.0, 2.5};
    const ContourSet cs = contours(g, levels);
    CHECK(cs.polylines[0].empty());
    CHECK(cs.polylines[1].empty());
}

TEST_CASE("planar surface: straight contour at x1 = 0") {
    const SurfaceGrid g = grid_of(model(TermBasis::first_order(2), {0, 1, 0}), 21, 1.0);
    const std::vector<double> levels{0.0};
    const ContourSet cs = contours(g, levels);
    REQUIRE(cs.polylines[0].size() == 1);
    const double cell = 2.0 / 20.0;
    for (const auto& p : cs.polylines[0][0].points) CHECK(std::fabs(p.x) <= cell);
}

TEST_CASE("vertices stay in the box and on their level") {
    const FittedModel m = model(TermBasis::second_order(2), {0.5, 1.0, -0.5, 2.0, -1.0, 0.7});
    const SurfaceGrid g = grid_of(m, 41, 1.4);
    const auto levels = default_levels(g, 12);
    const ContourSet cs = contours(g, levels);
    double zmax = *std::max_element(g.z.begin(), g.z.end());
    double zmin = *std::min_element(g.z.begin(), g.z.end());
    for (std::size_t l = 0; l < levels.size(); ++l) {
        CHECK_FALSE(cs.polylines[l].empty());
        for (const auto& line : cs.polylines[l]) {
            CHECK(line.points.size() >= 2);
            for (const auto& p : line.points) {
                CHECK(p.x >= -1.4 - 1e-12);
                CHECK(p.x <= 1.4 + 1e-12);
                CHECK(p.y >= -1.4 - 1e-12);
                CHECK(p.y <= 1.4 + 1e-12);
                // vertices sit on cell edges, where bilinear interpolation is linear
                CHECK(std::fabs(interpolate(g, p.x, p.y) - levels[l]) <= 1e-9 * (zmax - zmin));
            }
        }
    }
}

TEST_CASE("every segment crosses between straddling grid nodes") {
    const FittedModel m = model(TermBasis::second_order(2), {0.0, 0.3, 0.2, 1.5, 1.0, -1.0});
    const SurfaceGrid g = grid_of(m, 31, 1.0);
    const auto levels = default_levels(g, 8);
    const ContourSet cs = contours(g, levels);
    const double hx = 2.0 / 30.0;
    for (std::size_t l = 0; l < levels.size(); ++l)
        for (const auto& line : cs.polylines[l])
            for (const auto& p : line.points) {
                // locate the cell edge this vertex lies on and check its endpoints straddle
                const double fx = (p.x + 1.0) / hx;
                const double fy = (p.y + 1.0) / hx;
                const bool on_vertical = std::fabs(fx - std::round(fx)) < 1e-6;
                std::size_t i0, j0, i1, j1;
                if (on_vertical) {
                    j0 = j1 = static_cast<std::size_t>(std::lround(fx));
                    i0 = std::min<std::size_t>(static_cast<std::size_t>(std::floor(fy)), g.ny - 2);
                    i1 = i0 + 1;
                } else {
                    i0 = i1 = static_cast<std::size_t>(std::lround(fy));
                    j0 = std::min<std::size_t>(static_cast<std::size_t>(std::floor(fx)), g.nx - 2);
                    j1 = j0 + 1;
                }
                const double a = g.at(i0, j0) - levels[l];
                const double b = g.at(i1, j1) - levels[l];
                CHECK(a * b <= 0.0);
            }
}

TEST_CASE("first-order contours are straight and perpendicular to the path") {
    const FittedModel m = model(TermBasis::first_order(2), {50.0, -3.0, 4.0});
    const SurfaceGrid g = grid_of(m, 51, 1.25);
    const ContourSet cs = contours(g, default_levels(g, 10));
    const std::vector<double> radii{1.0};
    const auto step = steepest_path(m, Goal::Minimize, radii).steps[0].coded;
    const double dn = norm2(step);
    for (const auto& lines : cs.polylines)
        for (const auto& line : lines) {
            const Point2 a = line.points.front();
            const Point2 b = line.points.back();
            const double len = std::hypot(b.x - a.x, b.y - a.y);
            REQUIRE(len > 0.0);
            const double ux = (b.x - a.x) / len;
            const double uy = (b.y - a.y) / len;
            CHECK(std::fabs(ux * step[0] + uy * step[1]) / dn <= 1e-9);
            for (const auto& p : line.points) CHECK(std::fabs((p.x - a.x) * uy - (p.y - a.y) * ux) <= 1e-6);
        }
}

TEST_CASE("refining the grid moves contours by at most one coarse cell") {
    const FittedModel m = model(TermBasis::second_order(2), {0.0, 0.5, -0.2, 0.8, 1.0, 0.6});
    const SurfaceGrid coarse = grid_of(m, 21, 1.0);
    const SurfaceGrid fine = grid_of(m, 41, 1.0);
    const auto levels = default_levels(coarse, 6);
    const ContourSet a = contours(coarse, levels);
    const ContourSet b = contours(fine, levels);
    const double cell = 2.0 / 20.0;
    auto directed = [](const std::vector<Polyline>& from, const std::vector<Polyline>& to) {
        double worst = 0.0;
        for (const auto& l : from)
            for (const auto& p : l.points) {
                double best = INFINITY;
                for (const auto& m2 : to)
                    for (const auto& q : m2.points) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
                worst = std::max(worst, best);
            }
        return worst;
    };
    for (std::size_t l = 0; l < levels.size(); ++l) {
        CHECK(directed(a.polylines[l], b.polylines[l]) <= cell);
        CHECK(directed(b.polylines[l], a.polylines[l]) <= cell);
    }
}

TEST_CASE("saddle cells are resolved consistently") {
    // z = x*y has a saddle at the origin; the zero level lies along the axes
    const FittedModel m = model(TermBasis::parse(2, "fo,twi"), {0.0, 0.0, 0.0, 1.0});
    const SurfaceGrid g = grid_of(m, 4, 1.0);  // no node on the axes
    const std::vector<double> levels{0.05, -0.05};
    const ContourSet cs = contours(g, levels);
    for (const auto& lines : cs.polylines) {
        CHECK(lines.size() == 2);
        for (const auto& line : lines) CHECK_FALSE(line.closed);
    }
}
