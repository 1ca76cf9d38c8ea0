#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rsmkit/fit.hpp"

namespace rsmkit {

struct Range {
    double min = -1.0;
    double max = 1.0;

    bool operator==(const Range&) const = default;
};

struct SurfaceGrid {
    std::size_t factor_x = 0;
    std::size_t factor_y = 1;
    std::vector<double> fixed_values;  // full coded point; x/y entries are overwritten per node
    std::size_t nx = 2;
    std::size_t ny = 2;
    Range x_range;
    Range y_range;
    std::vector<double> z;  // row-major, ny rows of nx values; row i is y_i

    [[nodiscard]] double x_at(std::size_t j) const noexcept;
    [[nodiscard]] double y_at(std::size_t i) const noexcept;
    [[nodiscard]] double at(std::size_t i, std::size_t j) const noexcept { return z[i * nx + j]; }

    bool operator==(const SurfaceGrid&) const = default;
};

// Plotting range: [-alpha, alpha] with axial points, otherwise [-1.25, 1.25].
Range default_range(std::optional<double> alpha);

SurfaceGrid evaluate_grid(const FittedModel& model, std::size_t factor_x, std::size_t factor_y,
                          std::span<const double> fixed_values, std::size_t nx, std::size_t ny, Range x_range,
                          Range y_range, std::optional<int> block = std::nullopt);

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

struct Polyline {
    std::vector<Point2> points;
    bool closed = false;  // closed loops repeat their first vertex at the end

    bool operator==(const Polyline&) const = default;
};

struct ContourSet {
    std::vector<double> levels;
    std::vector<std::vector<Polyline>> polylines;  // one list per level

    bool operator==(const ContourSet&) const = default;
};

// `count` levels equally spaced strictly between min z and max z.
std::vector<double> default_levels(const SurfaceGrid& grid, std::size_t count = 10);

// Marching squares with linear edge interpolation; ambiguous saddle cells
// are resolved by the cell-center average.
ContourSet contours(const SurfaceGrid& grid, std::span<const double> levels);

}  // namespace rsmkit
