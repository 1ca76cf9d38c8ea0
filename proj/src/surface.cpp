#include "rsmkit/surface.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "rsmkit/error.hpp"

namespace rsmkit {

namespace {

constexpr double kWeldTolerance = 1e-9;

bool near(const Point2& a, const Point2& b) {
    return std::fabs(a.x - b.x) <= kWeldTolerance && std::fabs(a.y - b.y) <= kWeldTolerance;
}

void check_range(const Range& r, const char* axis) {
    if (!std::isfinite(r.min) || !std::isfinite(r.max) || !(r.min < r.max))
        throw Error(ErrorCode::InvalidRange, std::string(axis) + " range must be finite with min < max");
}

// Cell edges: 0 bottom, 1 right, 2 top, 3 left. Each case lists edge pairs.
struct CaseSegments {
    int count;
    int edges[2][2];
};

constexpr CaseSegments kCases[16] = {
    {0, {{0, 0}, {0, 0}}},  // 0
    {1, {{3, 0}, {0, 0}}},  // 1
    {1, {{0, 1}, {0, 0}}},  // 2
    {1, {{3, 1}, {0, 0}}},  // 3
    {1, {{1, 2}, {0, 0}}},  // 4
    {2, {{3, 0}, {1, 2}}},  // 5, center below
    {1, {{0, 2}, {0, 0}}},  // 6
    {1, {{2, 3}, {0, 0}}},  // 7
    {1, {{2, 3}, {0, 0}}},  // 8
    {1, {{0, 2}, {0, 0}}},  // 9
    {2, {{0, 1}, {2, 3}}},  // 10, center below
    {1, {{1, 2}, {0, 0}}},  // 11
    {1, {{1, 3}, {0, 0}}},  // 12
    {1, {{0, 1}, {0, 0}}},  // 13
    {1, {{3, 0}, {0, 0}}},  // 14
    {0, {{0, 0}, {0, 0}}},  // 15
};
constexpr CaseSegments kCase5CenterAbove = {2, {{0, 1}, {2, 3}}};
constexpr CaseSegments kCase10CenterAbove = {2, {{3, 0}, {1, 2}}};

class LevelTracer {
public:
    LevelTracer(const SurfaceGrid& g, double level) : g_(g), level_(level) {}

    std::vector<Polyline> trace() {
        collect_segments();
        auto lines = chain();
        return weld(std::move(lines));
    }

private:
    using EdgeId = std::size_t;

    EdgeId horizontal(std::size_t i, std::size_t j) const { return 2 * (i * g_.nx + j); }
    EdgeId vertical(std::size_t i, std::size_t j) const { return 2 * (i * g_.nx + j) + 1; }

    Point2 edge_point(EdgeId id) {
        if (auto it = points_.find(id); it != points_.end()) return it->second;
        const std::size_t node = id / 2;
        const std::size_t i = node / g_.nx;
        const std::size_t j = node % g_.nx;
        const bool is_vertical = (id % 2) == 1;
        const std::size_t i2 = is_vertical ? i + 1 : i;
        const std::size_t j2 = is_vertical ? j : j + 1;
        const double za = g_.at(i, j);
        const double zb = g_.at(i2, j2);
        const double t = std::clamp((level_ - za) / (zb - za), 0.0, 1.0);
        Point2 p;
        if (is_vertical) {
            p.x = g_.x_at(j);
            p.y = g_.y_at(i) + t * (g_.y_at(i2) - g_.y_at(i));
        } else {
            p.x = g_.x_at(j) + t * (g_.x_at(j2) - g_.x_at(j));
            p.y = g_.y_at(i);
        }
        points_.emplace(id, p);
        return p;
    }

    void collect_segments() {
        for (std::size_t i = 0; i + 1 < g_.ny; ++i) {
            for (std::size_t j = 0; j + 1 < g_.nx; ++j) {
                const double c0 = g_.at(i, j);
                const double c1 = g_.at(i, j + 1);
                const double c2 = g_.at(i + 1, j + 1);
                const double c3 = g_.at(i + 1, j);
                const int index = (c0 > level_ ? 1 : 0) | (c1 > level_ ? 2 : 0) | (c2 > level_ ? 4 : 0) |
                                  (c3 > level_ ? 8 : 0);
                CaseSegments cs = kCases[index];
                if (index == 5 || index == 10) {
                    const bool center_above = 0.25 * (c0 + c1 + c2 + c3) > level_;
                    if (center_above) cs = index == 5 ? kCase5CenterAbove : kCase10CenterAbove;
                }
                const EdgeId edges[4] = {horizontal(i, j), vertical(i, j + 1), horizontal(i + 1, j), vertical(i, j)};
                for (int s = 0; s < cs.count; ++s)
                    add_segment(edges[cs.edges[s][0]], edges[cs.edges[s][1]]);
            }
        }
    }

    void add_segment(EdgeId a, EdgeId b) {
        const std::size_t idx = segments_.size();
        segments_.push_back({a, b});
        by_edge_[a].push_back(idx);
        by_edge_[b].push_back(idx);
    }

    // Next unused segment touching `edge`, or npos.
    std::size_t next_segment(EdgeId edge, const std::vector<bool>& used) const {
        const auto it = by_edge_.find(edge);
        if (it == by_edge_.end()) return static_cast<std::size_t>(-1);
        for (auto s : it->second)
            if (!used[s]) return s;
        return static_cast<std::size_t>(-1);
    }

    std::vector<Polyline> chain() {
        std::vector<bool> used(segments_.size(), false);
        std::vector<Polyline> out;
        for (std::size_t start = 0; start < segments_.size(); ++start) {
            if (used[start]) continue;
            used[start] = true;
            std::vector<EdgeId> forward{segments_[start].first, segments_[start].second};
            for (;;) {
                const auto s = next_segment(forward.back(), used);
                if (s == static_cast<std::size_t>(-1)) break;
                used[s] = true;
                forward.push_back(segments_[s].first == forward.back() ? segments_[s].second : segments_[s].first);
            }
            std::vector<EdgeId> backward;
            EdgeId tail = forward.front();
            for (;;) {
                const auto s = next_segment(tail, used);
                if (s == static_cast<std::size_t>(-1)) break;
                used[s] = true;
                tail = segments_[s].first == tail ? segments_[s].second : segments_[s].first;
                backward.push_back(tail);
            }
            std::vector<EdgeId> ids(backward.rbegin(), backward.rend());
            ids.insert(ids.end(), forward.begin(), forward.end());

            Polyline line;
            for (EdgeId id : ids) {
                const Point2 p = edge_point(id);
                if (line.points.empty() || !near(line.points.back(), p)) line.points.push_back(p);
            }
            out.push_back(std::move(line));
        }
        return out;
    }

    static std::vector<Polyline> weld(std::vector<Polyline> lines) {
        bool merged = true;
        while (merged) {
            merged = false;
            for (std::size_t a = 0; a < lines.size() && !merged; ++a) {
                auto& la = lines[a].points;
                if (la.size() < 2 || near(la.front(), la.back())) continue;
                for (std::size_t b = a + 1; b < lines.size() && !merged; ++b) {
                    auto& lb = lines[b].points;
                    if (lb.size() < 2 || near(lb.front(), lb.back())) continue;
                    if (near(la.back(), lb.front())) {
                        la.insert(la.end(), lb.begin() + 1, lb.end());
                    } else if (near(la.back(), lb.back())) {
                        la.insert(la.end(), lb.rbegin() + 1, lb.rend());
                    } else if (near(la.front(), lb.back())) {
                        lb.insert(lb.end(), la.begin() + 1, la.end());
                        la.swap(lb);
                    } else if (near(la.front(), lb.front())) {
                        std::reverse(la.begin(), la.end());
                        la.insert(la.end(), lb.begin() + 1, lb.end());
                    } else {
                        continue;
                    }
                    lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(b));
                    merged = true;
                }
            }
        }
        std::vector<Polyline> out;
        for (auto& line : lines) {
            auto& pts = line.points;
            if (pts.size() < 2) continue;
            if (pts.size() >= 4 && near(pts.front(), pts.back())) {
                pts.back() = pts.front();
                line.closed = true;
            }
            out.push_back(std::move(line));
        }
        return out;
    }

    const SurfaceGrid& g_;
    double level_;
    std::vector<std::pair<EdgeId, EdgeId>> segments_;
    std::unordered_map<EdgeId, std::vector<std::size_t>> by_edge_;
    std::unordered_map<EdgeId, Point2> points_;
};

}  // namespace

double SurfaceGrid::x_at(std::size_t j) const noexcept {
    if (j + 1 == nx) return x_range.max;
    return x_range.min + static_cast<double>(j) * (x_range.max - x_range.min) / static_cast<double>(nx - 1);
}

double SurfaceGrid::y_at(std::size_t i) const noexcept {
    if (i + 1 == ny) return y_range.max;
    return y_range.min + static_cast<double>(i) * (y_range.max - y_range.min) / static_cast<double>(ny - 1);
}

Range default_range(std::optional<double> alpha) {
    if (alpha) return {-*alpha, *alpha};
    return {-1.25, 1.25};
}

SurfaceGrid evaluate_grid(const FittedModel& model, std::size_t factor_x, std::size_t factor_y,
                          std::span<const double> fixed_values, std::size_t nx, std::size_t ny, Range x_range,
                          Range y_range, std::optional<int> block) {
    const auto k = static_cast<std::size_t>(model.basis.k);
    if (factor_x >= k || factor_y >= k || factor_x == factor_y)
        throw Error(ErrorCode::DimensionMismatch, "surface axes must be two distinct factors of the model");
    if (fixed_values.size() != k)
        throw Error(ErrorCode::DimensionMismatch, "fixed values need one coded value per factor");
    if (nx < 2 || ny < 2) throw Error(ErrorCode::InvalidRange, "grid needs at least 2 nodes per axis");
    check_range(x_range, "x");
    check_range(y_range, "y");

    SurfaceGrid g;
    g.factor_x = factor_x;
    g.factor_y = factor_y;
    g.fixed_values.assign(fixed_values.begin(), fixed_values.end());
    g.nx = nx;
    g.ny = ny;
    g.x_range = x_range;
    g.y_range = y_range;
    g.z.resize(nx * ny);
    std::vector<double> point(fixed_values.begin(), fixed_values.end());
    for (std::size_t i = 0; i < ny; ++i) {
        point[factor_y] = g.y_at(i);
        for (std::size_t j = 0; j < nx; ++j) {
            point[factor_x] = g.x_at(j);
            g.z[i * nx + j] = predict(model, point, block);
        }
    }
    return g;
}

std::vector<double> default_levels(const SurfaceGrid& grid, std::size_t count) {
    if (grid.z.empty() || count == 0) return {};
    const auto [lo, hi] = std::minmax_element(grid.z.begin(), grid.z.end());
    if (!(*hi > *lo)) return {};
    std::vector<double> levels;
    for (std::size_t i = 1; i <= count; ++i)
        levels.push_back(*lo + static_cast<double>(i) * (*hi - *lo) / static_cast<double>(count + 1));
    return levels;
}

ContourSet contours(const SurfaceGrid& grid, std::span<const double> levels) {
    ContourSet set;
    set.levels.assign(levels.begin(), levels.end());
    for (double l : set.levels)
        if (!std::isfinite(l)) throw Error(ErrorCode::NonFiniteInput, "contour levels must be finite");
    std::sort(set.levels.begin(), set.levels.end());
    for (double level : set.levels) set.polylines.push_back(LevelTracer(grid, level).trace());
    return set;
}

}  // namespace rsmkit
