#pragma once

// Level sets of the objective ("trifocal ellipses"). Contours come from
// marching squares with every crossing refined onto the level. Region area
// and perimeter carry a two-resolution error estimate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "trifocal/error.hpp"
#include "trifocal/fermat.hpp"
#include "trifocal/geometry.hpp"

namespace trifocal {

/// LHS - RHS of 64 S^2 Q1 Q2 Q3 = ((S^2 + Q3 - Q2 - Q1)^2 - 4 Q1 Q2 - 4 S^2 Q3)^2,
/// obtained by squaring R_A + R_B + R_C = S three times. Unit weights only; the
/// weights stored in foci are ignored.
inline double implicit_residual(Point2 m, const FocusTriple& foci, double s) noexcept {
    const auto d = evaluate_distances(m, foci);
    const double q1 = d.q[0], q2 = d.q[1], q3 = d.q[2];
    const double s2 = s * s;
    const double inner = (s2 + q3 - q2 - q1) * (s2 + q3 - q2 - q1) - 4.0 * q1 * q2 - 4.0 * s2 * q3;
    return 64.0 * s2 * q1 * q2 * q3 - inner * inner;
}

enum class LevelClass { empty, single_point, curve };

inline std::string to_string(LevelClass c) {
    switch (c) {
        case LevelClass::empty: return "empty";
        case LevelClass::single_point: return "single-point";
        case LevelClass::curve: return "curve";
    }
    return "unknown";
}

struct LevelParameter {
    double s = 0.0;
    double s0 = 0.0;
};

inline double level_epsilon(double s0) noexcept { return 1e-9 * std::max(1.0, s0); }

inline LevelClass classify_level(const LevelParameter& lp) {
    if (!(lp.s0 >= 0.0)) throw InvalidArgument("s0 must be non-negative");
    const double eps = level_epsilon(lp.s0);
    if (lp.s < lp.s0 - eps) return LevelClass::empty;
    if (std::abs(lp.s - lp.s0) <= eps) return LevelClass::single_point;
    return LevelClass::curve;
}

/// Axis-aligned sampling rectangle with `resolution` grid nodes per axis.
class GraphicBox {
public:
    GraphicBox(Point2 min_corner, Point2 max_corner, int resolution = 256)
        : min_(min_corner), max_(max_corner), resolution_(resolution) {
        if (!min_corner.finite() || !max_corner.finite()) throw InvalidArgument("box corners must be finite");
        if (!(max_corner.x > min_corner.x) || !(max_corner.y > min_corner.y))
            throw InvalidArgument("box max corner must exceed min corner in both coordinates");
        if (resolution < 2) throw InvalidArgument("box resolution must be at least 2");
    }

    Point2 min_corner() const noexcept { return min_; }
    Point2 max_corner() const noexcept { return max_; }
    int resolution() const noexcept { return resolution_; }
    GraphicBox with_resolution(int n) const { return GraphicBox(min_, max_, n); }

    double step_x() const noexcept { return (max_.x - min_.x) / (resolution_ - 1); }
    double step_y() const noexcept { return (max_.y - min_.y) / (resolution_ - 1); }

    /// Node (i, j); i runs along x, j along y. The last node lands exactly on the max corner.
    Point2 node(int i, int j) const noexcept {
        const int last = resolution_ - 1;
        const double x = i == last ? max_.x : min_.x + (max_.x - min_.x) * (static_cast<double>(i) / last);
        const double y = j == last ? max_.y : min_.y + (max_.y - min_.y) * (static_cast<double>(j) / last);
        return {x, y};
    }

    bool contains(Point2 p) const noexcept { return p.x >= min_.x && p.x <= max_.x && p.y >= min_.y && p.y <= max_.y; }

private:
    Point2 min_;
    Point2 max_;
    int resolution_;
};

struct LevelCurve {
    std::vector<Point2> vertices;
    bool closed = false;
    double refine_tol = 0.0;
};

struct RegionMetrics {
    double area = 0.0;
    double perimeter = 0.0;
    double area_error = 0.0;
    double perimeter_error = 0.0;
    double grid_step = 0.0;
};

/// Objective values at every node of a box, row-major (index j * n + i).
struct FieldSample {
    GraphicBox box;
    std::vector<double> values;
    Point2 min_point;
    double min_value = 0.0;
    Point2 max_point;
    double max_value = 0.0;

    double at(int i, int j) const { return values[static_cast<std::size_t>(j) * box.resolution() + i]; }
};

// ---------------------------------------------------------------------------
// Polyline utilities

/// Signed shoelace area; positive for counter-clockwise vertex order.
inline double signed_area(const std::vector<Point2>& ring) noexcept {
    if (ring.size() < 3) return 0.0;
    const Point2 o = ring.front();
    double twice = 0.0;
    for (std::size_t k = 1; k + 1 < ring.size(); ++k) twice += cross(ring[k] - o, ring[k + 1] - o);
    return 0.5 * twice;
}

inline double curve_length(const LevelCurve& c) noexcept {
    double len = 0.0;
    for (std::size_t k = 1; k < c.vertices.size(); ++k) len += norm(c.vertices[k] - c.vertices[k - 1]);
    if (c.closed && c.vertices.size() > 1) len += norm(c.vertices.front() - c.vertices.back());
    return len;
}

/// Even-odd point-in-polygon test; points on the boundary may go either way.
inline bool point_in_polygon(Point2 p, const std::vector<Point2>& ring) noexcept {
    bool inside = false;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const Point2 a = ring[i], b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

// ---------------------------------------------------------------------------
// Grid sampling and marching squares

template <class Field>
std::vector<double> sample_grid(const Field& field, const GraphicBox& box) {
    const int n = box.resolution();
    std::vector<double> values(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(j) * n + i] = field(box.node(i, j));
    return values;
}

namespace detail {

/// Parameter t in [0, 1] along in -> out where |field - s| <= tol; Illinois
/// false position on a bracketed sign change.
template <class Field>
Point2 refine_crossing(const Field& field, Point2 p_in, double f_in, Point2 p_out, double f_out, double s,
                       double tol) {
    double a = 0.0, b = 1.0;
    double fa = f_in - s, fb = f_out - s;
    if (std::abs(fa) <= tol) return p_in;
    if (std::abs(fb) <= tol) return p_out;
    const Point2 dir = p_out - p_in;
    // True residuals at the bracket ends; fa/fb may be halved by Illinois.
    double ra = fa, rb = fb;
    int side = 0;
    for (int it = 0; it < 200; ++it) {
        double t = (a * fb - b * fa) / (fb - fa);
        if (!(t > a && t < b)) t = 0.5 * (a + b);
        const Point2 p = p_in + t * dir;
        const double ft = field(p) - s;
        if (std::abs(ft) <= tol) return p;
        if (ft < 0.0) {
            a = t;
            fa = ra = ft;
            if (side == -1) fb *= 0.5;
            side = -1;
        } else {
            b = t;
            fb = rb = ft;
            if (side == +1) fa *= 0.5;
            side = +1;
        }
        if (!(b - a > std::numeric_limits<double>::epsilon())) break;
    }
    return std::abs(ra) <= std::abs(rb) ? p_in + a * dir : p_in + b * dir;
}

// Corners of cell (i, j) in counter-clockwise order: c0 = (i, j),
// c1 = (i+1, j), c2 = (i+1, j+1), c3 = (i, j+1). Cell edge k joins corner k
// to corner k+1 (mod 4).
constexpr int kCornerDi[4] = {0, 1, 1, 0};
constexpr int kCornerDj[4] = {0, 0, 1, 1};

/// Marching-squares state for one level over one sampled grid.
template <class Field>
class LevelGrid {
public:
    LevelGrid(const Field& field, const GraphicBox& box, const std::vector<double>& values, double s, double tol)
        : field_(field), box_(box), values_(values), n_(box.resolution()), s_(s), tol_(tol),
          crossing_index_(2 * static_cast<std::size_t>(n_) * n_, -1) {}

    bool inside(int i, int j) const { return value(i, j) < s_; }
    double value(int i, int j) const { return values_[static_cast<std::size_t>(j) * n_ + i]; }

    /// Global id of cell edge k of cell (i, j); horizontal edges are even, vertical odd.
    std::size_t edge_id(int i, int j, int k) const {
        switch (k) {
            case 0: return 2 * (static_cast<std::size_t>(j) * n_ + i);
            case 1: return 2 * (static_cast<std::size_t>(j) * n_ + i + 1) + 1;
            case 2: return 2 * (static_cast<std::size_t>(j + 1) * n_ + i);
            default: return 2 * (static_cast<std::size_t>(j) * n_ + i) + 1;
        }
    }

    bool edge_crossed(int i, int j, int k) const {
        const int k1 = (k + 1) % 4;
        return inside(i + kCornerDi[k], j + kCornerDj[k]) != inside(i + kCornerDi[k1], j + kCornerDj[k1]);
    }

    /// Index into crossings() of the refined point on cell edge k, computed once per grid edge.
    int crossing(int i, int j, int k) {
        const std::size_t id = edge_id(i, j, k);
        int& slot = crossing_index_[id];
        if (slot >= 0) return slot;
        const int k1 = (k + 1) % 4;
        int ia = i + kCornerDi[k], ja = j + kCornerDj[k];
        int ib = i + kCornerDi[k1], jb = j + kCornerDj[k1];
        if (!inside(ia, ja)) {
            std::swap(ia, ib);
            std::swap(ja, jb);
        }
        const Point2 p = refine_crossing(field_, box_.node(ia, ja), value(ia, ja), box_.node(ib, jb), value(ib, jb),
                                         s_, tol_);
        slot = static_cast<int>(points_.size());
        points_.push_back(p);
        edge_of_.push_back(id);
        return slot;
    }

    /// Whether the cell is a saddle whose diagonal-pair corners c0/c2 connect through the centre.
    bool saddle_centre_inside(int i, int j) const {
        const Point2 a = box_.node(i, j), b = box_.node(i + 1, j + 1);
        return field_(0.5 * (a + b)) < s_;
    }

    /// Segments of cell (i, j) as pairs of cell-edge indices.
    int cell_segments(int i, int j, std::pair<int, int> out[2]) const {
        int crossed[4];
        int count = 0;
        for (int k = 0; k < 4; ++k)
            if (edge_crossed(i, j, k)) crossed[count++] = k;
        if (count == 2) {
            out[0] = {crossed[0], crossed[1]};
            return 1;
        }
        if (count == 4) {
            // Cut off the two corners whose state differs from the centre.
            const bool c0_inside = inside(i, j);
            const bool centre = saddle_centre_inside(i, j);
            if (centre == c0_inside) {
                out[0] = {0, 1};  // around c1
                out[1] = {2, 3};  // around c3
            } else {
                out[0] = {3, 0};  // around c0
                out[1] = {1, 2};  // around c2
            }
            return 2;
        }
        return 0;
    }

    const std::vector<Point2>& crossings() const { return points_; }
    std::size_t crossing_edge(int idx) const { return edge_of_[static_cast<std::size_t>(idx)]; }
    int n() const { return n_; }

private:
    const Field& field_;
    const GraphicBox& box_;
    const std::vector<double>& values_;
    int n_;
    double s_;
    double tol_;
    std::vector<int> crossing_index_;
    std::vector<Point2> points_;
    std::vector<std::size_t> edge_of_;
};

inline void push_distinct(std::vector<Point2>& out, Point2 p) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
}

}  // namespace detail

/// Contours {field = s} on a pre-sampled grid. Closed curves are oriented
/// counter-clockwise; curves leaving the box are returned open. Chaining
/// order depends only on grid edge ids, so the output is deterministic.
template <class Field>
std::vector<LevelCurve> extract_contour_sampled(const Field& field, const GraphicBox& box,
                                                const std::vector<double>& values, double s, double refine_tol) {
    detail::LevelGrid<Field> grid(field, box, values, s, refine_tol);
    const int n = box.resolution();

    // Adjacency over crossing points; every crossing has degree 1 (box edge) or 2.
    std::vector<std::pair<int, int>> links;
    for (int j = 0; j + 1 < n; ++j) {
        for (int i = 0; i + 1 < n; ++i) {
            std::pair<int, int> segs[2];
            const int count = grid.cell_segments(i, j, segs);
            for (int k = 0; k < count; ++k)
                links.emplace_back(grid.crossing(i, j, segs[k].first), grid.crossing(i, j, segs[k].second));
        }
    }
    const std::size_t npts = grid.crossings().size();
    std::vector<std::array<int, 2>> adj(npts, {-1, -1});
    for (const auto& [u, v] : links) {
        (adj[u][0] < 0 ? adj[u][0] : adj[u][1]) = v;
        (adj[v][0] < 0 ? adj[v][0] : adj[v][1]) = u;
    }

    std::vector<int> order(npts);
    for (std::size_t k = 0; k < npts; ++k) order[k] = static_cast<int>(k);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return grid.crossing_edge(a) < grid.crossing_edge(b); });

    std::vector<char> visited(npts, 0);
    std::vector<LevelCurve> curves;
    auto walk = [&](int start, bool closed) {
        LevelCurve c;
        c.closed = closed;
        c.refine_tol = refine_tol;
        int prev = -1, cur = start;
        while (cur >= 0 && !visited[cur]) {
            visited[cur] = 1;
            detail::push_distinct(c.vertices, grid.crossings()[cur]);
            const int next = adj[cur][0] != prev ? adj[cur][0] : adj[cur][1];
            prev = cur;
            cur = next;
        }
        if (closed) {
            while (c.vertices.size() > 1 && c.vertices.back() == c.vertices.front()) c.vertices.pop_back();
            if (c.vertices.size() < 3) return;
            if (signed_area(c.vertices) < 0.0) std::reverse(c.vertices.begin(), c.vertices.end());
        } else if (c.vertices.size() < 2) {
            return;
        }
        curves.push_back(std::move(c));
    };

    for (int idx : order)
        if (!visited[idx] && (adj[idx][0] < 0 || adj[idx][1] < 0)) walk(idx, false);
    for (int idx : order)
        if (!visited[idx]) walk(idx, true);
    return curves;
}

template <class Field>
std::vector<LevelCurve> extract_contour(const Field& field, const GraphicBox& box, double s, double refine_tol) {
    if (!(refine_tol > 0.0)) throw InvalidArgument("refine_tol must be positive");
    const auto values = sample_grid(field, box);
    return extract_contour_sampled(field, box, values, s, refine_tol);
}

inline double default_refine_tol(double s) noexcept { return 1e-9 * std::max(std::abs(s), 1e-300); }

/// Level curves {f = s} of the weighted objective inside the box.
inline std::vector<LevelCurve> extract_contour(const FocusTriple& foci, const Metric& metric, const GraphicBox& box,
                                               double s, double refine_tol) {
    auto f = [&](Point2 p) { return weber_objective(p, foci, metric); };
    return extract_contour(f, box, s, refine_tol);
}

inline std::vector<LevelCurve> extract_contour(const FocusTriple& foci, const Metric& metric, const GraphicBox& box,
                                               double s) {
    return extract_contour(foci, metric, box, s, default_refine_tol(s));
}

// ---------------------------------------------------------------------------
// Area and perimeter

namespace detail {

/// Area of {field < s} inside one cell from the marching-squares polygon with refined crossings.
template <class Field>
double cell_inside_area(LevelGrid<Field>& grid, const GraphicBox& box, int i, int j) {
    bool in[4];
    int count = 0;
    for (int k = 0; k < 4; ++k) {
        in[k] = grid.inside(i + kCornerDi[k], j + kCornerDj[k]);
        count += in[k];
    }
    const Point2 origin = box.node(i, j);
    const Point2 far = box.node(i + 1, j + 1);
    if (count == 4) return (far.x - origin.x) * (far.y - origin.y);
    if (count == 0) return 0.0;

    auto corner = [&](int k) { return box.node(i + kCornerDi[k], j + kCornerDj[k]) - origin; };
    auto cross_pt = [&](int k) { return grid.crossings()[static_cast<std::size_t>(grid.crossing(i, j, k))] - origin; };

    const bool saddle = count == 2 && in[0] == in[2];
    if (saddle && grid.saddle_centre_inside(i, j) != in[0]) {
        // Two separate inside corners: a triangle at each.
        double area = 0.0;
        for (int k = 0; k < 4; ++k) {
            if (!in[k]) continue;
            const std::vector<Point2> tri{corner(k), cross_pt(k), cross_pt((k + 3) % 4)};
            area += std::abs(signed_area(tri));
        }
        return area;
    }
    std::vector<Point2> poly;
    poly.reserve(6);
    for (int k = 0; k < 4; ++k) {
        if (in[k]) poly.push_back(corner(k));
        if (in[k] != in[(k + 1) % 4]) poly.push_back(cross_pt(k));
    }
    return std::abs(signed_area(poly));
}

struct SingleResolution {
    double area = 0.0;
    double perimeter = 0.0;
};

template <class Field>
SingleResolution measure_region(const Field& field, const GraphicBox& box, double s, double refine_tol) {
    const auto values = sample_grid(field, box);
    const int n = box.resolution();
    for (int k = 0; k < n; ++k) {
        const double edge[4] = {values[static_cast<std::size_t>(k)], values[static_cast<std::size_t>(n - 1) * n + k],
                                values[static_cast<std::size_t>(k) * n], values[static_cast<std::size_t>(k) * n + n - 1]};
        for (double v : edge)
            if (!(v > s)) throw RegionNotContained("sublevel set reaches the box boundary; enlarge the box");
    }

    LevelGrid<Field> grid(field, box, values, s, refine_tol);
    SingleResolution out;
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i + 1 < n; ++i) out.area += cell_inside_area(grid, box, i, j);
    for (const auto& c : extract_contour_sampled(field, box, values, s, refine_tol)) out.perimeter += curve_length(c);
    return out;
}

}  // namespace detail

/// Area and perimeter of {field <= s} at resolutions n and 2n. Reports the
/// fine values; each error is half the difference between the two.
template <class Field>
RegionMetrics region_metrics_of(const Field& field, const GraphicBox& box, double s, int base_resolution,
                                double refine_tol) {
    if (base_resolution < 2) throw InvalidArgument("base_resolution must be at least 2");
    const GraphicBox coarse_box = box.with_resolution(base_resolution);
    const GraphicBox fine_box = box.with_resolution(2 * base_resolution);
    const auto coarse = detail::measure_region(field, coarse_box, s, refine_tol);
    const auto fine = detail::measure_region(field, fine_box, s, refine_tol);
    RegionMetrics m;
    m.area = fine.area;
    m.perimeter = fine.perimeter;
    m.area_error = 0.5 * std::abs(fine.area - coarse.area);
    m.perimeter_error = 0.5 * std::abs(fine.perimeter - coarse.perimeter);
    m.grid_step = std::max(fine_box.step_x(), fine_box.step_y());
    return m;
}

inline constexpr int kDefaultBaseResolution = 256;

/// Area and perimeter of {f <= s} for the weighted objective.
///
/// Throws LevelBelowMinimum unless s is a proper curve level, and
/// RegionNotContained when the region touches the box boundary.
inline RegionMetrics region_metrics(const FocusTriple& foci, const Metric& metric, const GraphicBox& box, double s,
                                    int base_resolution = kDefaultBaseResolution) {
    const double s0 = solve_weber(foci, metric).s0;
    if (classify_level({s, s0}) != LevelClass::curve)
        throw LevelBelowMinimum("level does not enclose a region (s <= s0)", s0);
    auto f = [&](Point2 p) { return weber_objective(p, foci, metric); };
    return region_metrics_of(f, box, s, base_resolution, default_refine_tol(s));
}

// ---------------------------------------------------------------------------
// Field sampling and isolines

inline FieldSample sample_field(const FocusTriple& foci, const Metric& metric, const GraphicBox& box) {
    auto f = [&](Point2 p) { return weber_objective(p, foci, metric); };
    FieldSample out{box, sample_grid(f, box), {}, 0.0, {}, 0.0};
    const auto [lo, hi] = std::minmax_element(out.values.begin(), out.values.end());
    const int n = box.resolution();
    const auto node_of = [&](auto it) {
        const auto idx = static_cast<int>(it - out.values.begin());
        return box.node(idx % n, idx / n);
    };
    out.min_point = node_of(lo);
    out.min_value = *lo;
    out.max_point = node_of(hi);
    out.max_value = *hi;
    return out;
}

struct Isoline {
    double level = 0.0;
    std::vector<LevelCurve> curves;
};

/// One entry per requested level, in request order. Levels that are not
/// proper curve levels (s <= s0) yield no curves.
inline std::vector<Isoline> isoline_set(const FocusTriple& foci, const Metric& metric, const GraphicBox& box,
                                       const std::vector<double>& levels, double s0) {
    auto f = [&](Point2 p) { return weber_objective(p, foci, metric); };
    const auto values = sample_grid(f, box);
    std::vector<Isoline> out;
    out.reserve(levels.size());
    for (double level : levels) {
        Isoline iso{level, {}};
        if (classify_level({level, s0}) == LevelClass::curve)
            iso.curves = extract_contour_sampled(f, box, values, level, default_refine_tol(level));
        out.push_back(std::move(iso));
    }
    return out;
}

inline std::vector<Isoline> isoline_set(const FocusTriple& foci, const Metric& metric, const GraphicBox& box,
                                       const std::vector<double>& levels) {
    return isoline_set(foci, metric, box, levels, solve_weber(foci, metric).s0);
}

/// A box that contains {f <= s} with a 5% margin, intersecting the
/// per-focus bounds |m - f_i|_2 <= sqrt(2) s / (w_i c). Falls back to the
/// foci bounding box when s is too small for any region.
inline GraphicBox auto_box(const FocusTriple& foci, const Metric& metric, double s, int resolution = 256) {
    const double norm_factor = metric.order_p() > 2.0 ? std::sqrt(2.0) : 1.0;
    double x0 = -std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = std::numeric_limits<double>::infinity(), y1 = x1;
    for (const auto& f : foci) {
        const double r = norm_factor * s / (f.weight() * metric.correction());
        x0 = std::max(x0, f.position().x - r);
        y0 = std::max(y0, f.position().y - r);
        x1 = std::min(x1, f.position().x + r);
        y1 = std::min(y1, f.position().y + r);
    }
    if (!(x1 > x0) || !(y1 > y0)) {
        x0 = y0 = std::numeric_limits<double>::infinity();
        x1 = y1 = -x0;
        for (const auto& f : foci) {
            x0 = std::min(x0, f.position().x);
            y0 = std::min(y0, f.position().y);
            x1 = std::max(x1, f.position().x);
            y1 = std::max(y1, f.position().y);
        }
    }
    const double span = std::max({x1 - x0, y1 - y0, 1e-9 * std::max(1.0, std::abs(s))});
    const double margin = 0.05 * span;
    return GraphicBox({x0 - margin, y0 - margin}, {x1 + margin, y1 + margin}, resolution);
}

}  // namespace trifocal
