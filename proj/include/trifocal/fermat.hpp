#pragma once

// Minimizers of the weighted three-focus objective.
//
// For the classical case (equal weights, Euclidean metric, every angle of the
// triangle below 120 degrees) the minimizer is the intersection of the Simpson
// lines: each joins a vertex to the apex of the equilateral triangle erected
// outward on the opposite side. If one angle is 120 degrees or more the
// minimizer is that vertex. The general weighted problem is solved
// iteratively (Weiszfeld for p = 2, Nelder-Mead otherwise).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "trifocal/error.hpp"
#include "trifocal/geometry.hpp"

namespace trifocal {

/// Side lengths (a = |BC|, b = |CA|, c = |AB|) and interior angles in degrees.
struct TriangleGeometry {
    std::array<double, 3> sides{};
    std::array<double, 3> angles_deg{};

    explicit TriangleGeometry(const FocusTriple& foci) {
        const Point2 A = foci.a().position(), B = foci.b().position(), C = foci.c().position();
        sides = {norm(C - B), norm(A - C), norm(B - A)};
        const std::array<Point2, 3> v{A, B, C};
        for (std::size_t i = 0; i < 3; ++i) {
            const Point2 u = v[(i + 1) % 3] - v[i];
            const Point2 w = v[(i + 2) % 3] - v[i];
            angles_deg[i] = std::atan2(std::abs(cross(u, w)), dot(u, w)) * 180.0 / std::numbers::pi;
        }
    }

    double area() const noexcept {
        // Heron, in the numerically stable ordering a >= b >= c.
        std::array<double, 3> s = sides;
        std::sort(s.begin(), s.end(), std::greater<>());
        const double a = s[0], b = s[1], c = s[2];
        const double prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
        return prod > 0.0 ? 0.25 * std::sqrt(prod) : 0.0;
    }

    double circumradius() const noexcept {
        const double ar = area();
        return ar > 0.0 ? sides[0] * sides[1] * sides[2] / (4.0 * ar) : std::numeric_limits<double>::infinity();
    }
};

enum class TriangleKind {
    all_angles_below_120,
    angle_at_least_120,
    collinear,
    coincident_pair,
    all_coincident,
};

struct TriangleClass {
    TriangleKind kind;
    /// Vertex index (0 = A, 1 = B, 2 = C) for angle_at_least_120; -1 otherwise.
    int vertex = -1;

    friend bool operator==(const TriangleClass&, const TriangleClass&) = default;
};

inline std::string to_string(TriangleKind k) {
    switch (k) {
        case TriangleKind::all_angles_below_120: return "all-angles-below-120";
        case TriangleKind::angle_at_least_120: return "angle-at-least-120";
        case TriangleKind::collinear: return "collinear";
        case TriangleKind::coincident_pair: return "coincident-pair";
        case TriangleKind::all_coincident: return "all-coincident";
    }
    return "unknown";
}

inline constexpr double kAngleCosTolerance = 1e-12;
inline constexpr double kCollinearTolerance = 1e-12;

/// Classifies the positions of the foci (weights are ignored). An angle of
/// exactly 120 degrees counts as the vertex case.
inline TriangleClass classify_triangle(const FocusTriple& foci) {
    const Point2 A = foci.a().position(), B = foci.b().position(), C = foci.c().position();
    const bool ab = A == B, bc = B == C, ca = C == A;
    if (ab && bc) return {TriangleKind::all_coincident};
    if (ab || bc || ca) return {TriangleKind::coincident_pair};

    const std::array<Point2, 3> v{A, B, C};
    double longest = 0.0;
    for (std::size_t i = 0; i < 3; ++i) longest = std::max(longest, norm(v[(i + 1) % 3] - v[i]));
    if (std::abs(cross(B - A, C - A)) <= kCollinearTolerance * longest * longest) return {TriangleKind::collinear};

    for (int i = 0; i < 3; ++i) {
        const Point2 u = v[(i + 1) % 3] - v[i];
        const Point2 w = v[(i + 2) % 3] - v[i];
        const double cosine = dot(u, w) / (norm(u) * norm(w));
        if (cosine <= -0.5 + kAngleCosTolerance) return {TriangleKind::angle_at_least_120, i};
    }
    return {TriangleKind::all_angles_below_120};
}

struct Segment2 {
    Point2 from;
    Point2 to;
};

/// Apex of the equilateral triangle erected on side pq, on the side away from `opposite`.
inline Point2 outward_apex(Point2 p, Point2 q, Point2 opposite) noexcept {
    const Point2 mid = 0.5 * (p + q);
    const Point2 h = (std::sqrt(3.0) / 2.0) * perp(q - p);
    const Point2 candidate = mid + h;
    const bool same_side = cross(q - p, candidate - p) * cross(q - p, opposite - p) > 0.0;
    return same_side ? mid - h : candidate;
}

/// The three Simpson lines, vertex i to the outward apex on the opposite side.
inline std::array<Segment2, 3> simpson_lines(const FocusTriple& foci) {
    std::array<Segment2, 3> lines;
    for (std::size_t i = 0; i < 3; ++i) {
        const Point2 v = foci[i].position();
        const Point2 p = foci[(i + 1) % 3].position();
        const Point2 q = foci[(i + 2) % 3].position();
        lines[i] = {v, outward_apex(p, q, v)};
    }
    return lines;
}

/// Fermat-Torricelli point by Simpson's construction.
///
/// Requires equal weights and a triangle whose angles are all below 120
/// degrees; throws PreconditionViolation otherwise.
inline Point2 torricelli_construct(const FocusTriple& foci) {
    if (foci.a().weight() != foci.b().weight() || foci.b().weight() != foci.c().weight())
        throw PreconditionViolation("torricelli construction requires equal weights");
    const TriangleClass cls = classify_triangle(foci);
    if (cls.kind != TriangleKind::all_angles_below_120)
        throw PreconditionViolation("torricelli construction requires all angles below 120 degrees, got " +
                                    to_string(cls.kind));
    const auto lines = simpson_lines(foci);
    const Point2 da = lines[0].to - lines[0].from;
    const Point2 db = lines[1].to - lines[1].from;
    const double t = cross(lines[1].from - lines[0].from, db) / cross(da, db);
    return lines[0].from + t * da;
}

enum class SolveStatus { interior, at_vertex, degenerate_coincident };

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::interior: return "interior";
        case SolveStatus::at_vertex: return "at-vertex";
        case SolveStatus::degenerate_coincident: return "degenerate-coincident";
    }
    return "unknown";
}

struct SolveResult {
    Point2 point;
    double s0 = 0.0;
    SolveStatus status = SolveStatus::interior;
    /// Focus index for at_vertex, -1 otherwise.
    int vertex = -1;
    int iterations = 0;
    /// Final gradient norm (p = 2) or simplex diameter (p != 2).
    double residual = 0.0;
    /// False when max_iter was exhausted; point is then the best iterate found.
    bool converged = true;
};

inline constexpr double kDefaultSolveTol = 1e-10;
inline constexpr int kDefaultMaxIter = 10000;

namespace detail {

inline SolveResult at_focus(const FocusTriple& foci, const Metric& metric, int index) {
    SolveResult r;
    r.point = foci[static_cast<std::size_t>(index)].position();
    r.s0 = weber_objective(r.point, foci, metric);
    r.status = SolveStatus::at_vertex;
    r.vertex = index;
    return r;
}

// Two distinct positions after merging a coincident pair. For any norm the
// heavier end is optimal; with equal mass every point of the segment is, and
// the midpoint is returned.
inline SolveResult solve_coincident_pair(const FocusTriple& foci, const Metric& metric) {
    std::array<int, 3> group{};
    for (int i = 0; i < 3; ++i) group[i] = i;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < i; ++j)
            if (foci[i].position() == foci[j].position()) group[i] = group[j];
    const int first = 0;
    int second = -1;
    double w_first = 0.0, w_second = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (group[i] == first) {
            w_first += foci[i].weight();
        } else {
            if (second < 0) second = group[i];
            w_second += foci[i].weight();
        }
    }
    if (w_first > w_second) return at_focus(foci, metric, first);
    if (w_second > w_first) return at_focus(foci, metric, second);
    SolveResult r;
    r.point = 0.5 * (foci[first].position() + foci[second].position());
    r.s0 = weber_objective(r.point, foci, metric);
    r.status = SolveStatus::degenerate_coincident;
    return r;
}

/// Index of a focus satisfying the Euclidean first-order optimality test, or -1.
inline int optimal_vertex(const FocusTriple& foci) {
    for (int i = 0; i < 3; ++i) {
        Point2 pull{};
        for (int j = 0; j < 3; ++j) {
            if (j == i) continue;
            const Point2 d = foci[i].position() - foci[j].position();
            pull += (foci[j].weight() / norm(d)) * d;
        }
        if (norm(pull) <= foci[i].weight() * (1.0 + kAngleCosTolerance)) return i;
    }
    return -1;
}

// One Weiszfeld step, with the Vardi-Zhang modification when the iterate
// sits exactly on a (non-optimal) focus.
inline Point2 weiszfeld_step(Point2 x, const FocusTriple& foci) {
    int on_focus = -1;
    for (int i = 0; i < 3; ++i)
        if (x == foci[i].position()) on_focus = i;

    Point2 num{};
    double den = 0.0;
    Point2 pull{};
    for (int i = 0; i < 3; ++i) {
        if (i == on_focus) continue;
        const Point2 d = foci[i].position() - x;
        const double r = norm(d);
        num += (foci[i].weight() / r) * foci[i].position();
        den += foci[i].weight() / r;
        pull += (foci[i].weight() / r) * d;
    }
    const Point2 t = num / den;
    if (on_focus < 0) return t;
    const double ratio = foci[on_focus].weight() / norm(pull);
    return std::max(0.0, 1.0 - ratio) * t + std::min(1.0, ratio) * x;
}

// Damped Newton refinement of an interior Euclidean minimizer. Weiszfeld
// converges only linearly, and slowly when the optimum is close to a vertex.
// Steps continue until they fall to rounding level relative to the spread of
// the foci, so the result does not inherit the absolute Weiszfeld tolerance.
struct PolishOutcome {
    int steps = 0;
    bool settled = false;  // last step was at rounding level
};

inline PolishOutcome newton_polish(Point2& x, const FocusTriple& foci, int max_steps = 50) {
    double spread = 0.0;
    for (const auto& f : foci) spread = std::max(spread, norm(f.position() - x));
    const double floor = 4.0 * std::numeric_limits<double>::epsilon() * (spread + norm(x));
    int iters = 0;
    for (; iters < max_steps; ++iters) {
        double hxx = 0.0, hxy = 0.0, hyy = 0.0;
        Point2 g{};
        for (const auto& f : foci) {
            const Point2 d = x - f.position();
            const double r = norm(d);
            if (r == 0.0) return {iters, false};
            const Point2 u = d / r;
            const double k = f.weight() / r;
            g += f.weight() * u;
            hxx += k * (1.0 - u.x * u.x);
            hxy += k * (-u.x * u.y);
            hyy += k * (1.0 - u.y * u.y);
        }
        const double det = hxx * hyy - hxy * hxy;
        if (!(det > 0.0)) return {iters, false};
        const Point2 step{(hyy * g.x - hxy * g.y) / det, (hxx * g.y - hxy * g.x) / det};
        if (norm(step) <= floor) return {iters, true};
        // Near the optimum the objective is flat to rounding, so a step that
        // shrinks the gradient is also accepted.
        const double f_now = weber_objective(x, foci);
        const double g_now = norm(g);
        const auto acceptable = [&](Point2 c) {
            if (weber_objective(c, foci) <= f_now) return true;
            try {
                return norm(weber_gradient(c, foci)) < g_now;
            } catch (const EvaluationAtFocus&) {
                return false;
            }
        };
        double lambda = 1.0;
        Point2 candidate = x - step;
        while (!acceptable(candidate) && lambda > 1e-6) {
            lambda *= 0.5;
            candidate = x - lambda * step;
        }
        if (!acceptable(candidate)) return {iters, false};
        x = candidate;
    }
    return {iters, false};
}

inline SolveResult solve_euclidean(const FocusTriple& foci, const Metric& metric, double tol, int max_iter) {
    if (const int v = optimal_vertex(foci); v >= 0) return at_focus(foci, metric, v);

    // Weiszfeld brings the iterate into Newton's basin; Newton finishes with
    // whatever iteration budget is left.
    const auto sides = TriangleGeometry(foci).sides;
    const double handoff = std::max(tol, 1e-4 * std::max({sides[0], sides[1], sides[2]}));
    SolveResult r;
    Point2 x = foci.weighted_centroid();
    bool converged = false;
    int k = 0;
    while (k < max_iter) {
        const Point2 next = weiszfeld_step(x, foci);
        ++k;
        const double step = norm(next - x);
        x = next;
        if (step < tol) converged = true;
        if (step < handoff) break;
    }
    const PolishOutcome polish = newton_polish(x, foci, std::min(50, max_iter - k));
    k += polish.steps;
    converged = converged || polish.settled;

    r.point = x;
    r.s0 = weber_objective(x, foci, metric);
    r.iterations = k;
    r.converged = converged;
    try {
        r.residual = norm(weber_gradient(x, foci));
    } catch (const EvaluationAtFocus&) {
        r.residual = 0.0;
    }
    // The vertex test already rejected every focus, so a small gradient at the
    // polished point also certifies optimality.
    if (!converged && r.residual <= 1e-12 * foci.total_weight()) r.converged = true;
    return r;
}

inline SolveResult solve_simplex(const FocusTriple& foci, const Metric& metric, double tol, int max_iter) {
    auto f = [&](Point2 p) { return weber_objective(p, foci, metric); };

    double spread = 0.0;
    const Point2 c = foci.weighted_centroid();
    for (const auto& fc : foci) spread = std::max(spread, norm(fc.position() - c));
    spread = std::max(spread, 1e-3);

    std::array<Point2, 3> simplex;
    std::array<double, 3> values;
    auto init = [&](Point2 x0, double h) {
        simplex = {x0, x0 + Point2{h, 0.0}, x0 + Point2{0.0, h}};
        for (int i = 0; i < 3; ++i) values[i] = f(simplex[i]);
    };
    auto diameter = [&] {
        return std::max({norm(simplex[1] - simplex[0]), norm(simplex[2] - simplex[0]), norm(simplex[2] - simplex[1])});
    };

    int k = 0;
    bool converged = false;
    // Restart once from the best vertex with the original scale; a single
    // Nelder-Mead run may collapse on a kink of the objective.
    for (int run = 0; run < 2 && k < max_iter; ++run) {
        init(run == 0 ? c : simplex[0], 0.25 * spread);
        converged = false;
        while (k < max_iter) {
            std::array<int, 3> idx{0, 1, 2};
            std::sort(idx.begin(), idx.end(), [&](int a, int b) { return values[a] < values[b]; });
            simplex = {simplex[idx[0]], simplex[idx[1]], simplex[idx[2]]};
            values = {values[idx[0]], values[idx[1]], values[idx[2]]};
            if (diameter() < tol) {
                converged = true;
                break;
            }
            ++k;
            const Point2 centroid = 0.5 * (simplex[0] + simplex[1]);
            const Point2 reflected = centroid + (centroid - simplex[2]);
            const double fr = f(reflected);
            if (fr < values[0]) {
                const Point2 expanded = centroid + 2.0 * (centroid - simplex[2]);
                const double fe = f(expanded);
                if (fe < fr) {
                    simplex[2] = expanded;
                    values[2] = fe;
                } else {
                    simplex[2] = reflected;
                    values[2] = fr;
                }
                continue;
            }
            if (fr < values[1]) {
                simplex[2] = reflected;
                values[2] = fr;
                continue;
            }
            const bool outside = fr < values[2];
            const Point2 contracted =
                outside ? centroid + 0.5 * (reflected - centroid) : centroid + 0.5 * (simplex[2] - centroid);
            const double fc = f(contracted);
            if (fc < (outside ? fr : values[2])) {
                simplex[2] = contracted;
                values[2] = fc;
                continue;
            }
            for (int i = 1; i < 3; ++i) {
                simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
                values[i] = f(simplex[i]);
            }
        }
    }

    const int best = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
    SolveResult r;
    r.point = simplex[best];
    r.s0 = values[best];
    r.iterations = k;
    r.residual = diameter();
    r.converged = converged;
    // The objective has kinks at the foci; prefer a focus whenever it is at least as good.
    for (int i = 0; i < 3; ++i) {
        const double fv = f(foci[i].position());
        if (fv <= r.s0) {
            SolveResult v = at_focus(foci, metric, i);
            v.iterations = k;
            v.residual = r.residual;
            v.converged = converged;
            r = v;
        }
    }
    return r;
}

}  // namespace detail

/// Minimizes the weighted objective.
///
/// Euclidean metric: a focus passing the first-order optimality test
/// |sum_{j != i} w_j (f_i - f_j) / |f_i - f_j|| <= w_i is returned directly;
/// otherwise Weiszfeld iteration from the weighted centroid until the step is
/// below tol. Other orders p use Nelder-Mead until the simplex diameter is
/// below tol. Coincident foci are merged and solved in closed form.
inline SolveResult solve_weber(const FocusTriple& foci, const Metric& metric = Metric{},
                               double tol = kDefaultSolveTol, int max_iter = kDefaultMaxIter) {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw InvalidArgument("solver tolerance must be positive");
    if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");

    switch (classify_triangle(foci).kind) {
        case TriangleKind::all_coincident: {
            SolveResult r;
            r.point = foci.a().position();
            r.s0 = 0.0;
            r.status = SolveStatus::degenerate_coincident;
            return r;
        }
        case TriangleKind::coincident_pair: return detail::solve_coincident_pair(foci, metric);
        default: break;
    }
    return metric.is_euclidean() ? detail::solve_euclidean(foci, metric, tol, max_iter)
                                 : detail::solve_simplex(foci, metric, tol, max_iter);
}

/// max{a + b, b + c, c + a}; bounds R_A + R_B + R_C for points inside the triangle.
inline double visschers_bound(const FocusTriple& foci) {
    const auto s = TriangleGeometry(foci).sides;
    return std::max({s[0] + s[1], s[1] + s[2], s[2] + s[0]});
}

}  // namespace trifocal
