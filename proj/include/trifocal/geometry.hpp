#pragma once

// Distance metrics and the weighted three-focus objective field
//   f(m) = w_A d(m, A) + w_B d(m, B) + w_C d(m, C)
// sampled by every other part of the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "trifocal/error.hpp"

namespace trifocal {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator*(Point2 a, double s) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator/(Point2 a, double s) noexcept { return {a.x / s, a.y / s}; }
    constexpr Point2& operator+=(Point2 o) noexcept {
        x += o.x;
        y += o.y;
        return *this;
    }
    friend constexpr bool operator==(Point2, Point2) = default;

    bool finite() const noexcept { return std::isfinite(x) && std::isfinite(y); }
};

constexpr double dot(Point2 a, Point2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) noexcept { return std::hypot(a.x, a.y); }
/// Counter-clockwise quarter turn.
constexpr Point2 perp(Point2 a) noexcept { return {-a.y, a.x}; }

inline Point2 checked_point(double x, double y) {
    Point2 p{x, y};
    if (!p.finite()) throw InvalidArgument("point coordinates must be finite");
    return p;
}

/// A focus of the objective: a position with a strictly positive weight.
class Focus {
public:
    Focus(Point2 position, double weight = 1.0) : position_(position), weight_(weight) {
        if (!position.finite()) throw InvalidArgument("focus position must be finite");
        if (!(weight > 0.0) || !std::isfinite(weight))
            throw InvalidArgument("focus weight must be positive and finite");
    }

    Point2 position() const noexcept { return position_; }
    double weight() const noexcept { return weight_; }

    Focus with_weight(double w) const { return Focus(position_, w); }
    Focus with_position(Point2 p) const { return Focus(p, weight_); }

private:
    Point2 position_;
    double weight_;
};

/// Three foci, indexed 0 = A, 1 = B, 2 = C. Coincident and collinear positions are legal.
class FocusTriple {
public:
    FocusTriple(Focus a, Focus b, Focus c) : foci_{a, b, c} {}

    /// Unit-weight triple.
    static FocusTriple unweighted(Point2 a, Point2 b, Point2 c) { return {Focus(a), Focus(b), Focus(c)}; }

    const Focus& operator[](std::size_t i) const { return foci_[i]; }
    const Focus& a() const noexcept { return foci_[0]; }
    const Focus& b() const noexcept { return foci_[1]; }
    const Focus& c() const noexcept { return foci_[2]; }

    auto begin() const noexcept { return foci_.begin(); }
    auto end() const noexcept { return foci_.end(); }
    static constexpr std::size_t size() noexcept { return 3; }

    double total_weight() const noexcept { return foci_[0].weight() + foci_[1].weight() + foci_[2].weight(); }

    Point2 weighted_centroid() const noexcept {
        Point2 sum{};
        for (const auto& f : foci_) sum += f.weight() * f.position();
        return sum / total_weight();
    }

    bool unit_weights() const noexcept {
        return std::all_of(foci_.begin(), foci_.end(), [](const Focus& f) { return f.weight() == 1.0; });
    }

    /// Same positions, every weight multiplied by factor.
    FocusTriple scaled_weights(double factor) const {
        return {foci_[0].with_weight(foci_[0].weight() * factor), foci_[1].with_weight(foci_[1].weight() * factor),
                foci_[2].with_weight(foci_[2].weight() * factor)};
    }

private:
    std::array<Focus, 3> foci_;
};

/// Minkowski distance of order p, multiplied by a road-correction factor.
class Metric {
public:
    static constexpr double kMaxCorrection = 1.3;

    explicit Metric(double order_p = 2.0, double correction = 1.0) : p_(order_p), correction_(correction) {
        if (!std::isfinite(order_p) || order_p < 1.0) throw InvalidArgument("metric order p must be finite and >= 1");
        if (!std::isfinite(correction) || correction < 1.0 || correction > kMaxCorrection)
            throw InvalidArgument("metric correction must lie in [1, 1.3]");
    }

    static Metric euclidean(double correction = 1.0) { return Metric(2.0, correction); }
    static Metric manhattan(double correction = 1.0) { return Metric(1.0, correction); }

    double order_p() const noexcept { return p_; }
    double correction() const noexcept { return correction_; }
    bool is_euclidean() const noexcept { return p_ == 2.0; }

    double operator()(Point2 a, Point2 b) const noexcept {
        const double dx = std::abs(a.x - b.x);
        const double dy = std::abs(a.y - b.y);
        double d;
        if (p_ == 2.0) {
            d = std::hypot(dx, dy);
        } else if (p_ == 1.0) {
            d = dx + dy;
        } else {
            // Factor out the larger component so |.|^p cannot overflow for large p.
            const double big = std::max(dx, dy);
            if (big == 0.0) return 0.0;
            const double small = std::min(dx, dy) / big;
            d = big * std::pow(1.0 + std::pow(small, p_), 1.0 / p_);
        }
        return correction_ * d;
    }

    friend bool operator==(const Metric&, const Metric&) = default;

private:
    double p_;
    double correction_;
};

inline double distance(Point2 a, Point2 b, const Metric& m) noexcept { return m(a, b); }

/// Sum of weighted distances from m to the three foci.
inline double weber_objective(Point2 m, const FocusTriple& foci, const Metric& metric = Metric{}) noexcept {
    double sum = 0.0;
    for (const auto& f : foci) sum += f.weight() * metric(m, f.position());
    return sum;
}

/// Gradient of the Euclidean (correction 1) objective. Undefined at a focus.
inline Point2 weber_gradient(Point2 m, const FocusTriple& foci) {
    Point2 g{};
    for (const auto& f : foci) {
        const Point2 d = m - f.position();
        const double r = norm(d);
        if (r == 0.0) throw EvaluationAtFocus("objective gradient evaluated at a focus");
        g += (f.weight() / r) * d;
    }
    return g;
}

/// Euclidean distances R_i and squared distances Q_i from m to each focus.
struct EvaluatedDistances {
    std::array<double, 3> r{};
    std::array<double, 3> q{};
};

inline EvaluatedDistances evaluate_distances(Point2 m, const FocusTriple& foci) noexcept {
    EvaluatedDistances out;
    for (std::size_t i = 0; i < 3; ++i) {
        const Point2 d = m - foci[i].position();
        out.q[i] = dot(d, d);
        out.r[i] = std::sqrt(out.q[i]);
    }
    return out;
}

}  // namespace trifocal
