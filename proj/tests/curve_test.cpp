#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "trifocal/contour.hpp"

namespace trifocal {
namespace {

const double kSqrt3 = std::sqrt(3.0);
const FocusTriple kEquilateral = FocusTriple::unweighted({0.0, 0.0}, {1.0, 0.0}, {0.5, kSqrt3 / 2.0});
const FocusTriple kOrigin = FocusTriple::unweighted({0, 0}, {0, 0}, {0, 0});

/// Foci and level rescaled so that the level becomes 1.
FocusTriple normalized(const FocusTriple& t, double s) {
    return FocusTriple::unweighted(t.a().position() / s, t.b().position() / s, t.c().position() / s);
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const Point2 d = b - a;
    const double len2 = dot(d, d);
    const double t = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
    return norm(p - (a + t * d));
}

double distance_to_polyline(Point2 p, const LevelCurve& c) {
    double best = INFINITY;
    const std::size_t n = c.vertices.size();
    for (std::size_t k = 0; k + 1 < n; ++k) best = std::min(best, point_segment_distance(p, c.vertices[k], c.vertices[k + 1]));
    if (c.closed) best = std::min(best, point_segment_distance(p, c.vertices.back(), c.vertices.front()));
    return best;
}

TEST(ImplicitResidual, VanishesOnCircleAroundCoincidentFoci) {
    EXPECT_EQ(implicit_residual({1.0, 0.0}, kOrigin, 3.0), 0.0);
    for (double s : {0.3, 3.0, 7.5}) {
        for (double phi = 0.0; phi < 6.28; phi += 0.37) {
            const Point2 m{s / 3.0 * std::cos(phi), s / 3.0 * std::sin(phi)};
            EXPECT_LE(std::abs(implicit_residual(m, kOrigin, s)), 1e-12 * std::pow(s, 8));
        }
    }
}

TEST(ImplicitResidual, VanishesOnRefinedContourVertices) {
    oracle::TriangleGenerator gen(100);
    for (int k = 0; k < 10; ++k) {
        const auto raw = gen.with_angles_below(179.0, 2.0);
        const double s = 1.2 * solve_weber(raw).s0;
        const auto t = normalized(raw, s);
        const auto curves = extract_contour(t, Metric{}, auto_box(t, Metric{}, 1.0, 256), 1.0);
        ASSERT_EQ(curves.size(), 1u);
        for (const auto& v : curves[0].vertices) ASSERT_LT(std::abs(implicit_residual(v, t, 1.0)), 1e-6);
    }
}

TEST(ImplicitResidual, NonZeroOffTheCurve) {
    // Probe points on the 1.5 S level; skip those where another sign
    // combination of +-R_A +-R_B +-R_C happens to equal S (spurious branches
    // introduced by squaring).
    oracle::TriangleGenerator gen(101);
    int probed = 0;
    for (int k = 0; k < 10; ++k) {
        const auto raw = gen.with_angles_below(179.0, 2.0);
        const double s = 1.2 * solve_weber(raw).s0;
        const auto t = normalized(raw, s);
        const auto curves = extract_contour(t, Metric{}, auto_box(t, Metric{}, 1.5, 64), 1.5);
        ASSERT_FALSE(curves.empty());
        for (const auto& v : curves[0].vertices) {
            ASSERT_NEAR(weber_objective(v, t), 1.5, 1e-8);
            const auto d = evaluate_distances(v, t);
            double nearest_combo = INFINITY;
            for (int signs = 1; signs < 8; ++signs) {
                const double combo = (signs & 1 ? -d.r[0] : d.r[0]) + (signs & 2 ? -d.r[1] : d.r[1]) +
                                     (signs & 4 ? -d.r[2] : d.r[2]);
                nearest_combo = std::min({nearest_combo, std::abs(combo - 1.0), std::abs(combo + 1.0)});
            }
            if (nearest_combo < 0.1) continue;
            ASSERT_GT(std::abs(implicit_residual(v, t, 1.0)), 1e-3);
            ++probed;
        }
    }
    EXPECT_GT(probed, 100);
}

TEST(ClassifyLevel, Examples) {
    const double s0 = 4.2;
    EXPECT_EQ(classify_level({0.5 * s0, s0}), LevelClass::empty);
    EXPECT_EQ(classify_level({s0, s0}), LevelClass::single_point);
    EXPECT_EQ(classify_level({2.0 * s0, s0}), LevelClass::curve);
    EXPECT_EQ(classify_level({s0 + 0.5 * level_epsilon(s0), s0}), LevelClass::single_point);
    EXPECT_EQ(classify_level({0.0, 0.0}), LevelClass::single_point);
    EXPECT_THROW(classify_level({1.0, -1.0}), InvalidArgument);
}

TEST(GraphicBox, Validation) {
    EXPECT_THROW(GraphicBox({0, 0}, {0, 1}, 10), InvalidArgument);
    EXPECT_THROW(GraphicBox({0, 0}, {1, 1}, 1), InvalidArgument);
    EXPECT_THROW(GraphicBox({0, NAN}, {1, 1}, 10), InvalidArgument);
    const GraphicBox b({-1, -2}, {3, 2}, 5);
    EXPECT_EQ(b.node(0, 0), (Point2{-1, -2}));
    EXPECT_EQ(b.node(4, 4), (Point2{3, 2}));
    EXPECT_EQ(b.node(2, 1), (Point2{1, -1}));
}

TEST(ExtractContour, CircleAroundCoincidentFoci) {
    const GraphicBox box({-1.5, -1.5}, {1.5, 1.5}, 301);
    const auto curves = extract_contour(kOrigin, Metric{}, box, 3.0);
    ASSERT_EQ(curves.size(), 1u);
    const auto& c = curves[0];
    EXPECT_TRUE(c.closed);
    const double h = box.step_x();
    for (const auto& v : c.vertices) EXPECT_LE(std::abs(norm(v) - 1.0), 2 * h);
    for (int k = 0; k < 3600; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / 3600;
        ASSERT_LE(distance_to_polyline({std::cos(phi), std::sin(phi)}, c), 2 * h);
    }
    EXPECT_GT(signed_area(c.vertices), 0.0);
}

TEST(ExtractContour, EquilateralLevelTwoIsConvex) {
    const GraphicBox box({-1, -1}, {2, 2}, 512);
    const auto curves = extract_contour(kEquilateral, Metric{}, box, 2.0);
    ASSERT_EQ(curves.size(), 1u);
    const auto& v = curves[0].vertices;
    ASSERT_TRUE(curves[0].closed);
    ASSERT_GT(v.size(), 100u);
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Point2 e1 = v[(k + 1) % v.size()] - v[k];
        const Point2 e2 = v[(k + 2) % v.size()] - v[(k + 1) % v.size()];
        ASSERT_GE(cross(e1, e2), -1e-12 * norm(e1) * norm(e2)) << "vertex " << k;
    }
}

TEST(ExtractContour, EmptyWhenBoxExcludesCurve) {
    EXPECT_TRUE(extract_contour(kEquilateral, Metric{}, GraphicBox({10, 10}, {11, 11}, 64), 2.0).empty());
    EXPECT_TRUE(extract_contour(kEquilateral, Metric{}, GraphicBox({-1, -1}, {2, 2}, 64), 1.0).empty());
}

TEST(ExtractContour, ClippedCurvesAreOpenAndEndOnTheBoxBoundary) {
    const GraphicBox box({0.0, -1.0}, {2.0, 2.0}, 128);  // cuts the circle of radius 1 in half
    const auto curves = extract_contour(kOrigin, Metric{}, box, 3.0);
    ASSERT_EQ(curves.size(), 1u);
    EXPECT_FALSE(curves[0].closed);
    EXPECT_NEAR(curves[0].vertices.front().x, 0.0, 1e-12);
    EXPECT_NEAR(curves[0].vertices.back().x, 0.0, 1e-12);
}

TEST(ExtractContour, VerticesLieOnTheLevelWithinRefineTol) {
    oracle::TriangleGenerator gen(7);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        for (int k = 0; k < 5; ++k) {
            const auto t = gen.weighted(0.5, 3.0);
            const Metric m(p, gen.uniform(1.0, 1.3));
            const double s = gen.uniform(1.1, 2.5) * solve_weber(t, m).s0;
            const double tol = 1e-10 * s;
            const auto curves = extract_contour(t, m, auto_box(t, m, s, 128), s, tol);
            ASSERT_FALSE(curves.empty());
            for (const auto& c : curves) {
                EXPECT_TRUE(c.closed);
                EXPECT_EQ(c.refine_tol, tol);
                for (std::size_t i = 0; i < c.vertices.size(); ++i) {
                    ASSERT_LE(std::abs(weber_objective(c.vertices[i], t, m) - s), tol);
                    ASSERT_FALSE(c.vertices[i] == c.vertices[(i + 1) % c.vertices.size()]);
                }
            }
        }
    }
}

TEST(ExtractContour, SaddleCellsResolvedByCentreSample) {
    // f = xy has a saddle at the origin. The single cell has two corners on
    // each side of the level and a centre value below it, so the two
    // outside corners are cut off by separate curves.
    const auto f = [](Point2 p) { return p.x * p.y; };
    const GraphicBox box({-0.5, -0.5}, {0.5, 0.5}, 2);
    const auto curves = extract_contour(f, box, 0.01, 1e-12);
    EXPECT_EQ(curves.size(), 2u);
    for (const auto& c : curves) EXPECT_FALSE(c.closed);
}

TEST(ExtractContour, Deterministic) {
    const auto t = FocusTriple({Focus({0, 0}, 1.3), Focus({3, 1}, 0.7), Focus({1, 4}, 2.0)});
    const GraphicBox box({-3, -3}, {6, 7}, 200);
    const auto a = extract_contour(t, Metric{}, box, 12.0);
    const auto b = extract_contour(t, Metric{}, box, 12.0);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].vertices, b[k].vertices);
}

TEST(RegionMetrics, UnitDisc) {
    const GraphicBox box({-1.5, -1.5}, {1.5, 1.5});
    const auto m = region_metrics(kOrigin, Metric{}, box, 3.0, 512);
    EXPECT_NEAR(m.area, std::numbers::pi, std::max(1e-3, 3 * m.area_error));
    EXPECT_NEAR(m.perimeter, 2 * std::numbers::pi, std::max(1e-3, 3 * m.perimeter_error));
    EXPECT_GT(m.area_error, 0.0);
    EXPECT_NEAR(m.grid_step, 3.0 / 1023, 1e-15);
}

TEST(RegionMetrics, ErrorEstimateShrinksWithResolution) {
    const GraphicBox box({-1.5, -1.5}, {1.5, 1.5});
    double previous = INFINITY;
    for (int n : {64, 128, 256, 512}) {
        const auto m = region_metrics(kOrigin, Metric{}, box, 3.0, n);
        EXPECT_LE(m.area_error, 0.6 * previous) << "n=" << n;
        EXPECT_LE(std::abs(m.area - std::numbers::pi), 3 * m.area_error + 1e-12) << "n=" << n;
        previous = m.area_error;
    }
}

TEST(RegionMetrics, DegenerateLevelIsRejected) {
    const double s0 = solve_weber(kEquilateral).s0;
    const GraphicBox box({-1, -1}, {2, 2});
    try {
        region_metrics(kEquilateral, Metric{}, box, s0, 64);
        FAIL() << "expected LevelBelowMinimum";
    } catch (const LevelBelowMinimum& e) {
        EXPECT_NEAR(e.s0(), std::sqrt(3.0), 1e-9);
    }
    EXPECT_THROW(region_metrics(kEquilateral, Metric{}, box, 0.5 * s0, 64), LevelBelowMinimum);
}

TEST(RegionMetrics, RegionTouchingBoxIsRejected) {
    EXPECT_THROW(region_metrics(kOrigin, Metric{}, GraphicBox({-0.9, -2}, {2, 2}), 3.0, 64), RegionNotContained);
}

TEST(RegionMetrics, AgreesWithMonteCarlo) {
    const GraphicBox box({-1, -1}, {2, 2});
    const auto m = region_metrics(kEquilateral, Metric{}, box, 2.0, 256);
    const auto mc = oracle::monte_carlo_area(kEquilateral, Metric{}, 2.0, {-0.2, -0.3}, {1.2, 1.1}, 1'000'000, 77);
    const double combined = std::hypot(mc.standard_error, m.area_error);
    EXPECT_LE(std::abs(m.area - mc.area), 3 * combined);
}

TEST(RegionMetrics, ReflectionInvariance) {
    const FocusTriple t({Focus({0.2, 0.1}, 1.0), Focus({1.4, -0.3}, 2.0), Focus({0.5, 1.2}, 1.5)});
    const FocusTriple mirrored({Focus({0.2, -0.1}, 1.0), Focus({1.4, 0.3}, 2.0), Focus({0.5, -1.2}, 1.5)});
    const double s = 1.4 * solve_weber(t).s0;
    const GraphicBox box({-4, -4}, {5, 4});
    const auto a = region_metrics(t, Metric{}, box, s, 200);
    const auto b = region_metrics(mirrored, Metric{}, box, s, 200);
    EXPECT_NEAR(a.area, b.area, 1e-9 * a.area);
    EXPECT_NEAR(a.perimeter, b.perimeter, 1e-9 * a.perimeter);
}

TEST(RegionMetrics, AreaIncreasesWithLevel) {
    oracle::TriangleGenerator gen(9);
    for (int k = 0; k < 5; ++k) {
        const auto t = gen.weighted(0.5, 2.0);
        const double s0 = solve_weber(t).s0;
        const GraphicBox box = auto_box(t, Metric{}, 2.0 * s0);
        double previous = 0.0;
        for (double f : {1.05, 1.1, 1.5, 2.0}) {
            const double area = region_metrics(t, Metric{}, box, f * s0, 128).area;
            ASSERT_GT(area, previous);
            previous = area;
        }
    }
}

TEST(SampleField, MinimumNearEquilateralCentroid) {
    const GraphicBox box({-0.5, -0.5}, {1.5, 1.5}, 256);
    const auto fs = sample_field(kEquilateral, Metric{}, box);
    const Point2 centroid{0.5, kSqrt3 / 6.0};
    EXPECT_LE(norm(fs.min_point - centroid), std::hypot(box.step_x(), box.step_y()));
    EXPECT_EQ(fs.values.size(), 256u * 256u);
    for (double v : fs.values) {
        ASSERT_GE(v, fs.min_value);
        ASSERT_LE(v, fs.max_value);
    }
}

TEST(SampleField, MaximumOnBoxBoundary) {
    oracle::TriangleGenerator gen(13);
    for (int k = 0; k < 50; ++k) {
        const auto t = gen.weighted();
        const GraphicBox box({-12, -11}, {11, 12}, 64);
        const auto fs = sample_field(t, Metric(gen.uniform(1.0, 3.0)), box);
        const Point2 p = fs.max_point;
        ASSERT_TRUE(p.x == -12 || p.x == 11 || p.y == -11 || p.y == 12);
    }
}

TEST(SampleField, SingleCellEnumeratesCorners) {
    const GraphicBox box({-1, -1}, {2, 3}, 2);
    const auto fs = sample_field(kEquilateral, Metric{}, box);
    ASSERT_EQ(fs.values.size(), 4u);
    const Point2 corners[4] = {{-1, -1}, {2, -1}, {-1, 3}, {2, 3}};
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& c : corners) {
        lo = std::min(lo, weber_objective(c, kEquilateral));
        hi = std::max(hi, weber_objective(c, kEquilateral));
    }
    EXPECT_EQ(fs.min_value, lo);
    EXPECT_EQ(fs.max_value, hi);
    EXPECT_EQ(weber_objective(fs.min_point, kEquilateral), lo);
}

TEST(IsolineSet, DegenerateAndEmptyLevels) {
    const double s0 = solve_weber(kEquilateral).s0;
    const GraphicBox box({-1, -1}, {2, 2}, 256);
    const auto at_min = isoline_set(kEquilateral, Metric{}, box, {s0});
    ASSERT_EQ(at_min.size(), 1u);
    for (const auto& c : at_min[0].curves) {
        double diameter = 0.0;
        for (const auto& a : c.vertices)
            for (const auto& b : c.vertices) diameter = std::max(diameter, norm(a - b));
        EXPECT_LT(diameter, 2 * box.step_x());
    }
    const auto below = isoline_set(kEquilateral, Metric{}, box, {0.5 * s0});
    ASSERT_EQ(below.size(), 1u);
    EXPECT_TRUE(below[0].curves.empty());
}

TEST(IsolineSet, LevelsNest) {
    oracle::TriangleGenerator gen(19);
    for (int k = 0; k < 10; ++k) {
        const auto t = gen.weighted(0.5, 2.0);
        const double s0 = solve_weber(t).s0;
        const auto iso = isoline_set(t, Metric{}, auto_box(t, Metric{}, 2.0 * s0, 256), {1.1 * s0, 1.5 * s0, 2.0 * s0});
        ASSERT_EQ(iso.size(), 3u);
        for (int j = 0; j < 2; ++j) {
            ASSERT_EQ(iso[j].curves.size(), 1u);
            ASSERT_EQ(iso[j + 1].curves.size(), 1u);
            for (const auto& v : iso[j].curves[0].vertices)
                ASSERT_TRUE(point_in_polygon(v, iso[j + 1].curves[0].vertices));
        }
    }
}

TEST(AutoBox, ContainsTheRegion) {
    oracle::TriangleGenerator gen(23);
    for (double p : {1.0, 2.0, 4.0}) {
        for (int k = 0; k < 10; ++k) {
            const auto t = gen.weighted(0.2, 5.0);
            const Metric m(p);
            const double s = gen.uniform(1.05, 4.0) * solve_weber(t, m).s0;
            EXPECT_NO_THROW(region_metrics(t, m, auto_box(t, m, s), s, 32));
        }
    }
}

}  // namespace
}  // namespace trifocal
