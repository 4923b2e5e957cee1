#pragma once

// GeoJSON and SVG renderings of a solved problem.

#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "trifocal/contour.hpp"
#include "trifocal/fermat.hpp"

namespace trifocal {

using CoordinateMap = std::function<Point2(Point2)>;

inline Point2 identity_map(Point2 p) { return p; }

/// FeatureCollection: a Polygon per closed curve, a LineString per open one
/// (both with a "level" property), plus Point features for the foci and the
/// optimal point. Coordinates pass through `to_output` (e.g. plane -> lon/lat).
inline nlohmann::json to_geojson(const std::vector<Isoline>& isolines, const FocusTriple& foci,
                                 const SolveResult& solution, const CoordinateMap& to_output = identity_map,
                                 const std::vector<std::string>& focus_names = {}) {
    using nlohmann::json;
    auto coord = [&](Point2 p) {
        const Point2 q = to_output(p);
        return json::array({q.x, q.y});
    };
    json features = json::array();
    for (const auto& iso : isolines) {
        for (const auto& c : iso.curves) {
            json ring = json::array();
            for (const auto& v : c.vertices) ring.push_back(coord(v));
            json geometry;
            if (c.closed) {
                ring.push_back(coord(c.vertices.front()));
                geometry = {{"type", "Polygon"}, {"coordinates", json::array({std::move(ring)})}};
            } else {
                geometry = {{"type", "LineString"}, {"coordinates", std::move(ring)}};
            }
            features.push_back({{"type", "Feature"},
                                {"geometry", std::move(geometry)},
                                {"properties", {{"level", iso.level}, {"refine_tol", c.refine_tol}}}});
        }
    }
    for (std::size_t i = 0; i < 3; ++i) {
        json props{{"role", "focus"}, {"index", i}, {"weight", foci[i].weight()}};
        if (i < focus_names.size()) props["name"] = focus_names[i];
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Point"}, {"coordinates", coord(foci[i].position())}}},
                            {"properties", std::move(props)}});
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", coord(solution.point)}}},
                        {"properties", {{"role", "optimum"}, {"s0", solution.s0}, {"status", to_string(solution.status)}}}});
    return json{{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

struct SvgView {
    double width = 800.0;
    double height = 800.0;
    CoordinateMap to_canvas = identity_map;
    std::optional<std::string> background;

    /// Fits the box into a canvas `width` pixels wide, y pointing up.
    static SvgView for_box(const GraphicBox& box, double width = 800.0) {
        const Point2 lo = box.min_corner(), hi = box.max_corner();
        const double scale = width / (hi.x - lo.x);
        SvgView v;
        v.width = width;
        v.height = scale * (hi.y - lo.y);
        v.to_canvas = [lo, hi, scale](Point2 p) { return Point2{scale * (p.x - lo.x), scale * (hi.y - p.y)}; };
        return v;
    }
};

namespace detail {

inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace detail

/// One <path> per curve, then circle markers for the points.
inline std::string to_svg(const std::vector<Isoline>& isolines, const FocusTriple& foci, const SolveResult& solution,
                          const SvgView& view) {
    static constexpr const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                               "#66a61e", "#e6ab02", "#a6761d", "#666666"};
    std::ostringstream svg;
    svg << R"(<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width=")"
        << detail::fmt_num(view.width) << "\" height=\"" << detail::fmt_num(view.height) << "\" viewBox=\"0 0 "
        << detail::fmt_num(view.width) << ' ' << detail::fmt_num(view.height) << "\">\n";
    if (view.background) {
        const std::string href = detail::xml_escape(*view.background);
        svg << "  <image href=\"" << href << "\" xlink:href=\"" << href << "\" x=\"0\" y=\"0\" width=\""
            << detail::fmt_num(view.width) << "\" height=\"" << detail::fmt_num(view.height)
            << "\" preserveAspectRatio=\"none\"/>\n";
    }
    std::size_t level_index = 0;
    for (const auto& iso : isolines) {
        const char* colour = kPalette[level_index++ % std::size(kPalette)];
        for (const auto& c : iso.curves) {
            svg << "  <path class=\"isoline\" data-level=\"" << iso.level << "\" fill=\"none\" stroke=\"" << colour
                << "\" stroke-width=\"1.5\" d=\"";
            for (std::size_t k = 0; k < c.vertices.size(); ++k) {
                const Point2 p = view.to_canvas(c.vertices[k]);
                svg << (k == 0 ? "M" : " L") << detail::fmt_num(p.x) << ' ' << detail::fmt_num(p.y);
            }
            if (c.closed) svg << " Z";
            svg << "\"/>\n";
        }
    }
    for (const auto& f : foci) {
        const Point2 p = view.to_canvas(f.position());
        svg << "  <circle class=\"focus\" cx=\"" << detail::fmt_num(p.x) << "\" cy=\"" << detail::fmt_num(p.y)
            << "\" r=\"5\" fill=\"#1f4e79\"/>\n";
    }
    const Point2 opt = view.to_canvas(solution.point);
    svg << "  <circle class=\"optimum\" cx=\"" << detail::fmt_num(opt.x) << "\" cy=\"" << detail::fmt_num(opt.y)
        << "\" r=\"4\" fill=\"#c00000\" stroke=\"white\" stroke-width=\"1\"/>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace trifocal
