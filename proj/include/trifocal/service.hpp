#pragma once

// JSON request/response layer shared by the HTTP service and the CLI.
//
// Request fields: foci[].x, foci[].y, foci[].w, metric.p, metric.correction,
// box.{x0,y0,x1,y1}, s, levels[], resolution, and an optional "id" that is
// echoed back. Errors are {code, message, details, s0?}.

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "trifocal/contour.hpp"
#include "trifocal/error.hpp"
#include "trifocal/fermat.hpp"
#include "trifocal/geo.hpp"
#include "trifocal/geometry.hpp"

namespace trifocal::service {

using json = nlohmann::json;

inline constexpr double kMaxClientWeight = 10.0;
inline constexpr int kMaxResolution = 4096;
inline constexpr std::size_t kMaxLevels = 256;

/// A request field failed validation; path is e.g. "foci[1].w".
class ValidationError : public InvalidArgument {
public:
    ValidationError(std::string path, const std::string& what) : InvalidArgument(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct ComputeRequest {
    std::optional<json> id;
    FocusTriple foci;
    Metric metric;
    std::optional<Point2> box_min, box_max;
    std::optional<double> s;
    std::optional<std::vector<double>> levels;
    int resolution = kDefaultBaseResolution;

    /// The requested box, or one derived from the level when the request has none.
    GraphicBox box_for(double level) const {
        if (box_min) return GraphicBox(*box_min, *box_max, resolution);
        return auto_box(foci, metric, level, resolution);
    }
};

namespace detail {

inline double number_at(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(path, "missing required number");
    if (!it->is_number()) throw ValidationError(path, "expected a number");
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw ValidationError(path, "must be finite");
    return v;
}

inline std::optional<double> optional_number(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return number_at(obj, key, path);
}

}  // namespace detail

inline ComputeRequest parse_request(const json& body) {
    if (!body.is_object()) throw ValidationError("$", "request body must be an object");

    const auto foci_it = body.find("foci");
    if (foci_it == body.end()) throw ValidationError("foci", "missing required array of three foci");
    if (!foci_it->is_array() || foci_it->size() != 3) throw ValidationError("foci", "expected an array of exactly 3 foci");
    std::vector<Focus> foci;
    for (std::size_t i = 0; i < 3; ++i) {
        const json& f = (*foci_it)[i];
        const std::string base = "foci[" + std::to_string(i) + "]";
        if (!f.is_object()) throw ValidationError(base, "expected an object");
        const double x = detail::number_at(f, "x", base + ".x");
        const double y = detail::number_at(f, "y", base + ".y");
        const double w = detail::optional_number(f, "w", base + ".w").value_or(1.0);
        if (!(w > 0.0)) throw ValidationError(base + ".w", "weight must be strictly positive");
        if (w > kMaxClientWeight) throw ValidationError(base + ".w", "weight must not exceed 10");
        foci.emplace_back(Point2{x, y}, w);
    }

    Metric metric;
    if (const auto it = body.find("metric"); it != body.end() && !it->is_null()) {
        if (!it->is_object()) throw ValidationError("metric", "expected an object");
        const double p = detail::optional_number(*it, "p", "metric.p").value_or(2.0);
        const double corr = detail::optional_number(*it, "correction", "metric.correction").value_or(1.0);
        if (p < 1.0) throw ValidationError("metric.p", "order must be >= 1");
        if (corr < 1.0 || corr > Metric::kMaxCorrection)
            throw ValidationError("metric.correction", "correction must lie in [1, 1.3]");
        metric = Metric(p, corr);
    }

    ComputeRequest req{std::nullopt, FocusTriple(foci[0], foci[1], foci[2]), metric, {}, {}, {}, {}};
    if (const auto it = body.find("id"); it != body.end()) req.id = *it;

    if (const auto it = body.find("resolution"); it != body.end() && !it->is_null()) {
        if (!it->is_number_integer()) throw ValidationError("resolution", "expected an integer");
        const auto n = it->get<long long>();
        if (n < 2 || n > kMaxResolution) throw ValidationError("resolution", "must lie in [2, 4096]");
        req.resolution = static_cast<int>(n);
    }

    if (const auto it = body.find("box"); it != body.end() && !it->is_null()) {
        if (!it->is_object()) throw ValidationError("box", "expected an object");
        const double x0 = detail::number_at(*it, "x0", "box.x0");
        const double y0 = detail::number_at(*it, "y0", "box.y0");
        const double x1 = detail::number_at(*it, "x1", "box.x1");
        const double y1 = detail::number_at(*it, "y1", "box.y1");
        if (!(x1 > x0)) throw ValidationError("box.x1", "must exceed box.x0");
        if (!(y1 > y0)) throw ValidationError("box.y1", "must exceed box.y0");
        req.box_min = Point2{x0, y0};
        req.box_max = Point2{x1, y1};
    }

    if (auto s = detail::optional_number(body, "s", "s")) {
        if (!(*s > 0.0)) throw ValidationError("s", "level must be positive");
        req.s = *s;
    }

    if (const auto it = body.find("levels"); it != body.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("levels", "expected an array of numbers");
        if (it->size() > kMaxLevels) throw ValidationError("levels", "at most 256 levels");
        std::vector<double> levels;
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& v = (*it)[i];
            const std::string path = "levels[" + std::to_string(i) + "]";
            if (!v.is_number()) throw ValidationError(path, "expected a number");
            const double level = v.get<double>();
            if (!std::isfinite(level) || !(level > 0.0)) throw ValidationError(path, "level must be positive and finite");
            levels.push_back(level);
        }
        req.levels = std::move(levels);
    }
    return req;
}

// ---------------------------------------------------------------------------
// Serialization

inline json to_json(Point2 p) { return json{{"x", p.x}, {"y", p.y}}; }

inline json to_json(const SolveResult& r) {
    json j{{"point", to_json(r.point)},
           {"s0", r.s0},
           {"status", to_string(r.status)},
           {"iterations", r.iterations},
           {"residual", r.residual},
           {"converged", r.converged}};
    if (r.status == SolveStatus::at_vertex) j["vertex"] = r.vertex;
    return j;
}

inline json to_json(const LevelCurve& c) {
    json vertices = json::array();
    for (const auto& v : c.vertices) vertices.push_back(json::array({v.x, v.y}));
    return json{{"closed", c.closed}, {"refine_tol", c.refine_tol}, {"vertices", std::move(vertices)}};
}

inline json to_json(const RegionMetrics& m) {
    return json{{"area", m.area},
                {"perimeter", m.perimeter},
                {"area_error", m.area_error},
                {"perimeter_error", m.perimeter_error},
                {"grid_step", m.grid_step}};
}

inline json to_json(const GraphicBox& b) {
    return json{{"x0", b.min_corner().x},
                {"y0", b.min_corner().y},
                {"x1", b.max_corner().x},
                {"y1", b.max_corner().y},
                {"resolution", b.resolution()}};
}

inline json to_json(const Scenario& sc) {
    json foci = json::array();
    for (const auto& f : sc.foci)
        foci.push_back({{"name", f.name}, {"lon", f.location.lon}, {"lat", f.location.lat}, {"weight", f.weight}});
    const auto& c = sc.calibration;
    json j{{"name", sc.name},
           {"foci", std::move(foci)},
           {"map",
            {{"width", c.width()},
             {"height", c.height()},
             {"west", c.west()},
             {"east", c.east()},
             {"south", c.south()},
             {"north", c.north()}}}};
    if (sc.image) j["map"]["image"] = *sc.image;
    if (sc.default_s) j["s"] = *sc.default_s;
    return j;
}

// ---------------------------------------------------------------------------
// Computations

struct Outcome {
    SolveResult solve;
    std::vector<Isoline> isolines;
};

inline void echo_id(const ComputeRequest& req, json& out) {
    if (req.id) out["id"] = *req.id;
}

inline json compute_solve(const ComputeRequest& req) {
    const SolveResult r = solve_weber(req.foci, req.metric);
    json out = to_json(r);
    echo_id(req, out);
    return out;
}

/// Contours for `s` or for every entry of `levels`.
///
/// A single `s` below the minimum throws LevelBelowMinimum; inside a level
/// list such entries come back with no curves.
inline Outcome contour_outcome(const ComputeRequest& req) {
    if (!req.s && !req.levels) throw ValidationError("s", "contour requests need 's' or 'levels'");
    Outcome out{solve_weber(req.foci, req.metric), {}};
    const double s0 = out.solve.s0;
    std::vector<double> levels;
    if (req.levels) {
        levels = *req.levels;
    } else {
        if (classify_level({*req.s, s0}) == LevelClass::empty)
            throw LevelBelowMinimum("level s is below the minimal objective value s0", s0);
        levels = {*req.s};
    }
    if (levels.empty()) return out;
    const double top = *std::max_element(levels.begin(), levels.end());
    out.isolines = isoline_set(req.foci, req.metric, req.box_for(std::max(top, s0)), levels, s0);
    return out;
}

inline json compute_contour(const ComputeRequest& req) {
    const Outcome o = contour_outcome(req);
    json contours = json::array();
    for (const auto& iso : o.isolines) {
        json curves = json::array();
        for (const auto& c : iso.curves) curves.push_back(to_json(c));
        contours.push_back({{"level", iso.level},
                            {"classification", to_string(classify_level({iso.level, o.solve.s0}))},
                            {"curves", std::move(curves)}});
    }
    json out{{"s0", o.solve.s0}, {"solve", to_json(o.solve)}, {"contours", std::move(contours)}};
    echo_id(req, out);
    return out;
}

inline json compute_region_metrics(const ComputeRequest& req) {
    if (!req.s) throw ValidationError("s", "region metrics need a level 's'");
    const double s0 = solve_weber(req.foci, req.metric).s0;
    if (classify_level({*req.s, s0}) != LevelClass::curve)
        throw LevelBelowMinimum("level s does not exceed the minimal objective value s0", s0);
    const GraphicBox box = req.box_for(*req.s);
    json out = to_json(region_metrics(req.foci, req.metric, box, *req.s, req.resolution));
    out["s0"] = s0;
    out["box"] = to_json(box.with_resolution(req.resolution));
    echo_id(req, out);
    return out;
}

inline json compute_field(const ComputeRequest& req) {
    const double s0 = solve_weber(req.foci, req.metric).s0;
    const GraphicBox box = req.box_for(req.s.value_or(2.0 * std::max(s0, 1e-12)));
    const FieldSample f = sample_field(req.foci, req.metric, box);
    json out{{"s0", s0},
             {"box", to_json(box)},
             {"nx", box.resolution()},
             {"ny", box.resolution()},
             {"values", f.values},
             {"min", {{"x", f.min_point.x}, {"y", f.min_point.y}, {"value", f.min_value}}},
             {"max", {{"x", f.max_point.x}, {"y", f.max_point.y}, {"value", f.max_value}}}};
    echo_id(req, out);
    return out;
}

// ---------------------------------------------------------------------------
// Dispatch

struct Response {
    int status = 200;
    json body;
};

inline json error_body(std::string code, std::string message, json details = json::object(),
                       std::optional<double> s0 = std::nullopt) {
    json j{{"code", std::move(code)}, {"message", std::move(message)}, {"details", std::move(details)}};
    if (s0) j["s0"] = *s0;
    return j;
}

/// Runs one POST endpoint ("solve", "contour", "region-metrics", "field") on a raw body.
inline Response handle(std::string_view endpoint, std::string_view body) {
    try {
        const json parsed = json::parse(body);
        const ComputeRequest req = parse_request(parsed);
        if (endpoint == "solve") return {200, compute_solve(req)};
        if (endpoint == "contour") return {200, compute_contour(req)};
        if (endpoint == "region-metrics") return {200, compute_region_metrics(req)};
        if (endpoint == "field") return {200, compute_field(req)};
        return {404, error_body("not-found", "unknown endpoint '" + std::string(endpoint) + "'")};
    } catch (const json::parse_error& e) {
        return {400, error_body("malformed-json", e.what())};
    } catch (const ValidationError& e) {
        return {400, error_body("validation-error", e.what(), {{"field", e.path()}})};
    } catch (const LevelBelowMinimum& e) {
        return {422, error_body("level-below-minimum", e.what(), json::object(), e.s0())};
    } catch (const RegionNotContained& e) {
        return {422, error_body("region-not-contained", e.what())};
    } catch (const InvalidArgument& e) {
        return {400, error_body("validation-error", e.what())};
    } catch (const Error& e) {
        return {422, error_body("computation-error", e.what())};
    }
}

/// Every *.scenario file in dir, sorted by file name; unreadable files are reported inline.
inline json list_scenarios(const std::filesystem::path& dir) {
    json out = json::array();
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) return out;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".scenario") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        try {
            json j = to_json(load_scenario_file(p.string()));
            j["file"] = p.filename().string();
            out.push_back(std::move(j));
        } catch (const Error& e) {
            out.push_back({{"file", p.filename().string()}, {"error", e.what()}});
        }
    }
    return out;
}

}  // namespace trifocal::service
