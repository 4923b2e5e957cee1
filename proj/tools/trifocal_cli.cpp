// trifocal: command-line front end.
//
//   trifocal solve   --focus 0,0,1 --focus 1,0,1 --focus 0.5,0.866,1
//   trifocal contour --scenario south-stream.scenario --s 20 --format geojson
//   trifocal metrics --focus 0,0 --focus 0,0 --focus 0,0 --s 3 --box -2,-2,2,2
//   trifocal render  --scenario south-stream.scenario --levels 16,18,20 --out map.svg
//   trifocal serve   --port 7350
//
// Exit codes: 0 success, 2 validation error, 3 numeric non-convergence, 1 other failures.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trifocal/export.hpp"
#include "trifocal/geo.hpp"
#include "trifocal/server.hpp"
#include "trifocal/service.hpp"

#ifndef TRIFOCAL_DATA_DIR
#define TRIFOCAL_DATA_DIR "data/scenarios"
#endif

namespace {

using trifocal::service::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

// Kilometres per degree of latitude on a sphere of radius 6371 km.
constexpr double kKmPerDegree = 6371.0 * 3.14159265358979323846 / 180.0;

struct NonConvergence : trifocal::Error {
    using Error::Error;
};

struct Options {
    std::string scenario;
    std::vector<std::string> foci;
    std::string metric;
    std::optional<double> s;
    std::string levels;
    std::string box;
    std::optional<int> resolution;
    std::string out;
    std::string format;
    int max_iter = trifocal::kDefaultMaxIter;
};

std::vector<double> split_numbers(const std::string& text, const std::string& flag) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            values.push_back(v);
        } catch (const std::exception&) {
            throw trifocal::service::ValidationError(flag, "expected comma-separated numbers, got '" + text + "'");
        }
    }
    return values;
}

fs::path resolve_scenario(const std::string& name) {
    if (fs::exists(name)) return name;
    const fs::path bundled = fs::path(TRIFOCAL_DATA_DIR) / name;
    if (fs::exists(bundled)) return bundled;
    throw trifocal::service::ValidationError("--scenario", "no such scenario file '" + name + "'");
}

/// The request in planar coordinates plus, for scenarios, the geo context.
struct Problem {
    trifocal::service::ComputeRequest request;
    std::optional<trifocal::Scenario> scenario;
    fs::path scenario_path;

    std::optional<trifocal::PlanarFrame> frame() const {
        if (!scenario) return std::nullopt;
        return scenario->frame();
    }

    /// Plane -> output coordinates (lon/lat for scenarios).
    trifocal::CoordinateMap to_output() const {
        if (auto fr = frame()) return [f = *fr](trifocal::Point2 p) {
            const auto g = f.to_geo(p);
            return trifocal::Point2{g.lon, g.lat};
        };
        return trifocal::identity_map;
    }
};

Problem build_problem(const Options& opt) {
    Problem pb{trifocal::service::ComputeRequest{std::nullopt, trifocal::FocusTriple::unweighted({}, {}, {}),
                                                 trifocal::Metric{}, {}, {}, {}, {}},
               std::nullopt,
               {}};
    json body = json::object();
    std::optional<trifocal::PlanarFrame> frame;

    if (!opt.scenario.empty()) {
        if (!opt.foci.empty()) throw trifocal::service::ValidationError("--focus", "cannot be combined with --scenario");
        pb.scenario_path = resolve_scenario(opt.scenario);
        pb.scenario = trifocal::load_scenario_file(pb.scenario_path.string());
        frame = pb.scenario->frame();
        const auto planar = pb.scenario->planar_foci();
        json foci = json::array();
        for (const auto& f : planar) foci.push_back({{"x", f.position().x}, {"y", f.position().y}, {"w", f.weight()}});
        body["foci"] = std::move(foci);
        if (pb.scenario->default_s) body["s"] = *pb.scenario->default_s;
    } else {
        if (opt.foci.size() != 3) throw trifocal::service::ValidationError("--focus", "give exactly three --focus x,y[,w]");
        json foci = json::array();
        for (const auto& text : opt.foci) {
            const auto v = split_numbers(text, "--focus");
            if (v.size() != 2 && v.size() != 3) throw trifocal::service::ValidationError("--focus", "expected x,y[,w]");
            foci.push_back({{"x", v[0]}, {"y", v[1]}, {"w", v.size() == 3 ? v[2] : 1.0}});
        }
        body["foci"] = std::move(foci);
    }

    if (!opt.metric.empty()) {
        const auto v = split_numbers(opt.metric, "--metric");
        if (v.empty() || v.size() > 2) throw trifocal::service::ValidationError("--metric", "expected p[,correction]");
        body["metric"] = {{"p", v[0]}, {"correction", v.size() == 2 ? v[1] : 1.0}};
    }
    if (opt.s) body["s"] = *opt.s;
    if (!opt.levels.empty()) body["levels"] = split_numbers(opt.levels, "--levels");
    if (!opt.box.empty()) {
        const auto v = split_numbers(opt.box, "--box");
        if (v.size() != 4) throw trifocal::service::ValidationError("--box", "expected x0,y0,x1,y1");
        trifocal::Point2 lo{v[0], v[1]}, hi{v[2], v[3]};
        if (frame) {
            // Scenario boxes are given in lon/lat.
            lo = frame->to_plane({v[0], v[1]});
            hi = frame->to_plane({v[2], v[3]});
        }
        body["box"] = {{"x0", lo.x}, {"y0", lo.y}, {"x1", hi.x}, {"y1", hi.y}};
    }
    if (opt.resolution) body["resolution"] = *opt.resolution;

    pb.request = trifocal::service::parse_request(body);
    return pb;
}

void write_output(const Options& opt, const std::string& text) {
    if (opt.out.empty() || opt.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream file(opt.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write '" + opt.out + "'");
    file << text;
}

std::string number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

int run_solve(const Options& opt) {
    const Problem pb = build_problem(opt);
    const auto r = trifocal::solve_weber(pb.request.foci, pb.request.metric, trifocal::kDefaultSolveTol, opt.max_iter);
    const trifocal::Point2 out = pb.to_output()(r.point);

    if (opt.format == "json") {
        json j = trifocal::service::to_json(r);
        if (pb.scenario) {
            j["scenario"] = pb.scenario->name;
            j["location"] = {{"lon", out.x}, {"lat", out.y}};
        }
        write_output(opt, j.dump(2) + "\n");
    } else if (opt.format.empty() || opt.format == "text") {
        std::ostringstream os;
        if (pb.scenario) os << "scenario   " << pb.scenario->name << '\n';
        os << "status     " << trifocal::to_string(r.status);
        if (r.status == trifocal::SolveStatus::at_vertex) {
            os << " (";
            if (pb.scenario) os << pb.scenario->foci[static_cast<std::size_t>(r.vertex)].name;
            else os << "ABC"[r.vertex];
            os << ')';
        }
        os << '\n';
        if (pb.scenario) os << "location   lon " << number(out.x) << "  lat " << number(out.y) << '\n';
        else os << "point      " << number(out.x) << ' ' << number(out.y) << '\n';
        os << "s0         " << number(r.s0) << '\n';
        os << "iterations " << r.iterations << '\n';
        os << "residual   " << number(r.residual) << '\n';
        write_output(opt, os.str());
    } else {
        throw trifocal::service::ValidationError("--format", "solve supports text|json");
    }
    if (!r.converged) throw NonConvergence("solver did not converge within the iteration limit");
    return kExitOk;
}

trifocal::SvgView scenario_view(const Problem& pb) {
    const auto& cal = pb.scenario->calibration;
    trifocal::SvgView view;
    view.width = cal.width();
    view.height = cal.height();
    const auto fr = *pb.frame();
    view.to_canvas = [fr, cal](trifocal::Point2 p) {
        const auto g = fr.to_geo(p);
        return trifocal::Point2{cal.width() * (g.lon - cal.west()) / (cal.east() - cal.west()),
                                cal.height() * (cal.north() - g.lat) / (cal.north() - cal.south())};
    };
    if (pb.scenario->image) {
        fs::path img = *pb.scenario->image;
        if (img.is_relative()) img = fs::absolute(pb.scenario_path.parent_path() / img);
        view.background = img.string();
    }
    return view;
}

int run_contour(const Options& opt, const std::string& default_format) {
    const Problem pb = build_problem(opt);
    const auto outcome = trifocal::service::contour_outcome(pb.request);
    const std::string format = opt.format.empty() ? default_format : opt.format;
    const auto to_out = pb.to_output();

    if (format == "geojson") {
        std::vector<std::string> names;
        if (pb.scenario)
            for (const auto& f : pb.scenario->foci) names.push_back(f.name);
        write_output(opt, trifocal::to_geojson(outcome.isolines, pb.request.foci, outcome.solve, to_out, names).dump() + "\n");
    } else if (format == "svg") {
        double top = outcome.solve.s0;
        for (const auto& iso : outcome.isolines) top = std::max(top, iso.level);
        const auto view = pb.scenario ? scenario_view(pb) : trifocal::SvgView::for_box(pb.request.box_for(top));
        write_output(opt, trifocal::to_svg(outcome.isolines, pb.request.foci, outcome.solve, view));
    } else if (format == "json") {
        json contours = json::array();
        for (const auto& iso : outcome.isolines) {
            json curves = json::array();
            for (const auto& c : iso.curves) {
                json vertices = json::array();
                for (const auto& v : c.vertices) {
                    const auto q = to_out(v);
                    vertices.push_back(json::array({q.x, q.y}));
                }
                curves.push_back({{"closed", c.closed}, {"refine_tol", c.refine_tol}, {"vertices", std::move(vertices)}});
            }
            contours.push_back({{"level", iso.level}, {"curves", std::move(curves)}});
        }
        json j{{"s0", outcome.solve.s0}, {"solve", trifocal::service::to_json(outcome.solve)}, {"contours", contours}};
        write_output(opt, j.dump(2) + "\n");
    } else {
        throw trifocal::service::ValidationError("--format", "expected svg|geojson|json");
    }
    if (!outcome.solve.converged) throw NonConvergence("solver did not converge within the iteration limit");
    return kExitOk;
}

int run_metrics(const Options& opt) {
    const Problem pb = build_problem(opt);
    json j = trifocal::service::compute_region_metrics(pb.request);
    if (pb.scenario) {
        // Planar frame units are degrees of latitude.
        j["area_km2"] = j["area"].get<double>() * kKmPerDegree * kKmPerDegree;
        j["perimeter_km"] = j["perimeter"].get<double>() * kKmPerDegree;
    }
    if (opt.format == "json") {
        write_output(opt, j.dump(2) + "\n");
    } else if (opt.format.empty() || opt.format == "text") {
        std::ostringstream os;
        os << "s0              " << number(j["s0"].get<double>()) << '\n'
           << "area            " << number(j["area"].get<double>()) << '\n'
           << "area_error      " << number(j["area_error"].get<double>()) << '\n'
           << "perimeter       " << number(j["perimeter"].get<double>()) << '\n'
           << "perimeter_error " << number(j["perimeter_error"].get<double>()) << '\n'
           << "grid_step       " << number(j["grid_step"].get<double>()) << '\n';
        if (pb.scenario)
            os << "area_km2        " << number(j["area_km2"].get<double>()) << '\n'
               << "perimeter_km    " << number(j["perimeter_km"].get<double>()) << '\n';
        write_output(opt, os.str());
    } else {
        throw trifocal::service::ValidationError("--format", "metrics supports text|json");
    }
    return kExitOk;
}

int run_serve(const std::string& host, int port, const std::string& scenario_dir) {
    httplib::Server server;
    trifocal::service::ServerConfig config;
    config.host = host;
    config.port = port;
    config.scenario_dir = scenario_dir;
    trifocal::service::install_routes(server, config);
    std::cerr << "trifocal service listening on http://" << host << ':' << port << std::endl;
    if (!server.listen(host, port)) {
        std::cerr << "error: cannot bind " << host << ':' << port << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

void add_problem_options(CLI::App* cmd, Options& opt) {
    cmd->add_option("--scenario", opt.scenario, "Scenario file (bundled names are looked up in the data directory)");
    cmd->add_option("--focus", opt.foci, "Focus as x,y[,w]; give three times")->take_all();
    cmd->add_option("--metric", opt.metric, "Minkowski order and road correction: p[,correction]");
    cmd->add_option("--s", opt.s, "Level S of the curve");
    cmd->add_option("--levels", opt.levels, "Comma-separated list of levels");
    cmd->add_option("--box", opt.box, "Graphic box x0,y0,x1,y1 (lon/lat for scenarios)");
    cmd->add_option("--resolution", opt.resolution, "Grid nodes per axis");
    cmd->add_option("--out", opt.out, "Output file (default stdout)");
    cmd->add_option("--format", opt.format, "Output format: text|json (solve, metrics), svg|geojson|json (contour, render)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted Fermat-Torricelli-Weber points and trifocal level curves"};
    app.require_subcommand(1);

    Options opt;
    auto* solve = app.add_subcommand("solve", "Minimize the weighted distance sum");
    auto* contour = app.add_subcommand("contour", "Extract level curves");
    auto* metrics = app.add_subcommand("metrics", "Area and perimeter of the region enclosed by a level curve");
    auto* render = app.add_subcommand("render", "Render level curves as SVG or GeoJSON");
    for (auto* cmd : {solve, contour, metrics, render}) add_problem_options(cmd, opt);
    solve->add_option("--max-iter", opt.max_iter, "Iteration limit of the solver")->check(CLI::PositiveNumber);

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string host = "127.0.0.1";
    int port = trifocal::service::kDefaultPort;
    std::string scenario_dir = TRIFOCAL_DATA_DIR;
    serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--scenario-dir", scenario_dir, "Directory listed by GET /api/scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*solve) return run_solve(opt);
        if (*contour) return run_contour(opt, "json");
        if (*metrics) return run_metrics(opt);
        if (*render) return run_contour(opt, "svg");
        if (*serve) return run_serve(host, port, scenario_dir);
    } catch (const NonConvergence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const trifocal::LevelBelowMinimum& e) {
        std::cerr << "error: " << e.what() << " (s0 = " << number(e.s0()) << ")\n";
        return kExitValidation;
    } catch (const trifocal::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const trifocal::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const trifocal::RegionNotContained& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const trifocal::OutOfBounds& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const trifocal::PreconditionViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
