#pragma once

// Map calibration (equirectangular, affine), pixel <-> lon/lat transforms and
// the scenario document format:
//
//   # comment
//   name = south-stream
//   s = 30                 (optional default level)
//   [map]
//   image = south-stream.png   (optional)
//   width = 1200
//   height = 900
//   west = 15  east = 42  south = 36  north = 50   (one key per line)
//   [focus]
//   name = Beregovaya
//   lon = 38.53
//   lat = 44.39
//   weight = 1             (optional, default 1)
//
// with exactly three [focus] sections.

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "trifocal/error.hpp"
#include "trifocal/fermat.hpp"
#include "trifocal/geometry.hpp"

namespace trifocal {

struct GeoPoint {
    double lon = 0.0;
    double lat = 0.0;
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

class MapCalibration {
public:
    MapCalibration(double width, double height, double west, double east, double south, double north)
        : width_(width), height_(height), west_(west), east_(east), south_(south), north_(north) {
        for (double v : {width, height, west, east, south, north})
            if (!std::isfinite(v)) throw InvalidArgument("map calibration values must be finite");
        if (!(width > 0.0) || !(height > 0.0)) throw InvalidArgument("map image size must be positive");
        if (!(west < east)) throw InvalidArgument("map bounds require west < east");
        if (!(south < north)) throw InvalidArgument("map bounds require south < north");
    }

    double width() const noexcept { return width_; }
    double height() const noexcept { return height_; }
    double west() const noexcept { return west_; }
    double east() const noexcept { return east_; }
    double south() const noexcept { return south_; }
    double north() const noexcept { return north_; }

    bool contains(GeoPoint p) const noexcept {
        return p.lon >= west_ && p.lon <= east_ && p.lat >= south_ && p.lat <= north_;
    }

    friend bool operator==(const MapCalibration&, const MapCalibration&) = default;

private:
    double width_, height_;
    double west_, east_, south_, north_;
};

/// Pixel position of a geographic point; y grows downward from the north edge.
inline Point2 geo_to_pixel(GeoPoint p, const MapCalibration& cal) {
    if (!cal.contains(p)) throw OutOfBounds("geographic point lies outside the map bounds");
    return {cal.width() * (p.lon - cal.west()) / (cal.east() - cal.west()),
            cal.height() * (cal.north() - p.lat) / (cal.north() - cal.south())};
}

inline GeoPoint pixel_to_geo(Point2 q, const MapCalibration& cal) {
    if (!(q.x >= 0.0 && q.x <= cal.width() && q.y >= 0.0 && q.y <= cal.height()))
        throw OutOfBounds("pixel lies outside the map image");
    return {cal.west() + (cal.east() - cal.west()) * (q.x / cal.width()),
            cal.north() - (cal.north() - cal.south()) * (q.y / cal.height())};
}

/// Planar frame in degrees with longitudes scaled by cos(reference latitude).
class PlanarFrame {
public:
    explicit PlanarFrame(double reference_lat_deg)
        : reference_lat_(reference_lat_deg), lon_scale_(std::cos(reference_lat_deg * std::numbers::pi / 180.0)) {}

    double reference_lat() const noexcept { return reference_lat_; }
    Point2 to_plane(GeoPoint g) const noexcept { return {g.lon * lon_scale_, g.lat}; }
    GeoPoint to_geo(Point2 p) const noexcept { return {p.x / lon_scale_, p.y}; }

private:
    double reference_lat_;
    double lon_scale_;
};

struct NamedFocus {
    std::string name;
    GeoPoint location;
    double weight = 1.0;
};

struct Scenario {
    std::string name;
    std::vector<NamedFocus> foci;  // exactly three
    MapCalibration calibration;
    std::optional<std::string> image;
    std::optional<double> default_s;

    /// Frame centred on the mean latitude of the foci.
    PlanarFrame frame() const {
        double lat = 0.0;
        for (const auto& f : foci) lat += f.location.lat;
        return PlanarFrame(lat / static_cast<double>(foci.size()));
    }

    FocusTriple planar_foci() const {
        const PlanarFrame fr = frame();
        return {Focus(fr.to_plane(foci[0].location), foci[0].weight), Focus(fr.to_plane(foci[1].location), foci[1].weight),
                Focus(fr.to_plane(foci[2].location), foci[2].weight)};
    }

    FocusTriple pixel_foci() const {
        return {Focus(geo_to_pixel(foci[0].location, calibration), foci[0].weight),
                Focus(geo_to_pixel(foci[1].location, calibration), foci[1].weight),
                Focus(geo_to_pixel(foci[2].location, calibration), foci[2].weight)};
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_number(std::string_view text, int line, const std::string& field) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw ParseError("field '" + field + "' expects a finite number, got '" + std::string(text) + "'", line, field);
    return v;
}

}  // namespace detail

/// Parses and validates a scenario document. Unknown sections and keys are rejected.
inline Scenario load_scenario(std::string_view document) {
    enum class Section { top, map, focus };
    Section section = Section::top;

    std::optional<std::string> name, image;
    std::optional<double> default_s;
    std::optional<double> map_values[6];  // width height west east south north
    static constexpr const char* kMapKeys[6] = {"width", "height", "west", "east", "south", "north"};
    bool saw_map = false;

    struct PendingFocus {
        int line = 0;
        std::optional<std::string> name;
        std::optional<double> lon, lat, weight;
    };
    std::vector<PendingFocus> foci;
    std::set<std::string> seen_keys;

    int line_no = 0;
    std::istringstream in{std::string(document)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = detail::trim(raw);
        if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line = detail::trim(line.substr(3));
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", line_no, "");
            const auto sec = detail::trim(line.substr(1, line.size() - 2));
            if (sec == "map") {
                if (saw_map) throw ParseError("duplicate [map] section", line_no, "map");
                saw_map = true;
                section = Section::map;
            } else if (sec == "focus") {
                section = Section::focus;
                foci.push_back({line_no, {}, {}, {}, {}});
            } else {
                throw ParseError("unknown section [" + std::string(sec) + "]", line_no, std::string(sec));
            }
            seen_keys.clear();
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, "");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no, "");
        if (!seen_keys.insert(key).second) throw ParseError("duplicate field '" + key + "'", line_no, key);

        switch (section) {
            case Section::top:
                if (key == "name") name = std::string(value);
                else if (key == "s") default_s = detail::parse_number(value, line_no, key);
                else throw ParseError("unknown field '" + key + "'", line_no, key);
                break;
            case Section::map: {
                if (key == "image") {
                    image = std::string(value);
                    break;
                }
                bool known = false;
                for (int k = 0; k < 6; ++k) {
                    if (key == kMapKeys[k]) {
                        map_values[k] = detail::parse_number(value, line_no, "map." + key);
                        known = true;
                    }
                }
                if (!known) throw ParseError("unknown field 'map." + key + "'", line_no, "map." + key);
                break;
            }
            case Section::focus: {
                auto& f = foci.back();
                if (key == "name") f.name = std::string(value);
                else if (key == "lon") f.lon = detail::parse_number(value, line_no, "focus.lon");
                else if (key == "lat") f.lat = detail::parse_number(value, line_no, "focus.lat");
                else if (key == "weight") f.weight = detail::parse_number(value, line_no, "focus.weight");
                else throw ParseError("unknown field 'focus." + key + "'", line_no, "focus." + key);
                break;
            }
        }
    }

    if (!saw_map) throw ParseError("missing [map] section", 0, "map");
    for (int k = 0; k < 6; ++k)
        if (!map_values[k]) throw ParseError(std::string("missing field 'map.") + kMapKeys[k] + "'", 0,
                                             std::string("map.") + kMapKeys[k]);
    if (foci.size() != 3)
        throw ParseError("expected exactly 3 [focus] sections, found " + std::to_string(foci.size()), 0, "focus");

    std::optional<MapCalibration> cal;
    try {
        cal.emplace(*map_values[0], *map_values[1], *map_values[2], *map_values[3], *map_values[4], *map_values[5]);
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), 0, "map");
    }

    Scenario sc{name.value_or("scenario"), {}, *cal, image, default_s};
    for (const auto& f : foci) {
        if (!f.lon) throw ParseError("focus is missing 'lon'", f.line, "focus.lon");
        if (!f.lat) throw ParseError("focus is missing 'lat'", f.line, "focus.lat");
        const double w = f.weight.value_or(1.0);
        if (!(w > 0.0)) throw ParseError("focus weight must be positive", f.line, "focus.weight");
        const GeoPoint g{*f.lon, *f.lat};
        if (!sc.calibration.contains(g)) throw ParseError("focus lies outside the map bounds", f.line, "focus");
        sc.foci.push_back({f.name.value_or("focus " + std::to_string(sc.foci.size() + 1)), g, w});
    }
    if (sc.default_s && !(*sc.default_s > 0.0)) throw ParseError("default level 's' must be positive", 0, "s");
    return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << file.rdbuf();
    return load_scenario(buf.str());
}

struct GeoSolution {
    GeoPoint location;
    SolveResult planar;
};

/// Solves in the longitude-corrected planar frame and maps the result back to lon/lat.
inline GeoSolution solve_scenario(const Scenario& sc, const Metric& metric = Metric{}) {
    const SolveResult r = solve_weber(sc.planar_foci(), metric);
    return {sc.frame().to_geo(r.point), r};
}

/// Solves in map pixel space, the frame a flat map image presents.
inline GeoSolution solve_scenario_pixels(const Scenario& sc, const Metric& metric = Metric{}) {
    const SolveResult r = solve_weber(sc.pixel_foci(), metric);
    return {pixel_to_geo(r.point, sc.calibration), r};
}

}  // namespace trifocal
