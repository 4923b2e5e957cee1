#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <string>

#include "json.hpp"
#include "oracles.hpp"
#include "trifocal/geo.hpp"

namespace trifocal {
namespace {

using nlohmann::json;

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string("\"") + TRIFOCAL_CLI + "\" " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

TEST(Cli, SolveEquilateralAsJson) {
    const auto r = run("solve --focus 0,0 --focus 1,0 --focus 0.5,0.8660254037844386 --format json");
    ASSERT_EQ(r.exit_code, 0);
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["s0"].get<double>(), std::sqrt(3.0), 1e-9);
    EXPECT_EQ(j["status"], "interior");
}

TEST(Cli, NegativeCoordinatesParse) {
    const auto r = run("solve --focus -1,0 --focus 1,0 --focus 0,-2 --format json");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_NEAR(json::parse(r.out)["point"]["x"].get<double>(), 0.0, 1e-9);
}

TEST(Cli, SolveScenarioPrintsLocationNearPleven) {
    const auto r = run("solve --scenario south-stream.scenario --format json");
    ASSERT_EQ(r.exit_code, 0);
    const json j = json::parse(r.out);
    EXPECT_EQ(j["scenario"], "south-stream");
    const double km = oracle::haversine_km(j["location"]["lon"], j["location"]["lat"], 24.6167, 43.4167);
    EXPECT_LT(km, 150.0);
    const auto text = run("solve --scenario south-stream.scenario");
    EXPECT_NE(text.out.find("location   lon "), std::string::npos);
}

TEST(Cli, ContourGeojsonHasOneClosedRing) {
    const auto r = run("contour --focus 0,0 --focus 1,0 --focus 0.5,0.8660254037844386 --s 2 --format geojson");
    ASSERT_EQ(r.exit_code, 0);
    const json j = json::parse(r.out);
    int polygons = 0;
    for (const auto& f : j["features"]) {
        if (f["geometry"]["type"] != "Polygon") continue;
        ++polygons;
        const auto& ring = f["geometry"]["coordinates"][0];
        EXPECT_EQ(ring.front(), ring.back());
        EXPECT_EQ(f["properties"]["level"], 2.0);
    }
    EXPECT_EQ(polygons, 1);
}

TEST(Cli, RenderSvg) {
    const auto r = run("render --focus 0,0 --focus 1,0 --focus 0.5,0.8 --levels 1.9,2.5 --resolution 128");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out.rfind("<svg", 0), 0u);
    std::size_t paths = 0;
    for (std::size_t at = 0; (at = r.out.find("class=\"isoline\"", at)) != std::string::npos; ++at) ++paths;
    EXPECT_EQ(paths, 2u);
    EXPECT_NE(r.out.find("class=\"optimum\""), std::string::npos);
}

TEST(Cli, MetricsDisc) {
    const auto r = run("metrics --focus 0,0 --focus 0,0 --focus 0,0 --s 3 --box -1.5,-1.5,1.5,1.5 --resolution 256 --format json");
    ASSERT_EQ(r.exit_code, 0);
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["area"].get<double>(), M_PI, 1e-3);
    EXPECT_NEAR(j["perimeter"].get<double>(), 2 * M_PI, 1e-3);
}

TEST(Cli, MetricsScenarioReportsKilometres) {
    const auto r = run("metrics --scenario south-stream.scenario --resolution 128 --format json");
    ASSERT_EQ(r.exit_code, 0);
    const json j = json::parse(r.out);
    EXPECT_GT(j["area_km2"].get<double>(), 0.0);
    EXPECT_GT(j["perimeter_km"].get<double>(), 0.0);
}

TEST(Cli, ValidationErrorsExitWithTwo) {
    EXPECT_EQ(run("solve --focus 0,0,-1 --focus 1,0 --focus 0,1").exit_code, 2);
    EXPECT_EQ(run("solve --focus 0,0 --focus 1,0").exit_code, 2);
    EXPECT_EQ(run("solve --focus 0,0 --focus 1,0 --focus a,b").exit_code, 2);
    EXPECT_EQ(run("solve --focus 0,0 --focus 1,0 --focus 0,1 --metric 0.5").exit_code, 2);
    EXPECT_EQ(run("contour --focus 0,0 --focus 1,0 --focus 0,1 --s 0.1").exit_code, 2);
    EXPECT_EQ(run("solve --scenario no-such.scenario").exit_code, 2);
    EXPECT_EQ(run("solve --bogus-flag").exit_code, 2);
    EXPECT_EQ(run("").exit_code, 2);
}

TEST(Cli, NonConvergenceExitsWithThree) {
    EXPECT_EQ(run("solve --focus 0,0 --focus 1,0 --focus 0.3,0.8 --max-iter 1").exit_code, 3);
    EXPECT_EQ(run("solve --focus 0,0 --focus 1,0 --focus 0.3,0.8 --metric 3 --max-iter 3").exit_code, 3);
}

TEST(Cli, WritesOutputFile) {
    const std::string path = ::testing::TempDir() + "trifocal_cli_test.geojson";
    std::remove(path.c_str());
    const auto r = run("render --scenario south-stream.scenario --format geojson --out \"" + path + "\"");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_TRUE(r.out.empty());
    FILE* f = std::fopen(path.c_str(), "rb");
    ASSERT_NE(f, nullptr);
    std::fclose(f);
}

}  // namespace
}  // namespace trifocal
