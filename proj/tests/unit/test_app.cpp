#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "obskit/app/commands.hpp"
#include "obskit/app/io.hpp"
#include "obskit/app/svg.hpp"
#include "obskit/errors.hpp"
#include "xml_check.hpp"

using namespace obskit;
using namespace obskit::app;

namespace {

const fs::path kData = OBSKIT_DATA_DIR;

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("obskit_app_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json default_doc() { return read_json_file(kData / "config_default.json"); }

RunConfig config_from(json doc, const std::string& name) {
    CliOverrides o;
    o.out = scratch_dir(name);
    return parse_run_config(doc, kData, o);
}

}  // namespace

TEST(Io, FormatDoubleRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-19, 123456789.125}) EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(INFINITY), "inf");
    EXPECT_TRUE(number_or_null(INFINITY).is_null());
    EXPECT_EQ(number_or_null(2.0).get<double>(), 2.0);
}

TEST(Io, CsvHeaderAndWidth) {
    CsvWriter w("demo", {"a", "b"});
    w.add_row(std::vector<double>{1.0, 2.5});
    EXPECT_EQ(w.str(), "# obskit demo v1\na,b\n1,2.5\n");
    EXPECT_THROW(w.add_row(std::vector<double>{1.0}), DimensionError);
}

TEST(Io, ParallelForVisitsEachIndexOnce) {
    setenv("OBSKIT_THREADS", "3", 1);
    EXPECT_EQ(worker_count(), 3);
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                     if (i == 7) throw NumericError("boom");
                 }),
                 NumericError);
    unsetenv("OBSKIT_THREADS");
}

TEST(Svg, WellFormedAndEscaped) {
    EXPECT_EQ(xml_escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    Polygon sq{{Point2(0, 0), Point2(0.01, 0), Point2(0.01, 0.01), Point2(0, 0.01)}};
    std::vector<Point2> st{Point2(0.0025, 0.0025), Point2(0.0075, 0.0075)};
    const std::string s = heatmap_svg(sq, st, {1.0, 2.0}, 0.005, 0.005, "t <1>");
    EXPECT_EQ(obskit::testing::xml_problem(s), "");
    EXPECT_TRUE(obskit::testing::svg_self_contained(s));
    // Constant values must not divide by zero during normalization.
    EXPECT_EQ(obskit::testing::xml_problem(heatmap_svg(sq, st, {1.0, 1.0}, 0.005, 0.005, "flat")), "");
}

TEST(Config, DefaultsAndOverrides) {
    CliOverrides o;
    o.full = true;
    o.seed = 42;
    o.out = "/tmp/x";
    RunConfig cfg = parse_run_config(default_doc(), kData, o);
    EXPECT_EQ(cfg.grid.nx, 21);
    EXPECT_EQ(cfg.grid.ny, 51);
    EXPECT_EQ(cfg.placement.seed, 42u);
    EXPECT_EQ(cfg.output_dir, fs::path("/tmp/x"));
    EXPECT_NEAR(cfg.stroke.A_alpha, M_PI / 3, 1e-15);
    EXPECT_EQ(cfg.model.n_m, 2);
    EXPECT_EQ(cfg.nla_sweep.c_values.size() * cfg.nla_sweep.d_values.size(), 192u);
    EXPECT_TRUE(std::is_sorted(cfg.nla_sweep.c_values.begin(), cfg.nla_sweep.c_values.end()));
    bool has10 = false, has05 = false;
    for (double c : cfg.nla_sweep.c_values) has10 |= c == 10.0;
    for (double d : cfg.nla_sweep.d_values) has05 |= std::abs(d - 0.5) < 1e-12;
    EXPECT_TRUE(has10);
    EXPECT_TRUE(has05);
}

TEST(Config, Errors) {
    json doc = default_doc();
    doc["gramian"]["perturb"] = "everything";
    EXPECT_THROW(parse_run_config(doc, kData), ConfigError);
    doc = default_doc();
    doc["model"] = "missing.json";
    EXPECT_THROW(parse_run_config(doc, kData), ConfigError);
    doc = default_doc();
    doc["encoder"]["b"] = -1.0;
    EXPECT_THROW(parse_run_config(doc, kData), ConfigError);
    EXPECT_THROW(load_run_config(kData / "nope.json"), ConfigError);
}

TEST(Config, ModelOverrides) {
    json model = read_json_file(kData / "wing_default.json");
    model["Omega_diag"] = {1000.0, 2000.0};
    WingModel m = load_wing_model(model, kData);
    EXPECT_EQ(m.omega_diag(1), 2000.0);
    model["n_m"] = 3;
    EXPECT_THROW(load_wing_model(model, kData), ConfigError);
}

TEST(Commands, SimulateWritesFiniteSeries) {
    RunConfig cfg = config_from(default_doc(), "simulate");
    auto out = cmd_simulate(cfg);
    ASSERT_EQ(out.files.size(), 3u);
    const std::string strain = slurp(cfg.output_dir / "strain.csv");
    EXPECT_EQ(strain.rfind("# obskit simulate-strain v1\n", 0), 0u);
    EXPECT_EQ(strain.find("nan"), std::string::npos);
    EXPECT_EQ(strain.find("inf"), std::string::npos);
}

TEST(Commands, ZeroAmplitudeGivesZeroStrain) {
    json doc = default_doc();
    doc["kinematics"] = {{"A_psi", 0.0}, {"A_alpha", 0.0}, {"T_beat", 0.04}, {"periodic_start", false}};
    RunConfig cfg = config_from(doc, "still");
    cmd_simulate(cfg);
    std::istringstream in(slurp(cfg.output_dir / "strain.csv"));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');
        while (std::getline(cells, cell, ',')) EXPECT_EQ(std::stod(cell), 0.0);
        ++rows;
    }
    EXPECT_EQ(rows, 801);
}

TEST(Commands, ProbeOutsidePlanformIsGeometryError) {
    json doc = default_doc();
    doc["probes"] = {{0.05, 0.01}};
    EXPECT_THROW(cmd_simulate(config_from(doc, "outside")), GeometryError);
}

TEST(Commands, CoarseGramianGridHasBoundedKappa) {
    json doc = default_doc();
    doc["grid"] = {{"nx", 5}, {"ny", 9}};
    RunConfig cfg = config_from(doc, "grid");
    auto out = cmd_gramian_grid(cfg);
    for (const char* kind : {"bending", "shear"}) {
        const std::string svg = slurp(cfg.output_dir / (std::string("heatmap_") + kind + ".svg"));
        EXPECT_EQ(obskit::testing::xml_problem(svg), "");
        EXPECT_TRUE(obskit::testing::svg_self_contained(svg));
        std::istringstream in(slurp(cfg.output_dir / (std::string("gramian_grid_") + kind + ".csv")));
        std::string line;
        std::getline(in, line);
        EXPECT_EQ(line, "# obskit gramian-grid v1");
        std::getline(in, line);
        int rows = 0;
        while (std::getline(in, line)) {
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string c;
            while (std::getline(ss, c, ',')) cells.push_back(c);
            ASSERT_EQ(cells.size(), 12u);
            const double kappa = cells[10] == "inf" ? INFINITY : std::stod(cells[10]);
            EXPECT_GE(kappa, 1.0);
            ++rows;
        }
        EXPECT_EQ(rows, out.summary[kind]["stations"].get<int>());
    }
}

TEST(Commands, PlacementBoundaryCounts) {
    const fs::path dir = scratch_dir("veins");
    write_text_file(dir / "veins.json", "[[[0.004, 0.006], [0.006, 0.030]]]\n");
    json doc = default_doc();
    doc["placement"]["veins"] = (dir / "veins.json").string();
    doc["placement"]["r"] = 1;
    RunConfig cfg = config_from(doc, "place1");
    cmd_place(cfg);
    json one = read_json_file(cfg.output_dir / "placement.json");
    ASSERT_EQ(one["selected"].size(), 1u);
    // The single site is the best individual objective.
    const WingSensitivity sens(cfg.model, cfg.stroke, sensing_config(cfg));
    PlacementRun run = run_placement(sens, cfg);
    double best = INFINITY;
    for (const auto& s : run.problem.sites) best = std::min(best, placement_objective(s.gramian.W, cfg.placement.w_nu));
    EXPECT_NEAR(one["selected_objective"].get<double>(), best, 1e-9 * best);

    const int total = static_cast<int>(run.problem.sites.size());
    doc["placement"]["r"] = total;
    RunConfig all_cfg = config_from(doc, "placeall");
    cmd_place(all_cfg);
    json all = read_json_file(all_cfg.output_dir / "placement.json");
    EXPECT_EQ(static_cast<int>(all["selected"].size()), total);
    for (const auto& b : all["beta"]) EXPECT_NEAR(b.get<double>(), 1.0, 1e-9);
    EXPECT_EQ(obskit::testing::xml_problem(slurp(all_cfg.output_dir / "placement.svg")), "");
}

TEST(Commands, LieCheckAndLinearDelay) {
    RunConfig cfg = config_from(default_doc(), "lie");
    auto lie = cmd_lie_check(cfg);
    EXPECT_TRUE(lie.summary["relation_holds"].get<bool>());
    EXPECT_NEAR(lie.summary["det_goh"].get<double>(), lie.summary["sech4_x1"].get<double>(), 1e-4);

    auto ld = cmd_linear_delay(cfg);
    EXPECT_EQ(ld.summary["rank_delayed"].get<int>(), 1);
    EXPECT_EQ(ld.summary["rank_delayfree"].get<int>(), 2);
    EXPECT_FALSE(ld.summary["observable"].get<bool>());

    json doc = default_doc();
    doc["lie_check"] = {{"system", "wing-autonomous"}, {"probe", {0.008, 0.01}}};
    auto wing = cmd_lie_check(config_from(doc, "lie_wing"));
    EXPECT_EQ(wing.summary["state"].size(), 7u);

    doc["lie_check"] = {{"system", "unknown"}};
    EXPECT_THROW(cmd_lie_check(config_from(doc, "lie_bad")), ConfigError);
    EXPECT_THROW(run_command("nonsense", cfg), ConfigError);
}

TEST(Commands, ThreadCountDoesNotChangeOutputs) {
    json doc = default_doc();
    doc["grid"] = {{"nx", 5}, {"ny", 9}};
    setenv("OBSKIT_THREADS", "1", 1);
    RunConfig a = config_from(doc, "threads1");
    cmd_gramian_grid(a);
    setenv("OBSKIT_THREADS", "4", 1);
    RunConfig b = config_from(doc, "threads4");
    cmd_gramian_grid(b);
    unsetenv("OBSKIT_THREADS");
    for (const char* f : {"gramian_grid_bending.csv", "gramian_grid_shear.csv", "gramian_grid_summary.json"}) {
        EXPECT_EQ(slurp(a.output_dir / f), slurp(b.output_dir / f)) << f;
    }
}
