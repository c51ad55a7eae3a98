#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "obskit/neural_encoding.hpp"
#include "obskit/placement.hpp"
#include "obskit/wing_model.hpp"

namespace obskit::app {

using nlohmann::json;
namespace fs = std::filesystem;

struct GridSpec {
    int nx = 7;   // chordwise stations
    int ny = 17;  // spanwise stations
};

struct GramianSpec {
    double epsilon = 1e-3;
    std::vector<int> perturb;  // empty: body rates
};

struct PlacementSpec {
    int r = 20;
    double w_nu = 20.0;
    fs::path veins;
    std::uint64_t seed = 0;
    double spacing = 0.002;
    int iterations = 300;
    int restarts = 5;
};

struct NlaSweepSpec {
    StrainKind kind = StrainKind::bending;
    std::vector<double> c_values;
    std::vector<double> d_values;
};

struct LieCheckSpec {
    std::string system = "double-integrator-tanh";
    std::vector<double> state;
    StrainKind kind = StrainKind::bending;
    Point2 probe = Point2(0.008, 0.01);
};

struct RunConfig {
    fs::path base_dir;
    WingModel model;
    EncoderParams encoder;
    StrokeParams stroke;
    GridSpec grid;
    GramianSpec gramian;
    PlacementSpec placement;
    std::vector<Point2> probes;
    NlaSweepSpec nla_sweep;
    LieCheckSpec lie_check;
    json linear_delay;  // inline system document
    fs::path output_dir;
    bool periodic_start = true;
};

struct CliOverrides {
    bool full = false;
    std::optional<fs::path> out;
    std::optional<std::uint64_t> seed;
};

json read_json_file(const fs::path& path);

/// Model document: {n_m, modes: "builtin:n2"|"builtin:n3"|"file:<grid json>",
/// planform, x_r, thickness, material, Omega_diag?, Ma?}. Paths are relative
/// to `base_dir`.
WingModel load_wing_model(const json& doc, const fs::path& base_dir);

EncoderParams parse_encoder(const json& doc);
StrokeParams parse_stroke(const json& doc);
std::vector<Polyline> parse_polylines(const json& doc);

RunConfig load_run_config(const fs::path& path, const CliOverrides& overrides = {});
RunConfig parse_run_config(const json& doc, const fs::path& base_dir, const CliOverrides& overrides = {});

std::vector<double> default_c_values();  // 1, 3, ..., 29 plus 10
std::vector<double> default_d_values();  // -1.0, -0.8, ..., 1.0 plus 0.5

}  // namespace obskit::app
