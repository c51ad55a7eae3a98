#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "obskit/app/config.hpp"
#include "obskit/placement.hpp"
#include "obskit/wing_sensing.hpp"

namespace obskit::app {

struct CommandOutput {
    json summary;
    std::vector<fs::path> files;
};

WingSensingConfig sensing_config(const RunConfig& cfg);

struct GridSweep {
    StrainKind kind = StrainKind::bending;
    std::vector<Point2> stations;
    std::vector<GramianResult> results;
    double cell_x = 0.0;
    double cell_y = 0.0;
};

/// Per-station Gramians of encoded strain on the configured grid.
GridSweep gramian_grid(const WingSensitivity& sens, const RunConfig& cfg, StrainKind kind);

/// Spatial means and extremal stations of a sweep.
json grid_summary(const GridSweep& sweep, const Polygon& planform);

struct NlaSweepRow {
    double c = 0.0;
    double d = 0.0;
    double mean_det_root = 0.0;
    double slope_sq = 0.0;  // (dNLA/dxi)^2 at the spatiotemporal-mean xi
};

struct NlaSweep {
    std::vector<NlaSweepRow> rows;
    double mean_xi = 0.0;
    double correlation = 0.0;
};

NlaSweep nla_sweep(const WingSensitivity& sens, const RunConfig& cfg);

struct PlacementRun {
    std::vector<Polyline> veins;
    PlacementProblem problem;
    PlacementResult result;
};

PlacementRun run_placement(const WingSensitivity& sens, const RunConfig& cfg);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

CommandOutput cmd_simulate(const RunConfig& cfg);
CommandOutput cmd_gramian_grid(const RunConfig& cfg);
CommandOutput cmd_place(const RunConfig& cfg);
CommandOutput cmd_nla_sweep(const RunConfig& cfg);
CommandOutput cmd_lie_check(const RunConfig& cfg);
CommandOutput cmd_linear_delay(const RunConfig& cfg);

/// Dispatches by subcommand name; throws ConfigError for unknown names.
CommandOutput run_command(const std::string& name, const RunConfig& cfg);

const std::vector<std::string>& command_names();

}  // namespace obskit::app
