#pragma once

#include <cstdint>
#include <vector>

#include "obskit/empirical_gramian.hpp"
#include "obskit/wing_model.hpp"

namespace obskit {

using Polyline = std::vector<Point2>;

struct SensorSite {
    Point2 position = Point2::Zero();
    StrainKind kind = StrainKind::bending;
    GramianResult gramian;
};

struct PlacementProblem {
    std::vector<SensorSite> sites;
    int r = 20;
    double w_nu = 20.0;

    void validate() const;
};

/// Cell-centred nx x ny grid over the planform bounding box, keeping the
/// stations inside the planform. Row-major with x varying fastest.
std::vector<Point2> grid_sites(const Polygon& planform, int nx, int ny);
std::vector<Point2> grid_sites(const WingModel& model, int nx, int ny);

/// Arc-length resampling of each polyline with spacing no larger than
/// `spacing`. Open polylines keep both endpoints; closed ones (first point
/// repeated at the end) get uniformly spaced points without the duplicate.
std::vector<Point2> vein_sites(const std::vector<Polyline>& veins, double spacing);

Matrix combined_gramian(const Vector& beta, const std::vector<SensorSite>& sites);

/// kappa + w_nu * nu of W; infinity when W is singular.
double placement_objective(const Matrix& W, double w_nu, double rtol = 1e-10);

/// Euclidean projection onto {0 <= beta <= 1, sum beta = r}.
Vector project_capped_simplex(const Vector& v, double r);

/// Indices of the r largest entries of beta in ascending order. Entries
/// within 1e-12 count as tied and are ordered by larger `tie_key`, then by
/// smaller index.
std::vector<int> round_to_discrete(const Vector& beta, int r, const std::vector<double>& tie_key = {});

struct PlacementOptions {
    int iterations = 300;    // per restart
    int restarts = 5;        // the first starts from the uniform vector
    double step0 = 1.0;      // step length alpha0 / sqrt(t + 1) on the normalized subgradient
    std::uint64_t seed = 0;
    bool refine_swaps = true;  // single-exchange improvement of the rounded set
};

struct PlacementResult {
    Vector beta;                   // best relaxed weights found
    double objective = kInfinity;  // objective at beta
    std::vector<int> selected;     // discrete sensor set, ascending
    double selected_objective = kInfinity;
    std::vector<double> trace;     // best objective after each iteration
    int iterations = 0;
};

PlacementResult optimize_placement(const PlacementProblem& problem, const PlacementOptions& options = {});

/// Objective of the equally weighted discrete selection.
double selection_objective(const PlacementProblem& problem, const std::vector<int>& selected);

}  // namespace obskit
