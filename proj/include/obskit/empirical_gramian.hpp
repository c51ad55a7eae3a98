#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "obskit/numerics.hpp"

namespace obskit {

/// Output samples on a uniform grid starting at the perturbation instant.
struct OutputSeries {
    double step = 0.0;
    Matrix y;  // rows: samples, columns: output channels
};

/// Deterministic simulator: initial state -> output series.
using OutputSimulator = std::function<OutputSeries(const Vector& x0)>;

struct GramianJob {
    OutputSimulator system;
    Vector x0;
    std::vector<int> perturb_indices;
    double epsilon = 1e-3;
    double t1 = std::numeric_limits<double>::infinity();  // quadrature horizon

    void validate() const;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct GramianMetrics {
    double nu = kInfinity;     // 1 / lambda_min, infinite when singular
    double kappa = kInfinity;  // lambda_max / lambda_min
    double det_root = 0.0;     // det(W)^(1/n)
    std::optional<double> log_det;
    double trace = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    int rank = 0;
    bool singular = true;
};

struct GramianResult {
    Matrix W;
    Vector eigenvalues;  // ascending
    GramianMetrics metrics;

    int dim() const { return static_cast<int>(W.rows()); }
};

GramianMetrics gramian_metrics(const Matrix& W, double rtol = 1e-10);

/// Symmetrizes W and attaches eigenvalues and metrics.
GramianResult make_gramian_result(const Matrix& W, double rtol = 1e-10);

/// (1 / 4 eps^2) * integral Phi^T Phi dt, where deltas[i] holds y^{+i} - y^{-i}
/// (samples x outputs) on a grid of spacing `step`.
Matrix gramian_from_differences(const std::vector<Matrix>& deltas, double step, double epsilon);

GramianResult empirical_gramian(const GramianJob& job, double rtol = 1e-10);

/// integral_{t0}^{T} exp(A^T t) C^T C exp(A t) dt by composite Simpson over
/// matrix exponentials.
Matrix analytic_lti_gramian(const Matrix& A, const Matrix& C, double t0, double T,
                            int intervals = 4000);

struct ObservabilityVerdict {
    bool observable = false;
    int rank = 0;
    int dim = 0;
    double lambda_min = 0.0;
    int rank_gap = 0;
};

ObservabilityVerdict weak_observability(const GramianResult& result, double rtol = 1e-10);

}  // namespace obskit
