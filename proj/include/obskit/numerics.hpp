#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace obskit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numeric tolerances shared across modules.
struct ToleranceConfig {
    double rank_rtol = 1e-10;   // relative to the largest singular value
    double integ_step = 1e-4;   // seconds
    double fd_step = 1e-4;      // state perturbation for spatial differences

    void validate() const;
};

/// Time-dependent vector field x' = rhs(t, x).
using VectorField = std::function<Vector(double t, const Vector& x)>;

struct Trajectory {
    std::vector<double> t;
    std::vector<Vector> x;

    std::size_t size() const { return t.size(); }
    const Vector& back() const { return x.back(); }
};

/// One classic Runge-Kutta step.
Vector rk4_step(const VectorField& rhs, double t, const Vector& x, double h);

/// Fixed-step RK4 from t0 to t1. When (t1 - t0) is an integer multiple of
/// `step` (to 1e-9 relative) the grid is exactly uniform; otherwise the last
/// step is shortened so the final sample lands on t1.
/// Throws IntegrationDiverged on the first non-finite state.
Trajectory integrate_rk4(const VectorField& rhs, const Vector& x0, double t0, double t1,
                         double step);

/// Uniform sample times used by integrate_rk4 for the given span.
std::vector<double> rk4_grid(double t0, double t1, double step);

struct SymmetricEigen {
    Vector values;   // ascending
    Matrix vectors;  // orthonormal columns
};

/// Eigen-decomposition of (W + W^T)/2.
SymmetricEigen symmetric_eig(const Matrix& W);

/// Number of singular values above rtol * sigma_max. The zero matrix has rank 0.
int numeric_rank(const Matrix& M, double rtol = 1e-10);

/// 2-norm condition number; infinity for singular input.
double condition_number(const Matrix& M);

/// Composite trapezoid rule over uniformly spaced samples.
double trapezoid(std::span<const double> samples, double step);

/// Trapezoid weights (step/2, step, ..., step, step/2) for `count` samples.
std::vector<double> trapezoid_weights(std::size_t count, double step);

/// Finite-difference weights for the derivative of order `order` at `x0`
/// using arbitrary nodes (Fornberg's recursion).
std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order);

/// Central-difference derivative with one Richardson extrapolation level:
/// (4 D(h/2) - D(h)) / 3.
double richardson_central(const std::function<double(double)>& f, double x, double h);

}  // namespace obskit
