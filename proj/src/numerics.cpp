#include "obskit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "obskit/errors.hpp"

namespace obskit {

void ToleranceConfig::validate() const {
    if (!(rank_rtol > 0.0) || !(integ_step > 0.0) || !(fd_step > 0.0)) {
        throw ConfigError("tolerances must be strictly positive");
    }
}

Vector rk4_step(const VectorField& rhs, double t, const Vector& x, double h) {
    const double half = 0.5 * h;
    const Vector k1 = rhs(t, x);
    const Vector k2 = rhs(t + half, x + half * k1);
    const Vector k3 = rhs(t + half, x + half * k2);
    const Vector k4 = rhs(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<double> rk4_grid(double t0, double t1, double step) {
    if (!(t1 > t0)) throw InputError("integration span must satisfy t1 > t0");
    if (!(step > 0.0)) throw InputError("integration step must be positive");

    const double ratio = (t1 - t0) / step;
    const double whole = std::round(ratio);
    std::vector<double> grid;
    if (whole >= 1.0 && std::abs(ratio - whole) <= 1e-9 * std::max(1.0, whole)) {
        const auto n = static_cast<std::size_t>(whole);
        grid.reserve(n + 1);
        for (std::size_t i = 0; i < n; ++i) {
            grid.push_back(t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n));
        }
        grid.push_back(t1);
        return grid;
    }
    const auto n = static_cast<std::size_t>(std::floor(ratio));
    grid.reserve(n + 2);
    for (std::size_t i = 0; i <= n; ++i) grid.push_back(t0 + static_cast<double>(i) * step);
    if (grid.back() < t1) grid.push_back(t1);
    return grid;
}

Trajectory integrate_rk4(const VectorField& rhs, const Vector& x0, double t0, double t1,
                         double step) {
    Trajectory traj;
    traj.t = rk4_grid(t0, t1, step);
    traj.x.reserve(traj.t.size());
    traj.x.push_back(x0);
    for (std::size_t i = 1; i < traj.t.size(); ++i) {
        const double h = traj.t[i] - traj.t[i - 1];
        Vector next = rk4_step(rhs, traj.t[i - 1], traj.x.back(), h);
        if (!next.allFinite()) {
            std::ostringstream msg;
            msg << "integration diverged at t = " << traj.t[i];
            throw IntegrationDiverged(traj.t[i], msg.str());
        }
        traj.x.push_back(std::move(next));
    }
    return traj;
}

SymmetricEigen symmetric_eig(const Matrix& W) {
    if (W.rows() != W.cols()) throw DimensionError("symmetric_eig: matrix is not square");
    if (W.size() == 0) return {};
    const Matrix sym = 0.5 * (W + W.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericError("symmetric_eig: no convergence");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

int numeric_rank(const Matrix& M, double rtol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(M);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    const double threshold = rtol * s(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > threshold) ++rank;
    }
    return rank;
}

double condition_number(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M);
    const Vector& s = svd.singularValues();
    if (s.size() == 0) return 0.0;
    const double smin = s(s.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

double trapezoid(std::span<const double> samples, double step) {
    if (samples.size() < 2) throw InputError("trapezoid: need at least two samples");
    double interior = 0.0;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) interior += samples[i];
    return step * (0.5 * (samples.front() + samples.back()) + interior);
}

std::vector<double> trapezoid_weights(std::size_t count, double step) {
    if (count < 2) throw InputError("trapezoid: need at least two samples");
    std::vector<double> w(count, step);
    w.front() = 0.5 * step;
    w.back() = 0.5 * step;
    return w;
}

std::vector<double> fd_weights(double x0, std::span<const double> nodes, int order) {
    // Fornberg (1988), "Generation of finite difference formulas on arbitrarily
    // spaced grids".
    const int n = static_cast<int>(nodes.size()) - 1;
    if (order < 0 || n < order) throw InputError("fd_weights: not enough nodes for order");
    std::vector<std::vector<double>> c(n + 1, std::vector<double>(order + 1, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) {
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> weights(n + 1);
    for (int i = 0; i <= n; ++i) weights[i] = c[i][order];
    return weights;
}

double richardson_central(const std::function<double(double)>& f, double x, double h) {
    const auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

}  // namespace obskit
