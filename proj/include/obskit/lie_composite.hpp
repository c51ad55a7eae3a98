#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "obskit/numerics.hpp"

namespace obskit {

/// Sorted list of positive integers; one term of the higher-order chain rule.
using Multiset = std::vector<int>;

/// Index sets M_{k,j}, j = 1..k, for the k-th Lie derivative of a composition.
/// Repeated multisets are kept: their count is the chain-rule coefficient.
struct MultisetTable {
    int k = 0;
    std::vector<std::vector<Multiset>> sets;  // sets[j - 1] = M_{k,j}

    const std::vector<Multiset>& parts(int j) const;
    /// Number of copies of `s` (order-insensitive) in M_{k,|s|}.
    int multiplicity(Multiset s) const;
    std::size_t total_entries() const;
};

/// Builds M_{k,j} by the two-branch recursion: bump one element of every
/// multiset in M_{k-1,j}, and append a 1 to every multiset in M_{k-1,j-1};
/// starting from M_{1,1} = {{1}}.
MultisetTable multiset_table(int k);

using StateField = std::function<Vector(const Vector&)>;
using ScalarMap = std::function<double(const Vector&)>;

/// Settings for flow-based numeric Lie derivatives.
struct LieConfig {
    double time_step = 0.05;  // spacing of flow samples in t
    int half_width = 6;       // samples on each side of t = 0
    int substeps = 32;        // RK4 steps between consecutive flow samples
    double fd_step = 1e-4;    // spatial step, scaled by max(1, |x_i|)

    void validate() const;
};

/// L_f^0 h .. L_f^{kmax} h at x: time derivatives of t -> h(phi_t(x)) at t = 0,
/// read off a high-order central stencil over RK4 flow samples.
std::vector<double> lie_series(const StateField& f, const ScalarMap& h, const Vector& x, int kmax,
                               const LieConfig& cfg = {});

double lie_derivative(const StateField& f, const ScalarMap& h, const Vector& x, int k,
                      const LieConfig& cfg = {});

/// Gradient of L_f^k h at x by Richardson-extrapolated central differences.
Vector lie_gradient(const StateField& f, const ScalarMap& h, const Vector& x, int k,
                    const LieConfig& cfg = {});

/// Gradients of L_f^0 h .. L_f^{kmax} h (rows of the returned matrix).
Matrix lie_gradients(const StateField& f, const ScalarMap& h, const Vector& x, int kmax,
                     const LieConfig& cfg = {});

/// L_f^k (g o h) from the derivatives g^(1..k) at h(x) and L_f^1..k h at x.
double composite_expansion(std::span<const double> g_derivs, std::span<const double> lie_values,
                           int k);

/// Scalar outer map with derivatives of any order.
struct OuterFunction {
    std::string name;
    std::function<double(double, int)> eval;  // eval(z, order); order 0 is the value

    double operator()(double z) const { return eval(z, 0); }
    double derivative(double z, int order) const { return eval(z, order); }
};

namespace outer {
OuterFunction identity();
OuterFunction tanh();
OuterFunction exp();
/// 1 / (1 + exp(-slope (z - half_max)))
OuterFunction logistic(double slope, double half_max);
OuterFunction constant(double value);
/// Wraps a plain function; derivatives by central finite-difference stencils.
OuterFunction finite_difference(std::function<double(double)> g, double step = 1e-2);
}  // namespace outer

/// Control-free single-output system with composite output g(h(x)).
struct SmoothSystem {
    StateField f0;
    ScalarMap h;
    OuterFunction g;
    int n = 0;
    LieConfig lie;
};

struct CompositeObservability {
    Matrix dG_h;
    Matrix dG_goh;
    double det_h = 0.0;
    double det_goh = 0.0;
    double g_prime = 0.0;
    double residual = 0.0;  // |det_goh - g'^n det_h|
    double tolerance = 0.0;
    int rank_h = 0;
    int rank_goh = 0;
    bool ratio_check = false;
};

/// Rank tolerance for Jacobians assembled from finite differences; their
/// entries carry roughly 1e-8 relative noise, so 1e-10 would never see a
/// rank drop.
inline constexpr double kLieRankRtol = 1e-6;

/// Both observability Jacobians at x and the determinant relation check
/// |det dG_goh - g'^n det dG_h| <= 1e-4 max(1, |det dG_h|).
CompositeObservability observability_matrices(const SmoothSystem& sys, const Vector& x,
                                               double rtol = kLieRankRtol);

/// Output of a windowed-delay system expressed through the state at t - N.
struct DelayedOutputSpec {
    std::function<double(const Vector&, double)> h_aux;  // (x(t - N), tau) -> x_j(t - tau)
    std::function<double(double)> kernel;                // C(tau)
    double window = 0.0;
    int lag_grid = 0;

    void validate() const;
};

struct DelayedJacobianRank {
    Matrix dG_bar;   // integral of C(tau) dG_aux(tau)
    int rank = 0;
    int rank_aux = 0;  // rank of dG_aux(tau) stacked over the lag grid
    bool proposition_holds = false;
};

DelayedJacobianRank delayed_jacobian_rank(const DelayedOutputSpec& spec, const StateField& f0,
                                          const Vector& x_at_tminusN, int n,
                                          const LieConfig& cfg = {}, double rtol = kLieRankRtol);

}  // namespace obskit
