#include "obskit/lie_composite.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "obskit/errors.hpp"

namespace obskit {

// ---------------------------------------------------------------------------
// Multiset table

const std::vector<Multiset>& MultisetTable::parts(int j) const {
    if (j < 1 || j > k) throw InputError("MultisetTable::parts: j out of range");
    return sets[static_cast<std::size_t>(j - 1)];
}

int MultisetTable::multiplicity(Multiset s) const {
    std::sort(s.begin(), s.end());
    const int j = static_cast<int>(s.size());
    if (j < 1 || j > k) return 0;
    return static_cast<int>(std::count(parts(j).begin(), parts(j).end(), s));
}

std::size_t MultisetTable::total_entries() const {
    std::size_t total = 0;
    for (const auto& level : sets) total += level.size();
    return total;
}

MultisetTable multiset_table(int k) {
    if (k < 1) throw InputError("multiset_table: k must be at least 1");

    std::vector<std::vector<Multiset>> prev{{Multiset{1}}};
    for (int order = 2; order <= k; ++order) {
        std::vector<std::vector<Multiset>> next(static_cast<std::size_t>(order));
        for (int j = 1; j <= order; ++j) {
            auto& out = next[static_cast<std::size_t>(j - 1)];
            // Increment each element of every multiset in M_{order-1, j}.
            if (j <= order - 1) {
                for (const auto& s : prev[static_cast<std::size_t>(j - 1)]) {
                    for (std::size_t i = 0; i < s.size(); ++i) {
                        Multiset bumped = s;
                        bumped[i] += 1;
                        std::sort(bumped.begin(), bumped.end());
                        out.push_back(std::move(bumped));
                    }
                }
            }
            // Append a 1 to every multiset in M_{order-1, j-1}.
            if (j >= 2) {
                for (const auto& s : prev[static_cast<std::size_t>(j - 2)]) {
                    Multiset grown = s;
                    grown.push_back(1);
                    std::sort(grown.begin(), grown.end());
                    out.push_back(std::move(grown));
                }
            }
        }
        prev = std::move(next);
    }

    MultisetTable table{k, std::move(prev)};
    for (int j = 1; j <= k; ++j) {
        for (const auto& s : table.parts(j)) {
            int sum = 0;
            for (int v : s) sum += v;
            if (static_cast<int>(s.size()) != j || sum != k) {
                throw NumericError("multiset_table: partition invariant violated");
            }
        }
    }
    return table;
}

double composite_expansion(std::span<const double> g_derivs, std::span<const double> lie_values,
                           int k) {
    if (k < 1) throw InputError("composite_expansion: k must be at least 1");
    if (static_cast<int>(g_derivs.size()) < k || static_cast<int>(lie_values.size()) < k) {
        throw InputError("composite_expansion: need k outer derivatives and k Lie derivatives");
    }
    const MultisetTable table = multiset_table(k);
    double total = 0.0;
    for (int j = 1; j <= k; ++j) {
        double inner = 0.0;
        for (const auto& s : table.parts(j)) {
            double product = 1.0;
            for (int order : s) product *= lie_values[static_cast<std::size_t>(order - 1)];
            inner += product;
        }
        total += g_derivs[static_cast<std::size_t>(j - 1)] * inner;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Flow-based Lie derivatives

void LieConfig::validate() const {
    if (!(time_step > 0.0) || half_width < 1 || substeps < 1 || !(fd_step > 0.0)) {
        throw ConfigError("LieConfig: invalid settings");
    }
}

namespace {

// h(phi_t(x)) for t = j * time_step, j = -half_width .. half_width.
std::vector<double> flow_samples(const StateField& f, const ScalarMap& h, const Vector& x,
                                 const LieConfig& cfg) {
    const int m = cfg.half_width;
    std::vector<double> samples(static_cast<std::size_t>(2 * m + 1));
    const VectorField rhs = [&f](double, const Vector& state) { return f(state); };

    samples[static_cast<std::size_t>(m)] = h(x);
    for (int direction : {1, -1}) {
        const double inner = direction * cfg.time_step / cfg.substeps;
        Vector state = x;
        for (int j = 1; j <= m; ++j) {
            for (int s = 0; s < cfg.substeps; ++s) state = rk4_step(rhs, 0.0, state, inner);
            if (!state.allFinite()) {
                throw EvaluationError("lie_series: flow left the finite domain");
            }
            samples[static_cast<std::size_t>(m + direction * j)] = h(state);
        }
    }
    for (double v : samples) {
        if (!std::isfinite(v)) throw EvaluationError("lie_series: output map returned a non-finite value");
    }
    return samples;
}

const std::vector<std::vector<double>>& stencil(const LieConfig& cfg, int kmax) {
    // Weights depend only on (half_width, time_step, kmax); cache the last set.
    thread_local int cached_m = -1;
    thread_local int cached_k = -1;
    thread_local double cached_dt = 0.0;
    thread_local std::vector<std::vector<double>> weights;
    if (cached_m != cfg.half_width || cached_k < kmax || cached_dt != cfg.time_step) {
        std::vector<double> nodes;
        for (int j = -cfg.half_width; j <= cfg.half_width; ++j) nodes.push_back(j * cfg.time_step);
        weights.clear();
        for (int k = 0; k <= kmax; ++k) weights.push_back(fd_weights(0.0, nodes, k));
        cached_m = cfg.half_width;
        cached_k = kmax;
        cached_dt = cfg.time_step;
    }
    return weights;
}

}  // namespace

std::vector<double> lie_series(const StateField& f, const ScalarMap& h, const Vector& x, int kmax,
                               const LieConfig& cfg) {
    cfg.validate();
    if (kmax < 0) throw InputError("lie_series: order must be non-negative");
    if (kmax > 2 * cfg.half_width) throw InputError("lie_series: order exceeds stencil width");

    const std::vector<double> samples = flow_samples(f, h, x, cfg);
    const auto& weights = stencil(cfg, kmax);
    std::vector<double> out(static_cast<std::size_t>(kmax + 1));
    out[0] = samples[static_cast<std::size_t>(cfg.half_width)];
    for (int k = 1; k <= kmax; ++k) {
        double acc = 0.0;
        const auto& w = weights[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < samples.size(); ++j) acc += w[j] * samples[j];
        out[static_cast<std::size_t>(k)] = acc;
    }
    return out;
}

double lie_derivative(const StateField& f, const ScalarMap& h, const Vector& x, int k,
                      const LieConfig& cfg) {
    if (k == 0) {
        const double v = h(x);
        if (!std::isfinite(v)) throw EvaluationError("lie_derivative: non-finite output");
        return v;
    }
    return lie_series(f, h, x, k, cfg).back();
}

Matrix lie_gradients(const StateField& f, const ScalarMap& h, const Vector& x, int kmax,
                     const LieConfig& cfg) {
    cfg.validate();
    const auto n = x.size();
    Matrix grads(kmax + 1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double step = cfg.fd_step * std::max(1.0, std::abs(x(i)));
        auto shifted = [&](double delta) {
            Vector xs = x;
            xs(i) += delta;
            return lie_series(f, h, xs, kmax, cfg);
        };
        const auto plus_full = shifted(step);
        const auto minus_full = shifted(-step);
        const auto plus_half = shifted(0.5 * step);
        const auto minus_half = shifted(-0.5 * step);
        for (int k = 0; k <= kmax; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            const double d_full = (plus_full[kk] - minus_full[kk]) / (2.0 * step);
            const double d_half = (plus_half[kk] - minus_half[kk]) / step;
            grads(k, i) = (4.0 * d_half - d_full) / 3.0;
        }
    }
    return grads;
}

Vector lie_gradient(const StateField& f, const ScalarMap& h, const Vector& x, int k,
                    const LieConfig& cfg) {
    if (k < 0) throw InputError("lie_gradient: order must be non-negative");
    return lie_gradients(f, h, x, k, cfg).row(k).transpose();
}

// ---------------------------------------------------------------------------
// Outer functions

namespace {

using Poly = std::vector<double>;  // coefficients in ascending powers

Poly poly_derivative(const Poly& p) {
    Poly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.push_back(static_cast<double>(i) * p[i]);
    if (d.empty()) d.push_back(0.0);
    return d;
}

Poly poly_multiply(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

double poly_eval(const Poly& p, double z) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
    return acc;
}

// Derivative polynomials Q_k with f^(k) = Q_k(f) when f' = chain(f).
std::vector<Poly> derivative_polys(const Poly& chain, int count) {
    std::vector<Poly> polys{{0.0, 1.0}};
    for (int k = 1; k <= count; ++k) polys.push_back(poly_multiply(poly_derivative(polys.back()), chain));
    return polys;
}

double stable_logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

namespace outer {

OuterFunction identity() {
    return {"identity", [](double z, int order) {
                if (order == 0) return z;
                return order == 1 ? 1.0 : 0.0;
            }};
}

OuterFunction tanh() {
    const auto polys = derivative_polys({1.0, 0.0, -1.0}, 16);
    return {"tanh", [polys](double z, int order) {
                if (order < 0 || order >= static_cast<int>(polys.size())) {
                    throw InputError("tanh: derivative order out of range");
                }
                return poly_eval(polys[static_cast<std::size_t>(order)], std::tanh(z));
            }};
}

OuterFunction exp() {
    return {"exp", [](double z, int) { return std::exp(z); }};
}

OuterFunction logistic(double slope, double half_max) {
    const auto polys = derivative_polys({0.0, 1.0, -1.0}, 16);
    return {"logistic", [polys, slope, half_max](double z, int order) {
                if (order < 0 || order >= static_cast<int>(polys.size())) {
                    throw InputError("logistic: derivative order out of range");
                }
                const double s = stable_logistic(slope * (z - half_max));
                return std::pow(slope, order) * poly_eval(polys[static_cast<std::size_t>(order)], s);
            }};
}

OuterFunction constant(double value) {
    return {"constant", [value](double, int order) { return order == 0 ? value : 0.0; }};
}

OuterFunction finite_difference(std::function<double(double)> g, double step) {
    return {"finite-difference", [g = std::move(g), step](double z, int order) {
                if (order == 0) return g(z);
                const int m = std::max(2, (order + 3) / 2 + 1);
                std::vector<double> nodes;
                std::vector<double> values;
                for (int j = -m; j <= m; ++j) {
                    nodes.push_back(z + j * step);
                    values.push_back(g(z + j * step));
                }
                const auto w = fd_weights(z, nodes, order);
                double acc = 0.0;
                for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * values[j];
                return acc;
            }};
}

}  // namespace outer

// ---------------------------------------------------------------------------
// Observability matrices

CompositeObservability observability_matrices(const SmoothSystem& sys, const Vector& x,
                                               double rtol) {
    if (sys.n < 1 || x.size() != sys.n) throw DimensionError("observability_matrices: state size mismatch");
    const ScalarMap composite = [&sys](const Vector& state) { return sys.g(sys.h(state)); };

    CompositeObservability out;
    out.dG_h = lie_gradients(sys.f0, sys.h, x, sys.n - 1, sys.lie);
    out.dG_goh = lie_gradients(sys.f0, composite, x, sys.n - 1, sys.lie);
    if (!out.dG_h.allFinite() || !out.dG_goh.allFinite()) {
        throw EvaluationError("observability_matrices: non-finite Jacobian entry");
    }
    out.det_h = out.dG_h.determinant();
    out.det_goh = out.dG_goh.determinant();
    out.g_prime = sys.g.derivative(sys.h(x), 1);
    out.residual = std::abs(out.det_goh - std::pow(out.g_prime, sys.n) * out.det_h);
    out.tolerance = 1e-4 * std::max(1.0, std::abs(out.det_h));
    out.ratio_check = out.residual <= out.tolerance;
    out.rank_h = numeric_rank(out.dG_h, rtol);
    out.rank_goh = numeric_rank(out.dG_goh, rtol);
    return out;
}

// ---------------------------------------------------------------------------
// Delayed outputs

void DelayedOutputSpec::validate() const {
    if (!h_aux || !kernel) throw ConfigError("DelayedOutputSpec: h_aux and kernel are required");
    if (!(window > 0.0)) throw ConfigError("DelayedOutputSpec: window must be positive");
    if (lag_grid < 2) throw ConfigError("DelayedOutputSpec: lag_grid must be at least 2");
}

DelayedJacobianRank delayed_jacobian_rank(const DelayedOutputSpec& spec, const StateField& f0,
                                          const Vector& x_at_tminusN, int n, const LieConfig& cfg,
                                          double rtol) {
    spec.validate();
    if (x_at_tminusN.size() != n) throw DimensionError("delayed_jacobian_rank: state size mismatch");

    const double dtau = spec.window / (spec.lag_grid - 1);
    const auto weights = trapezoid_weights(static_cast<std::size_t>(spec.lag_grid), dtau);

    DelayedJacobianRank out;
    out.dG_bar = Matrix::Zero(n, n);
    Matrix stacked(n * spec.lag_grid, n);
    for (int i = 0; i < spec.lag_grid; ++i) {
        const double tau = i * dtau;
        const ScalarMap lagged = [&spec, tau](const Vector& x) { return spec.h_aux(x, tau); };
        const Matrix aux = lie_gradients(f0, lagged, x_at_tminusN, n - 1, cfg);
        const double c = spec.kernel(tau);
        if (!aux.allFinite() || !std::isfinite(c)) {
            std::ostringstream msg;
            msg << "delayed_jacobian_rank: non-finite row at lag " << tau;
            throw EvaluationError(msg.str());
        }
        stacked.middleRows(i * n, n) = aux;
        out.dG_bar += weights[static_cast<std::size_t>(i)] * c * aux;
    }
    out.rank = numeric_rank(out.dG_bar, rtol);
    out.rank_aux = numeric_rank(stacked, rtol);
    out.proposition_holds = !(out.rank_aux < n) || out.rank < n;
    return out;
}

}  // namespace obskit
