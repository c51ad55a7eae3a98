#include "obskit/placement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "obskit/errors.hpp"

namespace obskit {

void PlacementProblem::validate() const {
    if (sites.empty()) throw GeometryError("placement needs at least one site");
    if (r < 1 || r > static_cast<int>(sites.size())) {
        throw ConfigError("r must lie in [1, number of sites]");
    }
    if (!(w_nu >= 0.0) || !std::isfinite(w_nu)) throw ConfigError("w_nu must be finite and nonnegative");
    const Eigen::Index dim = sites.front().gramian.W.rows();
    for (const auto& s : sites) {
        if (s.gramian.W.rows() != dim || s.gramian.W.cols() != dim) {
            throw DimensionError("site Gramians must share one dimension");
        }
    }
}

std::vector<Point2> grid_sites(const Polygon& planform, int nx, int ny) {
    if (nx < 2 || ny < 2) throw ConfigError("grid needs at least 2 stations per axis");
    planform.validate();
    const Point2 lo = planform.min_corner();
    const Point2 hi = planform.max_corner();
    std::vector<Point2> out;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Point2 p(lo.x() + (i + 0.5) * (hi.x() - lo.x()) / nx, lo.y() + (j + 0.5) * (hi.y() - lo.y()) / ny);
            if (planform.contains(p)) out.push_back(p);
        }
    }
    if (out.empty()) throw GeometryError("no grid station falls inside the planform");
    return out;
}

std::vector<Point2> grid_sites(const WingModel& model, int nx, int ny) {
    return grid_sites(model.planform, nx, ny);
}

namespace {

Point2 point_at(const Polyline& line, const std::vector<double>& cumulative, double s) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    std::size_t k = static_cast<std::size_t>(std::distance(cumulative.begin(), it));
    k = std::clamp<std::size_t>(k, 1, line.size() - 1);
    const double seg = cumulative[k] - cumulative[k - 1];
    const double t = seg > 0.0 ? std::clamp((s - cumulative[k - 1]) / seg, 0.0, 1.0) : 0.0;
    return line[k - 1] + t * (line[k] - line[k - 1]);
}

}  // namespace

std::vector<Point2> vein_sites(const std::vector<Polyline>& veins, double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError("vein spacing must be positive");
    std::vector<Point2> out;
    for (const auto& line : veins) {
        if (line.empty()) throw GeometryError("vein polyline is empty");
        for (const auto& p : line) {
            if (!p.allFinite()) throw GeometryError("vein vertex is not finite");
        }
        std::vector<double> cumulative(line.size(), 0.0);
        for (std::size_t k = 1; k < line.size(); ++k) {
            cumulative[k] = cumulative[k - 1] + (line[k] - line[k - 1]).norm();
        }
        const double length = cumulative.back();
        if (length == 0.0) {
            out.push_back(line.front());
            continue;
        }
        const bool closed = line.size() > 2 && (line.front() - line.back()).norm() <= 1e-12 * length;
        const int m = std::max(1, static_cast<int>(std::ceil(length / spacing - 1e-9)));
        const int count = closed ? m : m + 1;
        for (int k = 0; k < count; ++k) {
            out.push_back(k == m ? line.back() : point_at(line, cumulative, length * k / m));
        }
    }
    return out;
}

Matrix combined_gramian(const Vector& beta, const std::vector<SensorSite>& sites) {
    if (beta.size() != static_cast<Eigen::Index>(sites.size())) {
        throw DimensionError("beta length must equal the number of sites");
    }
    if (sites.empty()) return Matrix();
    if (!beta.allFinite()) throw InputError("beta must be finite");
    const Eigen::Index dim = sites.front().gramian.W.rows();
    Matrix W = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (sites[i].gramian.W.rows() != dim) throw DimensionError("site Gramians must share one dimension");
        const double b = beta(static_cast<Eigen::Index>(i));
        if (b != 0.0) W += b * sites[i].gramian.W;
    }
    return W;
}

double placement_objective(const Matrix& W, double w_nu, double rtol) {
    const GramianMetrics m = gramian_metrics(W, rtol);
    if (m.singular) return kInfinity;
    return m.kappa + w_nu * m.nu;
}

Vector project_capped_simplex(const Vector& v, double r) {
    const auto p = static_cast<double>(v.size());
    if (!(r >= 0.0) || r > p) throw ConfigError("target sum must lie in [0, dimension]");
    if (!v.allFinite()) throw InputError("projection input must be finite");
    if (v.size() == 0) return v;
    auto clipped = [&](double tau) { return (v.array() - tau).cwiseMax(0.0).cwiseMin(1.0).matrix(); };
    double lo = v.minCoeff() - 1.0;  // sum = p
    double hi = v.maxCoeff();        // sum = 0
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (clipped(mid).sum() > r) lo = mid; else hi = mid;
    }
    Vector out = clipped(0.5 * (lo + hi));
    // Spread the remaining bisection residual over the free coordinates.
    const double residual = r - out.sum();
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (out(i) > 0.0 && out(i) < 1.0) free.push_back(i);
    }
    if (!free.empty()) {
        for (auto i : free) out(i) = std::clamp(out(i) + residual / static_cast<double>(free.size()), 0.0, 1.0);
    }
    return out;
}

std::vector<int> round_to_discrete(const Vector& beta, int r, const std::vector<double>& tie_key) {
    const auto p = static_cast<int>(beta.size());
    if (r < 0 || r > p) throw ConfigError("r must lie in [0, number of sites]");
    if (!tie_key.empty() && static_cast<int>(tie_key.size()) != p) {
        throw DimensionError("tie key length must equal the number of sites");
    }
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    // Quantizing to the tie tolerance keeps the comparison a strict weak order.
    auto bucket = [&](int i) { return std::llround(beta(i) * 1e12); };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto ba = bucket(a), bb = bucket(b);
        if (ba != bb) return ba > bb;
        if (!tie_key.empty() && tie_key[a] != tie_key[b]) return tie_key[a] > tie_key[b];
        return a < b;
    });
    std::vector<int> out(order.begin(), order.begin() + r);
    std::sort(out.begin(), out.end());
    return out;
}

double selection_objective(const PlacementProblem& problem, const std::vector<int>& selected) {
    Vector beta = Vector::Zero(static_cast<Eigen::Index>(problem.sites.size()));
    for (int i : selected) beta(i) = 1.0;
    return placement_objective(combined_gramian(beta, problem.sites), problem.w_nu);
}

namespace {

// Derivative of an extremal eigenvalue along each site Gramian. Eigenvalues
// within a relative gap of 1e-9 of the extremal one share an averaged
// projector.
Vector eigen_sensitivity(const SymmetricEigen& eig, bool smallest, const std::vector<SensorSite>& sites) {
    const Eigen::Index n = eig.values.size();
    const double scale = std::max(std::abs(eig.values(0)), std::abs(eig.values(n - 1)));
    const double target = smallest ? eig.values(0) : eig.values(n - 1);
    std::vector<Eigen::Index> cluster;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(eig.values(k) - target) <= 1e-9 * scale) cluster.push_back(k);
    }
    Vector g(static_cast<Eigen::Index>(sites.size()));
    for (std::size_t i = 0; i < sites.size(); ++i) {
        double acc = 0.0;
        for (auto k : cluster) {
            const auto u = eig.vectors.col(k);
            acc += u.dot(sites[i].gramian.W * u);
        }
        g(static_cast<Eigen::Index>(i)) = acc / static_cast<double>(cluster.size());
    }
    return g;
}

struct Evaluation {
    double value = kInfinity;
    Vector gradient;
};

Evaluation evaluate(const Vector& beta, const PlacementProblem& problem) {
    const Matrix W = combined_gramian(beta, problem.sites);
    const SymmetricEigen eig = symmetric_eig(W);
    const GramianMetrics m = gramian_metrics(W);
    const Vector dmin = eigen_sensitivity(eig, true, problem.sites);
    Evaluation e;
    if (m.singular) {
        // Off the feasible region of the objective: climb lambda_min instead.
        e.gradient = -dmin;
        return e;
    }
    const double lmin = m.lambda_min, lmax = m.lambda_max;
    const Vector dmax = eigen_sensitivity(eig, false, problem.sites);
    e.value = m.kappa + problem.w_nu * m.nu;
    e.gradient = (dmax * lmin - dmin * lmax) / (lmin * lmin) - problem.w_nu * dmin / (lmin * lmin);
    return e;
}

std::vector<int> refine_by_swaps(const PlacementProblem& problem, std::vector<int> selected, double& value) {
    const int p = static_cast<int>(problem.sites.size());
    std::vector<char> in(static_cast<std::size_t>(p), 0);
    for (int i : selected) in[static_cast<std::size_t>(i)] = 1;
    Matrix W = Matrix::Zero(problem.sites.front().gramian.W.rows(), problem.sites.front().gramian.W.cols());
    for (int i : selected) W += problem.sites[static_cast<std::size_t>(i)].gramian.W;
    value = placement_objective(W, problem.w_nu);
    for (int pass = 0; pass < 50; ++pass) {
        bool improved = false;
        for (std::size_t a = 0; a < selected.size(); ++a) {
            const int out = selected[a];
            int best_in = -1;
            double best_value = value;
            for (int j = 0; j < p; ++j) {
                if (in[static_cast<std::size_t>(j)]) continue;
                const Matrix trial = W - problem.sites[static_cast<std::size_t>(out)].gramian.W +
                                     problem.sites[static_cast<std::size_t>(j)].gramian.W;
                const double v = placement_objective(trial, problem.w_nu);
                if (v < best_value * (1.0 - 1e-12)) {
                    best_value = v;
                    best_in = j;
                }
            }
            if (best_in >= 0) {
                W += problem.sites[static_cast<std::size_t>(best_in)].gramian.W -
                     problem.sites[static_cast<std::size_t>(out)].gramian.W;
                in[static_cast<std::size_t>(out)] = 0;
                in[static_cast<std::size_t>(best_in)] = 1;
                selected[a] = best_in;
                value = best_value;
                improved = true;
            }
        }
        if (!improved) break;
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

}  // namespace

PlacementResult optimize_placement(const PlacementProblem& problem, const PlacementOptions& options) {
    problem.validate();
    if (options.iterations < 1 || options.restarts < 1) throw ConfigError("iterations and restarts must be positive");
    if (!(options.step0 > 0.0)) throw ConfigError("step0 must be positive");

    const auto p = static_cast<Eigen::Index>(problem.sites.size());
    const double r = problem.r;
    const Vector uniform = Vector::Constant(p, r / static_cast<double>(p));
    if (std::isinf(evaluate(uniform, problem).value)) {
        throw InfeasibleStart("combined Gramian is singular at the uniform start; increase r or use other sites");
    }

    std::vector<double> tie_key;
    tie_key.reserve(problem.sites.size());
    for (const auto& s : problem.sites) tie_key.push_back(s.gramian.metrics.lambda_min);

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PlacementResult result;
    result.beta = uniform;
    for (int restart = 0; restart < options.restarts; ++restart) {
        Vector beta = uniform;
        if (restart > 0) {
            for (Eigen::Index i = 0; i < p; ++i) beta(i) = unit(rng);
            beta = project_capped_simplex(beta, r);
        }
        for (int t = 0; t < options.iterations; ++t) {
            const Evaluation e = evaluate(beta, problem);
            if (e.value < result.objective) {
                result.objective = e.value;
                result.beta = beta;
            }
            result.trace.push_back(result.objective);
            ++result.iterations;
            // Only the component within the sum constraint moves beta.
            Vector g = e.gradient.array() - e.gradient.mean();
            const double norm = g.norm();
            if (!(norm > 0.0) || !std::isfinite(norm)) break;
            const double alpha = options.step0 / std::sqrt(static_cast<double>(t) + 1.0);
            beta = project_capped_simplex(beta - alpha * g / norm, r);
        }
    }

    double rounded_value = kInfinity;
    result.selected = round_to_discrete(result.beta, problem.r, tie_key);
    if (options.refine_swaps) {
        result.selected = refine_by_swaps(problem, result.selected, rounded_value);
    } else {
        rounded_value = selection_objective(problem, result.selected);
    }
    result.selected_objective = rounded_value;
    // The discrete set is feasible for the relaxation, so it bounds the optimum.
    if (rounded_value < result.objective) {
        result.objective = rounded_value;
        result.beta = Vector::Zero(p);
        for (int i : result.selected) result.beta(i) = 1.0;
    }
    return result;
}

}  // namespace obskit
