#include "obskit/empirical_gramian.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "obskit/errors.hpp"

namespace obskit {

void GramianJob::validate() const {
    if (!system) throw ConfigError("GramianJob: simulator is required");
    if (!(epsilon > 0.0)) throw ConfigError("GramianJob: epsilon must be positive");
    if (perturb_indices.empty()) throw ConfigError("GramianJob: perturb_indices must not be empty");
    std::set<int> seen;
    for (int i : perturb_indices) {
        if (i < 0 || i >= x0.size()) throw ConfigError("GramianJob: perturbation index out of range");
        if (!seen.insert(i).second) throw ConfigError("GramianJob: perturbation indices must be distinct");
    }
    if (!(t1 > 0.0)) throw ConfigError("GramianJob: horizon must be positive");
}

GramianMetrics gramian_metrics(const Matrix& W, double rtol) {
    const auto eig = symmetric_eig(W);
    GramianMetrics m;
    const auto n = eig.values.size();
    if (n == 0) return m;
    m.trace = eig.values.sum();
    m.lambda_min = eig.values(0);
    m.lambda_max = eig.values(n - 1);
    const double tol = rtol * std::max(std::abs(m.lambda_max), std::abs(m.lambda_min));

    m.rank = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (eig.values(i) > tol) ++m.rank;
    }
    m.singular = !(m.lambda_min > tol) || m.lambda_max <= 0.0;
    if (m.singular) {
        m.nu = kInfinity;
        m.kappa = kInfinity;
        m.det_root = 0.0;
        m.log_det.reset();
        return m;
    }
    m.nu = 1.0 / m.lambda_min;
    m.kappa = m.lambda_max / m.lambda_min;
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(eig.values(i));
    m.log_det = log_det;
    m.det_root = std::exp(log_det / static_cast<double>(n));
    return m;
}

GramianResult make_gramian_result(const Matrix& W, double rtol) {
    GramianResult r;
    r.W = 0.5 * (W + W.transpose());
    r.eigenvalues = symmetric_eig(r.W).values;
    r.metrics = gramian_metrics(r.W, rtol);
    return r;
}

Matrix gramian_from_differences(const std::vector<Matrix>& deltas, double step, double epsilon) {
    if (deltas.empty()) throw InputError("gramian_from_differences: no perturbations");
    const auto samples = deltas.front().rows();
    const auto channels = deltas.front().cols();
    for (const auto& d : deltas) {
        if (d.rows() != samples || d.cols() != channels) {
            throw DimensionError("gramian_from_differences: all output differences must share a grid");
        }
    }
    const auto weights = trapezoid_weights(static_cast<std::size_t>(samples), step);
    const auto q = static_cast<Eigen::Index>(deltas.size());
    Matrix W = Matrix::Zero(q, q);
    for (Eigen::Index a = 0; a < q; ++a) {
        for (Eigen::Index b = a; b < q; ++b) {
            double acc = 0.0;
            for (Eigen::Index s = 0; s < samples; ++s) {
                acc += weights[static_cast<std::size_t>(s)] *
                       deltas[a].row(s).dot(deltas[b].row(s));
            }
            W(a, b) = acc;
            W(b, a) = acc;
        }
    }
    return W / (4.0 * epsilon * epsilon);
}

GramianResult empirical_gramian(const GramianJob& job, double rtol) {
    job.validate();
    std::vector<Matrix> deltas;
    double step = 0.0;
    for (int index : job.perturb_indices) {
        Vector plus = job.x0;
        Vector minus = job.x0;
        plus(index) += job.epsilon;
        minus(index) -= job.epsilon;
        OutputSeries yp;
        OutputSeries ym;
        try {
            yp = job.system(plus);
            ym = job.system(minus);
        } catch (const NumericError& e) {
            std::ostringstream msg;
            msg << "empirical_gramian: simulation failed for perturbation index " << index << ": "
                << e.what();
            throw NumericError(msg.str());
        }
        if (yp.y.rows() != ym.y.rows() || yp.y.cols() != ym.y.cols() || yp.step != ym.step) {
            throw DimensionError("empirical_gramian: perturbed outputs are not on a common grid");
        }
        step = yp.step;
        Eigen::Index rows = yp.y.rows();
        if (std::isfinite(job.t1)) {
            const auto limit = static_cast<Eigen::Index>(std::floor(job.t1 / step + 1e-9)) + 1;
            rows = std::min(rows, limit);
        }
        if (rows < 2) throw InputError("empirical_gramian: fewer than two output samples in the horizon");
        deltas.push_back(yp.y.topRows(rows) - ym.y.topRows(rows));
    }
    return make_gramian_result(gramian_from_differences(deltas, step, job.epsilon), rtol);
}

Matrix analytic_lti_gramian(const Matrix& A, const Matrix& C, double t0, double T, int intervals) {
    if (A.rows() != A.cols()) throw DimensionError("analytic_lti_gramian: A must be square");
    if (C.cols() != A.rows()) throw DimensionError("analytic_lti_gramian: C must have n columns");
    if (!(T > t0)) throw InputError("analytic_lti_gramian: need T > t0");
    if (intervals < 2) intervals = 2;
    if (intervals % 2 == 1) ++intervals;

    const double h = (T - t0) / intervals;
    const Matrix CtC = C.transpose() * C;
    const Matrix advance = (A * h).exp();
    Matrix E = (A * t0).exp();
    Matrix W = Matrix::Zero(A.rows(), A.cols());
    for (int j = 0; j <= intervals; ++j) {
        const double weight = (j == 0 || j == intervals) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        W += weight * (E.transpose() * CtC * E);
        E = E * advance;
    }
    W *= h / 3.0;
    return 0.5 * (W + W.transpose());
}

ObservabilityVerdict weak_observability(const GramianResult& result, double rtol) {
    ObservabilityVerdict v;
    v.dim = result.dim();
    v.rank = numeric_rank(result.W, rtol);
    v.lambda_min = result.eigenvalues.size() > 0 ? result.eigenvalues(0) : 0.0;
    v.rank_gap = v.dim - v.rank;
    v.observable = v.dim > 0 && v.rank == v.dim;
    return v;
}

}  // namespace obskit
