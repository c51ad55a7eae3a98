#include "obskit/wing_sensing.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "obskit/errors.hpp"

namespace obskit {

void WingSensingConfig::validate(const WingModel& model) const {
    encoder.validate();
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
    if (step < 0.0 || !std::isfinite(step)) throw ConfigError("step must be nonnegative");
    std::set<int> seen;
    for (int i : perturb_indices) {
        if (i < 0 || i >= model.state_dim()) throw DimensionError("perturbation index out of range");
        if (!seen.insert(i).second) throw ConfigError("perturbation indices must be distinct");
    }
}

namespace {

std::vector<int> resolved_indices(const WingModel& m, const WingSensingConfig& c) {
    if (!c.perturb_indices.empty()) return c.perturb_indices;
    const int r = m.rate_index();
    return {r, r + 1, r + 2};
}

double resolved_step(const StrokeParams& s, const WingSensingConfig& c) {
    return c.step > 0.0 ? c.step : default_wing_step(s);
}

// Modal coordinates over [0, 2T] given the nominal first beat and the
// second beat started from `x_mid`.
Matrix two_beat_eta(const Matrix& first_beat, const WingModel& m, const StrokeParams& s,
                    const Vector& x_mid, double step) {
    const WingTrajectory second = simulate_wing(m, s, x_mid, s.T_beat, 2.0 * s.T_beat, step);
    const Eigen::Index n1 = first_beat.rows();
    const Eigen::Index n2 = second.states.rows();
    Matrix eta(n1 + n2 - 1, m.n_m);
    eta.topRows(n1) = first_beat;
    eta.bottomRows(n2 - 1) = second.states.block(1, 0, n2 - 1, m.n_m);
    return eta;
}

// Kernel-filtered history for every sample of the second beat.
Matrix filter_second_beat(const Matrix& eta, const std::vector<double>& weights, Eigen::Index first) {
    const Eigen::Index count = eta.rows() - first;
    Matrix out = Matrix::Zero(count, eta.cols());
    for (Eigen::Index k = 0; k < count; ++k) {
        const Eigen::Index now = first + k;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            out.row(k) += weights[j] * eta.row(now - static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

void check_kernel_match(const EncoderParams& a, const EncoderParams& b) {
    if (a.a != b.a || a.b != b.b || a.omega_sta != b.omega_sta || a.N != b.N || a.C_xi != b.C_xi) {
        throw ConfigError("encoder kernel parameters differ from the ones used for filtering");
    }
}

}  // namespace

Vector wing_start_state(const WingModel& m, const StrokeParams& s, const WingSensingConfig& c) {
    const double step = resolved_step(s, c);
    return c.periodic_start ? periodic_initial_state(m, s, step) : rest_initial_state(m, s);
}

WingSensitivity::WingSensitivity(WingModel model, StrokeParams stroke, WingSensingConfig config)
    : model_(std::move(model)), stroke_(stroke), config_(std::move(config)) {
    model_.validate();
    stroke_.validate();
    config_.validate(model_);
    config_.perturb_indices = resolved_indices(model_, config_);
    step_ = resolved_step(stroke_, config_);

    const int M = window_steps(step_, config_.encoder);
    const std::vector<double> weights = projection_weights(step_, config_.encoder);

    const Vector x0 = wing_start_state(model_, stroke_, config_);
    const WingTrajectory first = simulate_wing(model_, stroke_, x0, 0.0, stroke_.T_beat, step_);
    const Eigen::Index n1 = first.states.rows();
    if (M > n1 - 1) throw WindowError("encoder window is longer than one beat of history");
    const Matrix first_eta = first.states.leftCols(model_.n_m);
    x_perturb_ = first.states.row(n1 - 1).transpose();

    const Eigen::Index start = n1 - 1;
    nominal_ = filter_second_beat(two_beat_eta(first_eta, model_, stroke_, x_perturb_, step_), weights, start);

    for (int idx : config_.perturb_indices) {
        for (int sign : {+1, -1}) {
            Vector x = x_perturb_;
            x(idx) += sign * config_.epsilon;
            Matrix eta;
            try {
                eta = two_beat_eta(first_eta, model_, stroke_, x, step_);
            } catch (const IntegrationDiverged& e) {
                throw IntegrationDiverged(e.time(), "perturbation of state index " + std::to_string(idx) +
                                                        " diverged: " + e.what());
            }
            (sign > 0 ? plus_ : minus_).push_back(filter_second_beat(eta, weights, start));
            (sign > 0 ? plus_raw_ : minus_raw_).push_back(eta.bottomRows(eta.rows() - start));
        }
    }
}

Vector WingSensitivity::nominal_xi(const Eigen::RowVectorXd& c) const {
    if (c.size() != model_.n_m) throw DimensionError("strain coefficient length must equal n_m");
    return nominal_ * c.transpose();
}

GramianResult WingSensitivity::site_gramian(const Eigen::RowVectorXd& c, const EncoderParams& enc,
                                            double rtol) const {
    check_kernel_match(enc, config_.encoder);
    enc.validate();
    if (c.size() != model_.n_m) throw DimensionError("strain coefficient length must equal n_m");
    std::vector<Matrix> deltas;
    deltas.reserve(plus_.size());
    for (std::size_t i = 0; i < plus_.size(); ++i) {
        const Vector xp = plus_[i] * c.transpose();
        const Vector xm = minus_[i] * c.transpose();
        Matrix d(xp.size(), 1);
        for (Eigen::Index k = 0; k < xp.size(); ++k) d(k, 0) = nla(xp(k), enc) - nla(xm(k), enc);
        deltas.push_back(std::move(d));
    }
    return make_gramian_result(gramian_from_differences(deltas, step_, config_.epsilon), rtol);
}

GramianResult WingSensitivity::site_gramian(const Point2& p, StrainKind kind, double rtol) const {
    return site_gramian(strain_coefficients(p.x(), p.y(), model_, kind), config_.encoder, rtol);
}

GramianResult WingSensitivity::strain_gramian(const Eigen::RowVectorXd& c, double rtol) const {
    if (c.size() != model_.n_m) throw DimensionError("strain coefficient length must equal n_m");
    std::vector<Matrix> deltas;
    for (std::size_t i = 0; i < plus_raw_.size(); ++i) deltas.push_back((plus_raw_[i] - minus_raw_[i]) * c.transpose());
    return make_gramian_result(gramian_from_differences(deltas, step_, config_.epsilon), rtol);
}

OutputSimulator wing_site_simulator(const WingModel& m, const StrokeParams& s, const WingSensingConfig& c,
                                    const Point2& p, StrainKind kind) {
    const double step = resolved_step(s, c);
    const Vector x0 = wing_start_state(m, s, c);
    const WingTrajectory first = simulate_wing(m, s, x0, 0.0, s.T_beat, step);
    const Eigen::RowVectorXd coeffs = strain_coefficients(p.x(), p.y(), m, kind);
    std::vector<double> history(static_cast<std::size_t>(first.states.rows()));
    for (Eigen::Index k = 0; k < first.states.rows(); ++k) {
        history[static_cast<std::size_t>(k)] = coeffs.dot(first.states.row(k).head(m.n_m));
    }
    return [m, s, c, step, coeffs, history](const Vector& x_mid) {
        const WingTrajectory second = simulate_wing(m, s, x_mid, s.T_beat, 2.0 * s.T_beat, step);
        std::vector<double> strain = history;
        for (Eigen::Index k = 1; k < second.states.rows(); ++k) {
            strain.push_back(coeffs.dot(second.states.row(k).head(m.n_m)));
        }
        const std::vector<double> pf = encode(strain, step, c.encoder);
        const std::size_t beat = static_cast<std::size_t>(second.states.rows());
        OutputSeries out;
        out.step = step;
        out.y.resize(static_cast<Eigen::Index>(beat), 1);
        for (std::size_t k = 0; k < beat; ++k) out.y(static_cast<Eigen::Index>(k), 0) = pf[pf.size() - beat + k];
        return out;
    };
}

}  // namespace obskit
