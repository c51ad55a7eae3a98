#include "obskit/neural_encoding.hpp"

#include <cmath>
#include <sstream>

#include "obskit/errors.hpp"
#include "obskit/numerics.hpp"

namespace obskit {

void EncoderParams::validate() const {
    if (!(b > 0.0)) throw ConfigError("encoder: b must be positive");
    if (!(N > 0.0)) throw ConfigError("encoder: N must be positive");
    if (!(C_xi > 0.0)) throw ConfigError("encoder: C_xi must be positive");
    for (double v : {a, b, omega_sta, N, C_xi, c, d}) {
        if (!std::isfinite(v)) throw ConfigError("encoder: parameters must be finite");
    }
}

double sta_kernel(double tau, const EncoderParams& params) {
    const double shifted = -tau + params.a;
    return std::cos(params.omega_sta * shifted) *
           std::exp(-(shifted * shifted) / (params.b * params.b));
}

int window_steps(double step, const EncoderParams& params) {
    params.validate();
    if (!(step > 0.0)) throw WindowError("encoder: sample step must be positive");
    const double ratio = params.N / step;
    const double whole = std::round(ratio);
    if (whole < 1.0 || std::abs(ratio - whole) > 1e-9 * std::max(1.0, whole)) {
        std::ostringstream msg;
        msg << "encoder: step " << step << " does not divide the window " << params.N;
        throw WindowError(msg.str());
    }
    return static_cast<int>(whole);
}

std::vector<double> projection_weights(double step, const EncoderParams& params) {
    const int M = window_steps(step, params);
    auto weights = trapezoid_weights(static_cast<std::size_t>(M + 1), step);
    for (int j = 0; j <= M; ++j) {
        weights[static_cast<std::size_t>(j)] *= sta_kernel(j * step, params) / params.C_xi;
    }
    return weights;
}

double project_stimulus(const StimulusHistory& history, const EncoderParams& params) {
    const auto weights = projection_weights(history.step, params);
    if (history.samples.size() < weights.size()) {
        throw WindowError("project_stimulus: history shorter than the window");
    }
    const std::size_t last = history.samples.size() - 1;
    double xi = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) xi += weights[j] * history.samples[last - j];
    return xi;
}

std::vector<double> project_series(std::span<const double> strain, double step,
                                   const EncoderParams& params) {
    const auto weights = projection_weights(step, params);
    const std::size_t M = weights.size() - 1;
    if (strain.size() < weights.size()) {
        throw WindowError("project_series: series shorter than one window");
    }
    std::vector<double> xi(strain.size() - M);
    for (std::size_t i = M; i < strain.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= M; ++j) acc += weights[j] * strain[i - j];
        xi[i - M] = acc;
    }
    return xi;
}

double nla(double xi, const EncoderParams& params) {
    const double z = params.c * (xi - params.d);
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double nla_derivative(double xi, const EncoderParams& params) {
    // Symmetric in z, so evaluate with exp(-|z|) to avoid overflow.
    const double e = std::exp(-std::abs(params.c * (xi - params.d)));
    return params.c * e / ((1.0 + e) * (1.0 + e));
}

std::vector<double> encode(std::span<const double> strain, double step,
                           const EncoderParams& params) {
    auto out = project_series(strain, step, params);
    for (double& v : out) v = nla(v, params);
    return out;
}

}  // namespace obskit
