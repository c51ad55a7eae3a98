#pragma once

#include <span>
#include <vector>

namespace obskit {

/// Spike-triggered-average kernel and logistic activation parameters (SI units).
struct EncoderParams {
    double a = 0.005;          // s, kernel delay
    double b = 0.004;          // s, kernel width
    double omega_sta = 1000.0; // rad/s
    double N = 0.040;          // s, window length
    double C_xi = 0.1174;      // normalization
    double c = 10.0;           // activation slope
    double d = 0.5;            // activation half-max

    void validate() const;
};

/// Strain samples on a uniform grid, oldest first; the last sample is "now".
struct StimulusHistory {
    std::span<const double> samples;
    double step = 0.0;
};

double sta_kernel(double tau, const EncoderParams& params);

/// Number of grid steps spanned by the window; throws WindowError unless the
/// step divides N.
int window_steps(double step, const EncoderParams& params);

/// Kernel quadrature weights w_j (j = 0..M) such that
/// xi(t) = sum_j w_j eps(t - j step); includes the 1/C_xi scaling.
std::vector<double> projection_weights(double step, const EncoderParams& params);

/// (1/C_xi) * integral_0^N eps(t - tau) STA(tau) dtau by the trapezoid rule.
double project_stimulus(const StimulusHistory& history, const EncoderParams& params);

/// Projected stimulus for every sample that has a full window of history.
/// Element i corresponds to input sample i + window_steps.
std::vector<double> project_series(std::span<const double> strain, double step,
                                   const EncoderParams& params);

double nla(double xi, const EncoderParams& params);
double nla_derivative(double xi, const EncoderParams& params);

/// Firing probability for every sample that has a full window of history.
std::vector<double> encode(std::span<const double> strain, double step,
                           const EncoderParams& params);

}  // namespace obskit
