#pragma once

#include <vector>

#include "obskit/empirical_gramian.hpp"
#include "obskit/neural_encoding.hpp"
#include "obskit/wing_model.hpp"

namespace obskit {

struct WingSensingConfig {
    EncoderParams encoder;
    double epsilon = 1e-3;
    std::vector<int> perturb_indices;  // empty: the three body rates
    double step = 0.0;                 // 0: default_wing_step
    bool periodic_start = true;        // start on the periodic response instead of at rest

    void validate(const WingModel& model) const;
};

/// Perturbation study of the flapping wing: the first beat is nominal and
/// supplies the encoder history, the state is perturbed by +-epsilon at the
/// start of the second beat, and outputs are collected over that beat.
///
/// Strain is linear in eta, so the kernel-filtered modal histories are
/// computed once and every sensor site reduces to a dot product.
class WingSensitivity {
  public:
    WingSensitivity(WingModel model, StrokeParams stroke, WingSensingConfig config);

    const WingModel& model() const { return model_; }
    const StrokeParams& stroke() const { return stroke_; }
    const WingSensingConfig& config() const { return config_; }
    double step() const { return step_; }
    int samples() const { return static_cast<int>(nominal_.rows()); }

    /// Projected stimulus of the nominal run over the second beat.
    Vector nominal_xi(const Eigen::RowVectorXd& strain_coeffs) const;

    /// Gramian of P_fire at one site. `encoder` may change the activation
    /// (c, d) but its kernel parameters must match the configured ones.
    GramianResult site_gramian(const Eigen::RowVectorXd& strain_coeffs, const EncoderParams& encoder,
                               double rtol = 1e-10) const;
    GramianResult site_gramian(const Point2& p, StrainKind kind, double rtol = 1e-10) const;

    /// Gramian of the raw strain (no encoding) at one site.
    GramianResult strain_gramian(const Eigen::RowVectorXd& strain_coeffs, double rtol = 1e-10) const;

    /// State at the start of the second beat, before perturbation.
    const Vector& perturbation_state() const { return x_perturb_; }

  private:
    WingModel model_;
    StrokeParams stroke_;
    WingSensingConfig config_;
    double step_ = 0.0;
    Vector x_perturb_;
    Matrix nominal_;                 // filtered eta, samples x n_m
    std::vector<Matrix> plus_, minus_;
    std::vector<Matrix> plus_raw_, minus_raw_;  // unfiltered eta over the second beat
};

/// Generic simulator for one site, usable with empirical_gramian: maps the
/// state at the start of the second beat to P_fire over that beat.
OutputSimulator wing_site_simulator(const WingModel& model, const StrokeParams& stroke,
                                    const WingSensingConfig& config, const Point2& p, StrainKind kind);

/// Starting state for the sensing study (periodic or at rest).
Vector wing_start_state(const WingModel& model, const StrokeParams& stroke, const WingSensingConfig& config);

}  // namespace obskit
