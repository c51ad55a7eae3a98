#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "obskit/numerics.hpp"

namespace obskit {

using Point2 = Eigen::Vector2d;

enum class StrainKind { bending, shear };

std::string to_string(StrainKind kind);
StrainKind parse_strain_kind(const std::string& text);

/// Simple polygon; membership by the even-odd rule.
struct Polygon {
    std::vector<Point2> vertices;

    bool contains(const Point2& p) const;
    Point2 min_corner() const;
    Point2 max_corner() const;
    double area() const;
    void validate() const;
};

/// Out-of-plane mode shape value with first and second spatial derivatives.
struct ModeSample {
    double w = 0.0;
    double wx = 0.0;
    double wy = 0.0;
    double wxx = 0.0;
    double wyy = 0.0;
    double wxy = 0.0;
};

class ModeShape {
  public:
    virtual ~ModeShape() = default;
    virtual ModeSample evaluate(double x, double y) const = 0;
};

using ModeShapePtr = std::shared_ptr<const ModeShape>;

/// Clamped-free beam function of order `order` (1 or 2) along the span,
/// optionally multiplied by (x - axis) to give a torsion-like twist.
class BeamMode : public ModeShape {
  public:
    BeamMode(int order, double span, bool twisting = false, double axis = 0.0);
    ModeSample evaluate(double x, double y) const override;

  private:
    double lambda_;
    double sigma_;
    double span_;
    bool twisting_;
    double axis_;
};

/// Linear combination of other shapes.
class CombinedMode : public ModeShape {
  public:
    CombinedMode(std::vector<ModeShapePtr> parts, std::vector<double> weights);
    ModeSample evaluate(double x, double y) const override;

  private:
    std::vector<ModeShapePtr> parts_;
    std::vector<double> weights_;
};

/// Mode tabulated on a regular grid; derivatives by grid differences,
/// bilinear interpolation in between.
class GridMode : public ModeShape {
  public:
    GridMode(std::vector<double> xs, std::vector<double> ys, Matrix values);  // values(iy, ix)
    ModeSample evaluate(double x, double y) const override;

  private:
    std::vector<double> xs_;
    std::vector<double> ys_;
    Matrix w_, wx_, wy_, wxx_, wyy_, wxy_;
};

/// Flexible flapping-wing plate model in modal coordinates.
struct WingModel {
    int n_m = 0;
    Vector omega_diag;  // rad^2/s^2
    Matrix Ma;          // n_m x 3 applied-acceleration mass matrix
    double x_r = 0.0;   // m, feathering-axis offset
    double thickness = 0.0;
    Polygon planform;
    std::vector<ModeShapePtr> modes;

    int state_dim() const { return 2 * n_m + 3; }
    int rate_index() const { return 2 * n_m; }  // index of P; Q and R follow
    void validate() const;
};

/// Uniform orthotropic plate used to derive the default modes.
struct AssumedModeSettings {
    int n_m = 2;
    double areal_density = 0.05;      // kg/m^2
    double youngs_modulus = 1.0e10;   // Pa, spanwise/chordwise
    double shear_modulus = 1.6e8;     // Pa, in-plane shear (twisting rigidity G h^3 / 12)
    double poisson = 0.3;
    double thickness = 1.0e-4;        // m
    double x_r = 0.001;               // m
    int quadrature_cells = 400;       // cells along the longer bounding-box side
};

/// Approximate hawkmoth forewing outline scaled to a 50 mm span (metres).
Polygon default_planform();

/// Mass-orthonormal assumed modes (first bending, twist, second bending),
/// with Omega from Rayleigh quotients of Kirchhoff plate energy and Ma from
/// planform moments of each mode.
WingModel build_assumed_mode_model(const Polygon& planform, const AssumedModeSettings& settings);

WingModel default_wing_model(int n_m = 2);

/// Recomputes Ma from the model's own modes by planform quadrature.
Matrix applied_acceleration_matrix(const Polygon& planform, const std::vector<ModeShapePtr>& modes,
                                   double areal_density, int cells);

struct StrokeParams {
    double A_psi = 45.0 * EIGEN_PI / 180.0;
    double A_alpha = 60.0 * EIGEN_PI / 180.0;
    double T_beat = 0.040;

    void validate() const;
};

/// Euler angles and their first two time derivatives.
struct EulerKinematics {
    Eigen::Vector3d angles = Eigen::Vector3d::Zero();  // psi, theta, alpha
    Eigen::Vector3d rates = Eigen::Vector3d::Zero();
    Eigen::Vector3d accels = Eigen::Vector3d::Zero();
};

EulerKinematics stroke_kinematics(double t, const StrokeParams& params);

/// Plate orientation for the position -> elevation -> feathering sequence:
/// Rz(psi) Rx(theta) Ry(alpha).
Eigen::Matrix3d plate_rotation(const Eigen::Vector3d& angles);

struct BodyRates {
    Eigen::Vector3d rates = Eigen::Vector3d::Zero();   // P, Q, R in plate axes
    Eigen::Vector3d accels = Eigen::Vector3d::Zero();  // P', Q', R'
};

BodyRates body_rates_from_euler(const EulerKinematics& kin);

/// Control-affine wing dynamics; u = (P', Q', R').
Vector wing_rhs(const Vector& x, const Eigen::Vector3d& u, const WingModel& model);

double deformation(double x, double y, const Vector& eta, const WingModel& model);

/// Row vector c with strain = c * eta at the top fiber.
Eigen::RowVectorXd strain_coefficients(double x, double y, const WingModel& model, StrainKind kind);

double surface_strain(double x, double y, const Vector& eta, const WingModel& model, StrainKind kind);

struct WingTrajectory {
    std::vector<double> t;
    Matrix states;      // samples x state_dim
    Matrix kinematics;  // samples x 3 (psi, theta, alpha)
};

WingTrajectory simulate_wing(const WingModel& model, const StrokeParams& params, const Vector& x0,
                             double t0, double t1, double step);

/// Default integration step: one 400th of the beat period.
double default_wing_step(const StrokeParams& params);

/// State at t = 0 with zero deformation and the kinematic body rates.
Vector rest_initial_state(const WingModel& model, const StrokeParams& params);

/// State at t = 0 on the periodic forced response: the modal part solves
/// (I - Phi) z = z_T for the one-beat monodromy Phi of the discretized flow.
Vector periodic_initial_state(const WingModel& model, const StrokeParams& params, double step);

}  // namespace obskit
