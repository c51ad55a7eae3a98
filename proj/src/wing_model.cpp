#include "obskit/wing_model.hpp"

#include <algorithm>
#include <cmath>

#include "obskit/errors.hpp"

namespace obskit {

std::string to_string(StrainKind kind) { return kind == StrainKind::bending ? "bending" : "shear"; }

StrainKind parse_strain_kind(const std::string& text) {
    if (text == "bending") return StrainKind::bending;
    if (text == "shear") return StrainKind::shear;
    throw ConfigError("unknown strain kind '" + text + "' (expected bending or shear)");
}

// ---------------------------------------------------------------- polygon

bool Polygon::contains(const Point2& p) const {
    bool inside = false;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = vertices[i];
        const Point2& b = vertices[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x_cross = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (p.x() < x_cross) inside = !inside;
        }
    }
    return inside;
}

Point2 Polygon::min_corner() const {
    Point2 m = vertices.front();
    for (const auto& v : vertices) m = m.cwiseMin(v);
    return m;
}

Point2 Polygon::max_corner() const {
    Point2 m = vertices.front();
    for (const auto& v : vertices) m = m.cwiseMax(v);
    return m;
}

double Polygon::area() const {
    double twice = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        twice += vertices[j].x() * vertices[i].y() - vertices[i].x() * vertices[j].y();
    }
    return 0.5 * std::abs(twice);
}

void Polygon::validate() const {
    if (vertices.size() < 3) throw GeometryError("planform needs at least 3 vertices");
    for (const auto& v : vertices) {
        if (!v.allFinite()) throw GeometryError("planform vertex is not finite");
    }
    if (area() <= 0.0) throw GeometryError("planform has zero area");
}

// ---------------------------------------------------------------- modes

BeamMode::BeamMode(int order, double span, bool twisting, double axis)
    : span_(span), twisting_(twisting), axis_(axis) {
    if (order == 1) {
        lambda_ = 1.8751040687119611;
        sigma_ = 0.7340955137994176;
    } else if (order == 2) {
        lambda_ = 4.6940911329741745;
        sigma_ = 1.0184673164508970;
    } else {
        throw ConfigError("beam mode order must be 1 or 2");
    }
    if (!(span > 0.0)) throw GeometryError("beam span must be positive");
}

ModeSample BeamMode::evaluate(double x, double y) const {
    const double s = lambda_ * y / span_;
    const double ch = std::cosh(s), sh = std::sinh(s), c = std::cos(s), sn = std::sin(s);
    const double k = lambda_ / span_;
    const double b = ch - c - sigma_ * (sh - sn);
    const double b1 = k * (sh + sn - sigma_ * (ch - c));
    const double b2 = k * k * (ch + c - sigma_ * (sh + sn));

    ModeSample out;
    if (!twisting_) {
        out.w = b;
        out.wy = b1;
        out.wyy = b2;
        return out;
    }
    const double dx = x - axis_;
    out.w = dx * b;
    out.wx = b;
    out.wy = dx * b1;
    out.wyy = dx * b2;
    out.wxy = b1;
    return out;
}

CombinedMode::CombinedMode(std::vector<ModeShapePtr> parts, std::vector<double> weights)
    : parts_(std::move(parts)), weights_(std::move(weights)) {
    if (parts_.size() != weights_.size()) throw DimensionError("mode parts and weights differ in size");
}

ModeSample CombinedMode::evaluate(double x, double y) const {
    ModeSample out;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        const ModeSample s = parts_[i]->evaluate(x, y);
        const double c = weights_[i];
        out.w += c * s.w;
        out.wx += c * s.wx;
        out.wy += c * s.wy;
        out.wxx += c * s.wxx;
        out.wyy += c * s.wyy;
        out.wxy += c * s.wxy;
    }
    return out;
}

namespace {

void check_uniform_axis(const std::vector<double>& v, const char* name) {
    if (v.size() < 3) throw GeometryError(std::string("mode grid needs at least 3 ") + name + " nodes");
    const double h = v[1] - v[0];
    if (!(h > 0.0)) throw GeometryError(std::string("mode grid ") + name + " must increase");
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (std::abs((v[i] - v[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h)) + 1e-6 * h) {
            throw GeometryError(std::string("mode grid ") + name + " must be uniformly spaced");
        }
    }
}

// Second-order differences along columns (axis 1) or rows (axis 0).
Matrix grid_diff(const Matrix& f, double h, int axis) {
    Matrix d(f.rows(), f.cols());
    const Eigen::Index n = axis == 1 ? f.cols() : f.rows();
    auto at = [&](Eigen::Index line, Eigen::Index k) -> double {
        return axis == 1 ? f(line, k) : f(k, line);
    };
    auto put = [&](Eigen::Index line, Eigen::Index k, double v) {
        if (axis == 1) d(line, k) = v; else d(k, line) = v;
    };
    const Eigen::Index lines = axis == 1 ? f.rows() : f.cols();
    for (Eigen::Index l = 0; l < lines; ++l) {
        put(l, 0, (-3.0 * at(l, 0) + 4.0 * at(l, 1) - at(l, 2)) / (2.0 * h));
        for (Eigen::Index k = 1; k + 1 < n; ++k) put(l, k, (at(l, k + 1) - at(l, k - 1)) / (2.0 * h));
        put(l, n - 1, (3.0 * at(l, n - 1) - 4.0 * at(l, n - 2) + at(l, n - 3)) / (2.0 * h));
    }
    return d;
}

}  // namespace

GridMode::GridMode(std::vector<double> xs, std::vector<double> ys, Matrix values)
    : xs_(std::move(xs)), ys_(std::move(ys)), w_(std::move(values)) {
    check_uniform_axis(xs_, "x");
    check_uniform_axis(ys_, "y");
    if (w_.rows() != static_cast<Eigen::Index>(ys_.size()) ||
        w_.cols() != static_cast<Eigen::Index>(xs_.size())) {
        throw DimensionError("mode grid values must be |y| x |x|");
    }
    if (!w_.allFinite()) throw GeometryError("mode grid values must be finite");
    const double hx = xs_[1] - xs_[0];
    const double hy = ys_[1] - ys_[0];
    wx_ = grid_diff(w_, hx, 1);
    wy_ = grid_diff(w_, hy, 0);
    wxx_ = grid_diff(wx_, hx, 1);
    wyy_ = grid_diff(wy_, hy, 0);
    wxy_ = grid_diff(wx_, hy, 0);
}

ModeSample GridMode::evaluate(double x, double y) const {
    const double hx = xs_[1] - xs_[0];
    const double hy = ys_[1] - ys_[0];
    const double fx = (x - xs_.front()) / hx;
    const double fy = (y - ys_.front()) / hy;
    const double nx = static_cast<double>(xs_.size() - 1);
    const double ny = static_cast<double>(ys_.size() - 1);
    const double slack = 1e-9;
    if (fx < -slack || fy < -slack || fx > nx + slack || fy > ny + slack) {
        throw GeometryError("point lies outside the mode grid");
    }
    const auto ix = static_cast<Eigen::Index>(std::clamp(std::floor(fx), 0.0, nx - 1.0));
    const auto iy = static_cast<Eigen::Index>(std::clamp(std::floor(fy), 0.0, ny - 1.0));
    const double tx = std::clamp(fx - static_cast<double>(ix), 0.0, 1.0);
    const double ty = std::clamp(fy - static_cast<double>(iy), 0.0, 1.0);
    auto lerp = [&](const Matrix& m) {
        return (1 - ty) * ((1 - tx) * m(iy, ix) + tx * m(iy, ix + 1)) +
               ty * ((1 - tx) * m(iy + 1, ix) + tx * m(iy + 1, ix + 1));
    };
    return ModeSample{lerp(w_), lerp(wx_), lerp(wy_), lerp(wxx_), lerp(wyy_), lerp(wxy_)};
}

// ---------------------------------------------------------------- model

void WingModel::validate() const {
    if (n_m < 1) throw DimensionError("wing model needs at least one mode");
    if (omega_diag.size() != n_m) throw DimensionError("Omega_diag length must equal n_m");
    if (Ma.rows() != n_m || Ma.cols() != 3) throw DimensionError("Ma must be n_m x 3");
    if (static_cast<int>(modes.size()) != n_m) throw DimensionError("mode count must equal n_m");
    if (!omega_diag.allFinite() || (omega_diag.array() < 0.0).any()) {
        throw ConfigError("Omega entries must be finite and nonnegative");
    }
    if (!Ma.allFinite() || !std::isfinite(x_r)) throw ConfigError("Ma and x_r must be finite");
    if (!(thickness > 0.0)) throw ConfigError("thickness must be positive");
    planform.validate();
}

Polygon default_planform() {
    // Outline in millimetres: leading edge from root to tip, then back along
    // the trailing edge.
    static const double mm[][2] = {
        {0.0, 0.0},   {1.5, 10.0},  {2.5, 20.0},  {3.0, 30.0},  {3.5, 40.0},  {5.0, 46.0},
        {8.0, 49.3},  {11.0, 50.0}, {14.0, 48.5}, {17.5, 44.0}, {21.0, 36.0}, {23.0, 28.0},
        {22.5, 20.0}, {19.5, 12.0}, {14.0, 6.0},  {8.0, 2.5},   {3.5, 0.5}};
    Polygon p;
    for (const auto& v : mm) p.vertices.emplace_back(v[0] * 1e-3, v[1] * 1e-3);
    return p;
}

namespace {

struct Quadrature {
    std::vector<Point2> points;
    double cell_area = 0.0;
};

Quadrature planform_quadrature(const Polygon& planform, int cells) {
    if (cells < 4) throw ConfigError("quadrature needs at least 4 cells per side");
    const Point2 lo = planform.min_corner();
    const Point2 hi = planform.max_corner();
    const Point2 extent = hi - lo;
    const double h = std::max(extent.x(), extent.y()) / cells;
    const int nx = std::max(1, static_cast<int>(std::ceil(extent.x() / h)));
    const int ny = std::max(1, static_cast<int>(std::ceil(extent.y() / h)));
    Quadrature q;
    q.cell_area = h * h;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Point2 p(lo.x() + (i + 0.5) * h, lo.y() + (j + 0.5) * h);
            if (planform.contains(p)) q.points.push_back(p);
        }
    }
    if (q.points.empty()) throw GeometryError("planform quadrature found no interior points");
    return q;
}

}  // namespace

Matrix applied_acceleration_matrix(const Polygon& planform, const std::vector<ModeShapePtr>& modes,
                                   double areal_density, int cells) {
    const Quadrature q = planform_quadrature(planform, cells);
    Matrix Ma = Matrix::Zero(static_cast<Eigen::Index>(modes.size()), 3);
    const double dm = areal_density * q.cell_area;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        for (const auto& p : q.points) {
            const double w = modes[i]->evaluate(p.x(), p.y()).w;
            Ma(static_cast<Eigen::Index>(i), 0) -= dm * w;
            Ma(static_cast<Eigen::Index>(i), 1) += dm * w * p.y();
            Ma(static_cast<Eigen::Index>(i), 2) -= dm * w * p.x();
        }
    }
    return Ma;
}

WingModel build_assumed_mode_model(const Polygon& planform, const AssumedModeSettings& s) {
    planform.validate();
    if (s.n_m != 2 && s.n_m != 3) throw ConfigError("built-in assumed modes support n_m = 2 or 3");
    if (!(s.areal_density > 0.0) || !(s.youngs_modulus > 0.0) || !(s.shear_modulus > 0.0) ||
        !(s.thickness > 0.0)) {
        throw ConfigError("density, moduli and thickness must be positive");
    }
    if (!(s.poisson > -1.0 && s.poisson < 0.5)) throw ConfigError("Poisson ratio out of range");

    const double span = planform.max_corner().y();
    if (!(span > 0.0)) throw GeometryError("planform must extend to positive y (span)");

    std::vector<ModeShapePtr> basis = {
        std::make_shared<BeamMode>(1, span),
        std::make_shared<BeamMode>(1, span, true, 0.0),
    };
    if (s.n_m == 3) basis.push_back(std::make_shared<BeamMode>(2, span));
    const auto nb = static_cast<Eigen::Index>(basis.size());

    // Mass and orthotropic Kirchhoff stiffness matrices of the beam basis.
    const Quadrature q = planform_quadrature(planform, s.quadrature_cells);
    const double h3 = std::pow(s.thickness, 3);
    const double D = s.youngs_modulus * h3 / (12.0 * (1.0 - s.poisson * s.poisson));
    const double D66 = s.shear_modulus * h3 / 12.0;
    Matrix M = Matrix::Zero(nb, nb);
    Matrix K = Matrix::Zero(nb, nb);
    std::vector<ModeSample> samples(basis.size());
    for (const auto& p : q.points) {
        for (std::size_t i = 0; i < basis.size(); ++i) samples[i] = basis[i]->evaluate(p.x(), p.y());
        for (Eigen::Index i = 0; i < nb; ++i) {
            const ModeSample& a = samples[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j <= i; ++j) {
                const ModeSample& b = samples[static_cast<std::size_t>(j)];
                M(i, j) += a.w * b.w;
                K(i, j) += D * (a.wxx * b.wxx + a.wyy * b.wyy + s.poisson * (a.wxx * b.wyy + a.wyy * b.wxx)) +
                           4.0 * D66 * a.wxy * b.wxy;
            }
        }
    }
    M *= s.areal_density * q.cell_area;
    K *= q.cell_area;
    M = M.selfadjointView<Eigen::Lower>();
    K = K.selfadjointView<Eigen::Lower>();

    // Mass-orthonormalize in basis order (Gram-Schmidt through the Cholesky
    // factor) so the first mode stays pure bending; Omega is the Rayleigh
    // quotient of each resulting mode.
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) throw NumericError("assumed-mode mass matrix is not positive definite");
    const Matrix L = llt.matrixL();
    const Matrix T = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(nb, nb)).transpose();  // columns: mode coefficients

    WingModel model;
    model.n_m = s.n_m;
    model.omega_diag = (T.transpose() * K * T).diagonal();
    model.x_r = s.x_r;
    model.thickness = s.thickness;
    model.planform = planform;
    for (Eigen::Index k = 0; k < nb; ++k) {
        const Vector v = T.col(k);
        model.modes.push_back(std::make_shared<CombinedMode>(basis, std::vector<double>(v.data(), v.data() + v.size())));
    }
    model.Ma = applied_acceleration_matrix(planform, model.modes, s.areal_density, s.quadrature_cells);
    model.validate();
    return model;
}

WingModel default_wing_model(int n_m) {
    AssumedModeSettings s;
    s.n_m = n_m;
    return build_assumed_mode_model(default_planform(), s);
}

// ---------------------------------------------------------------- kinematics

void StrokeParams::validate() const {
    if (!(T_beat > 0.0) || !std::isfinite(T_beat)) throw ConfigError("T_beat must be positive");
    if (!std::isfinite(A_psi) || !std::isfinite(A_alpha)) throw ConfigError("stroke amplitudes must be finite");
}

EulerKinematics stroke_kinematics(double t, const StrokeParams& p) {
    const double w = 2.0 * EIGEN_PI / p.T_beat;
    const double s = std::sin(w * t);
    const double c = std::cos(w * t);
    const double k = 0.5 * EIGEN_PI;

    EulerKinematics out;
    out.angles(0) = -p.A_psi * c;
    out.rates(0) = p.A_psi * w * s;
    out.accels(0) = p.A_psi * w * w * c;

    const double g = std::tanh(k * s);
    const double sech2 = 1.0 - g * g;
    const double ds = k * w * c;       // d(k s)/dt
    const double dds = -k * w * w * s;  // d^2(k s)/dt^2
    out.angles(2) = 0.5 * EIGEN_PI - p.A_alpha * g;
    out.rates(2) = -p.A_alpha * sech2 * ds;
    out.accels(2) = -p.A_alpha * (sech2 * dds - 2.0 * g * sech2 * ds * ds);
    return out;
}

Eigen::Matrix3d plate_rotation(const Eigen::Vector3d& angles) {
    using Eigen::AngleAxisd;
    using Eigen::Vector3d;
    return (AngleAxisd(angles(0), Vector3d::UnitZ()) * AngleAxisd(angles(1), Vector3d::UnitX()) *
            AngleAxisd(angles(2), Vector3d::UnitY()))
        .toRotationMatrix();
}

BodyRates body_rates_from_euler(const EulerKinematics& kin) {
    const double th = kin.angles(1), al = kin.angles(2);
    const double dpsi = kin.rates(0), dth = kin.rates(1), dal = kin.rates(2);
    const double ddpsi = kin.accels(0), ddth = kin.accels(1), ddal = kin.accels(2);
    const double ct = std::cos(th), st = std::sin(th), ca = std::cos(al), sa = std::sin(al);

    // Plate-frame rate: Ry(a)^T (e_x th' + Rx(th)^T e_z psi') + e_y a'.
    const Eigen::Vector3d v(dth, dpsi * st, dpsi * ct);
    const Eigen::Vector3d dv(ddth, ddpsi * st + dpsi * dth * ct, ddpsi * ct - dpsi * dth * st);
    Eigen::Matrix3d RyT;
    RyT << ca, 0, -sa, 0, 1, 0, sa, 0, ca;
    Eigen::Matrix3d dRyT;
    dRyT << -sa, 0, -ca, 0, 0, 0, ca, 0, -sa;
    dRyT *= dal;

    BodyRates out;
    out.rates = RyT * v + Eigen::Vector3d(0, dal, 0);
    out.accels = dRyT * v + RyT * dv + Eigen::Vector3d(0, ddal, 0);
    return out;
}

// ---------------------------------------------------------------- dynamics

Vector wing_rhs(const Vector& x, const Eigen::Vector3d& u, const WingModel& m) {
    const int n = m.n_m;
    if (x.size() != m.state_dim()) throw DimensionError("wing state has wrong dimension");
    const double P = x(2 * n), Q = x(2 * n + 1), R = x(2 * n + 2);
    const auto eta = x.head(n);
    const auto M1 = m.Ma.col(0), M2 = m.Ma.col(1), M3 = m.Ma.col(2);

    Vector dx(x.size());
    dx.head(n) = x.segment(n, n);
    dx.segment(n, n) = -(m.omega_diag.array() - (P * P + Q * Q)).matrix().cwiseProduct(eta) +
                       (2.0 * M1 * m.x_r + M3) * (P * R) - M2 * (Q * R) - M2 * u(0) -
                       (M1 * m.x_r + M3) * u(1);
    dx.tail(3) = u;
    return dx;
}

namespace {

void require_inside(double x, double y, const WingModel& m) {
    if (!m.planform.contains(Point2(x, y))) throw GeometryError("point lies outside the planform");
}

}  // namespace

double deformation(double x, double y, const Vector& eta, const WingModel& m) {
    require_inside(x, y, m);
    if (eta.size() != m.n_m) throw DimensionError("eta length must equal n_m");
    double w = 0.0;
    for (int i = 0; i < m.n_m; ++i) w += m.modes[static_cast<std::size_t>(i)]->evaluate(x, y).w * eta(i);
    return w;
}

Eigen::RowVectorXd strain_coefficients(double x, double y, const WingModel& m, StrainKind kind) {
    require_inside(x, y, m);
    Eigen::RowVectorXd c(m.n_m);
    for (int i = 0; i < m.n_m; ++i) {
        const ModeSample s = m.modes[static_cast<std::size_t>(i)]->evaluate(x, y);
        c(i) = -0.5 * m.thickness * (kind == StrainKind::bending ? s.wyy : s.wxy);
    }
    return c;
}

double surface_strain(double x, double y, const Vector& eta, const WingModel& m, StrainKind kind) {
    if (eta.size() != m.n_m) throw DimensionError("eta length must equal n_m");
    return strain_coefficients(x, y, m, kind).dot(eta);
}

WingTrajectory simulate_wing(const WingModel& m, const StrokeParams& p, const Vector& x0, double t0,
                             double t1, double step) {
    p.validate();
    if (x0.size() != m.state_dim()) throw DimensionError("initial wing state has wrong dimension");
    const VectorField rhs = [&](double t, const Vector& x) {
        return wing_rhs(x, body_rates_from_euler(stroke_kinematics(t, p)).accels, m);
    };
    const Trajectory tr = integrate_rk4(rhs, x0, t0, t1, step);

    WingTrajectory out;
    out.t = tr.t;
    out.states.resize(static_cast<Eigen::Index>(tr.size()), m.state_dim());
    out.kinematics.resize(static_cast<Eigen::Index>(tr.size()), 3);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        out.states.row(row) = tr.x[k].transpose();
        out.kinematics.row(row) = stroke_kinematics(tr.t[k], p).angles.transpose();
    }
    return out;
}

double default_wing_step(const StrokeParams& p) { return p.T_beat / 400.0; }

Vector rest_initial_state(const WingModel& m, const StrokeParams& p) {
    Vector x = Vector::Zero(m.state_dim());
    x.tail(3) = body_rates_from_euler(stroke_kinematics(0.0, p)).rates;
    return x;
}

Vector periodic_initial_state(const WingModel& m, const StrokeParams& p, double step) {
    // Given the rate trajectory the modal states evolve affinely, so the
    // one-beat map is z -> Phi z + z_T and one solve finds its fixed point.
    const int nz = 2 * m.n_m;
    const Vector base = rest_initial_state(m, p);
    auto end_state = [&](const Vector& x0) {
        const WingTrajectory tr = simulate_wing(m, p, x0, 0.0, p.T_beat, step);
        return Vector(tr.states.row(tr.states.rows() - 1).transpose().head(nz));
    };
    const Vector zT = end_state(base);
    Matrix Phi(nz, nz);
    for (int j = 0; j < nz; ++j) {
        Vector x0 = base;
        x0(j) = 1.0;
        Phi.col(j) = end_state(x0) - zT;
    }
    const Matrix A = Matrix::Identity(nz, nz) - Phi;
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    if (qr.rank() < nz) throw NumericError("stroke period resonates with a structural mode");
    Vector x = base;
    x.head(nz) = qr.solve(zT);
    return x;
}

}  // namespace obskit
