#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lti_oracle.hpp"
#include "obskit/empirical_gramian.hpp"
#include "obskit/errors.hpp"
#include "obskit/linear_delay.hpp"
#include "test_support.hpp"

using namespace obskit;
using obskit::testing::lti_simulator;
using obskit::testing::lyapunov_gramian;
using obskit::testing::rel_error;

namespace {

std::vector<int> all_indices(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

}  // namespace

TEST(GramianMetrics, IdentityAndDiagonal) {
    auto m = gramian_metrics(Matrix::Identity(3, 3));
    EXPECT_DOUBLE_EQ(m.nu, 1.0);
    EXPECT_DOUBLE_EQ(m.kappa, 1.0);
    EXPECT_NEAR(m.det_root, 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(m.trace, 3.0);
    EXPECT_FALSE(m.singular);

    Matrix D = Eigen::Vector2d(4.0, 1.0).asDiagonal();
    m = gramian_metrics(D);
    EXPECT_DOUBLE_EQ(m.nu, 1.0);
    EXPECT_DOUBLE_EQ(m.kappa, 4.0);
    EXPECT_NEAR(m.det_root, 2.0, 1e-14);
}

TEST(GramianMetrics, SingularSentinels) {
    Matrix W = Eigen::Vector3d(1.0, 2.0, 0.0).asDiagonal();
    auto m = gramian_metrics(W);
    EXPECT_TRUE(m.singular);
    EXPECT_TRUE(std::isinf(m.nu));
    EXPECT_TRUE(std::isinf(m.kappa));
    EXPECT_EQ(m.det_root, 0.0);
    EXPECT_FALSE(m.log_det.has_value());
    EXPECT_EQ(m.rank, 2);
}

TEST(GramianMetrics, OrderingPropertiesOnRandomPsd) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        Matrix G = obskit::testing::random_matrix(rng, 4, 4);
        auto m = gramian_metrics(G * G.transpose());
        EXPECT_GE(m.kappa, 1.0);
        EXPECT_LE(m.det_root, m.trace / 4.0 * (1 + 1e-12));
    }
}

TEST(EmpiricalGramian, ZeroAndDefinition) {
    OutputSimulator silent = [](const Vector&) { return OutputSeries{0.01, Matrix::Zero(101, 1)}; };
    GramianJob job{silent, Vector::Zero(3), {0, 1, 2}, 1e-3};
    auto r = empirical_gramian(job);
    EXPECT_TRUE(r.W.isZero(0.0));
    EXPECT_TRUE(std::isinf(r.metrics.nu));
    auto verdict = weak_observability(r);
    EXPECT_FALSE(verdict.observable);
    EXPECT_EQ(verdict.rank, 0);

    // One perturbed index: (1 / 4 eps^2) integral (y+ - y-)^2 dt.
    OutputSimulator quad = [](const Vector& x) {
        OutputSeries s{0.1, Matrix(11, 1)};
        for (int i = 0; i <= 10; ++i) s.y(i, 0) = x(0) * x(0) + x(0) * (i * 0.1);
        return s;
    };
    Vector x0(1);
    x0 << 0.5;
    const double eps = 1e-2;
    auto one = empirical_gramian(GramianJob{quad, x0, {0}, eps});
    std::vector<double> d2;
    for (int i = 0; i <= 10; ++i) {
        const double yp = std::pow(0.5 + eps, 2) + (0.5 + eps) * i * 0.1;
        const double ym = std::pow(0.5 - eps, 2) + (0.5 - eps) * i * 0.1;
        d2.push_back((yp - ym) * (yp - ym));
    }
    double integral = 0.0;
    for (int i = 0; i < 10; ++i) integral += 0.05 * (d2[static_cast<std::size_t>(i)] + d2[static_cast<std::size_t>(i + 1)]);
    ASSERT_EQ(one.dim(), 1);
    EXPECT_NEAR(one.W(0, 0), integral / (4 * eps * eps), 1e-10);
}

TEST(EmpiricalGramian, StaticIdentityOutput) {
    const double T = 2.0;
    Matrix A = Matrix::Zero(3, 3), C = Matrix::Identity(3, 3);
    auto r = empirical_gramian(GramianJob{lti_simulator(A, C, T, 0.01), Vector::Zero(3), all_indices(3), 1e-3});
    EXPECT_LE(rel_error(r.W, T * Matrix::Identity(3, 3)), 1e-12);
}

TEST(EmpiricalGramian, DoubleIntegratorMoments) {
    Matrix A(2, 2), C(1, 2);
    A << 0, 1, 0, 0;
    C << 1, 0;
    auto r = empirical_gramian(GramianJob{lti_simulator(A, C, 1.0, 1e-3), Vector::Zero(2), {0, 1}, 1e-3});
    Matrix expect(2, 2);
    expect << 1, 0.5, 0.5, 1.0 / 3.0;
    EXPECT_LE(rel_error(r.W, expect), 1e-6);
    EXPECT_TRUE(weak_observability(r).observable);
}

TEST(EmpiricalGramian, ZeroOutputMatrix) {
    Matrix A = -Matrix::Identity(2, 2), C = Matrix::Zero(1, 2);
    auto r = empirical_gramian(GramianJob{lti_simulator(A, C, 1.0, 0.01), Vector::Zero(2), {0, 1}, 1e-3});
    EXPECT_TRUE(r.W.isZero(0.0));
}

TEST(EmpiricalGramian, LtiMatchesLyapunovOracleForAnyEpsilon) {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix A = obskit::testing::random_hurwitz(rng, 3);
        Matrix C = obskit::testing::random_matrix(rng, 1, 3);
        Vector x0 = obskit::testing::random_matrix(rng, 3, 1);
        const Matrix oracle = lyapunov_gramian(A, C, 2.0);
        for (double eps : {1e-4, 1e-2, 1.0}) {
            auto r = empirical_gramian(GramianJob{lti_simulator(A, C, 2.0, 2e-4), x0, all_indices(3), eps});
            EXPECT_LE(rel_error(r.W, oracle), 1e-6);
        }
        // The library's Simpson-quadrature path agrees with the same oracle.
        EXPECT_LE(rel_error(analytic_lti_gramian(A, C, 0.0, 2.0), oracle), 1e-9);
    }
}

TEST(EmpiricalGramian, AdditivityOverOutputs) {
    std::mt19937_64 rng(61);
    Matrix A = obskit::testing::random_hurwitz(rng, 3);
    Matrix C = obskit::testing::random_matrix(rng, 2, 3);
    Vector x0 = Vector::Zero(3);
    auto both = empirical_gramian(GramianJob{lti_simulator(A, C, 1.5, 1e-3), x0, all_indices(3), 1e-3});
    auto first = empirical_gramian(GramianJob{lti_simulator(A, C.topRows(1), 1.5, 1e-3), x0, all_indices(3), 1e-3});
    auto second = empirical_gramian(GramianJob{lti_simulator(A, C.bottomRows(1), 1.5, 1e-3), x0, all_indices(3), 1e-3});
    EXPECT_LE(rel_error(both.W, first.W + second.W), 1e-13);
}

TEST(EmpiricalGramian, HorizonTruncation) {
    Matrix A = Matrix::Zero(1, 1), C = Matrix::Identity(1, 1);
    GramianJob job{lti_simulator(A, C, 2.0, 0.01), Vector::Zero(1), {0}, 1e-3, 0.5};
    EXPECT_NEAR(empirical_gramian(job).W(0, 0), 0.5, 1e-12);
}

TEST(EmpiricalGramian, DifferencingIntegratorAgreesWithDelayVerdict) {
    // Sampled double integrator observed through y_k = x1_k - x1_{k-1}: the
    // discrete empirical Gramian must be rank deficient like its delayed
    // observability matrix.
    const double ts = 0.1;
    Matrix A(2, 2);
    A << 1, ts, 0, 1;
    OutputSimulator sim = [A](const Vector& x_old) {
        OutputSeries s{1.0, Matrix(20, 1)};
        Vector prev = x_old, cur = A * x_old;
        for (int k = 0; k < 20; ++k) {
            s.y(k, 0) = cur(0) - prev(0);
            prev = cur;
            cur = A * cur;
        }
        return s;
    };
    auto r = empirical_gramian(GramianJob{sim, Vector::Zero(2), {0, 1}, 1e-3});
    EXPECT_FALSE(weak_observability(r, 1e-9).observable);
    Matrix C(1, 2);
    C << 1, 0;
    LinearDelaySystem sys{A, Matrix::Zero(2, 0), {C, -C}};
    EXPECT_LT(numeric_rank(delayed_observability_matrix(sys)), 2);
}

TEST(EmpiricalGramian, DivergenceReportsIndex) {
    OutputSimulator bad = [](const Vector& x) -> OutputSeries {
        if (x(1) > 0.0) throw IntegrationDiverged(0.1, "boom");
        return OutputSeries{0.1, Matrix::Zero(3, 1)};
    };
    try {
        empirical_gramian(GramianJob{bad, Vector::Zero(2), {0, 1}, 1e-3});
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos);
    }
}

TEST(GramianJob, Validation) {
    OutputSimulator sim = [](const Vector&) { return OutputSeries{0.1, Matrix::Zero(3, 1)}; };
    EXPECT_THROW((GramianJob{sim, Vector::Zero(2), {}, 1e-3}.validate()), ConfigError);
    EXPECT_THROW((GramianJob{sim, Vector::Zero(2), {2}, 1e-3}.validate()), ConfigError);
    EXPECT_THROW((GramianJob{sim, Vector::Zero(2), {0, 0}, 1e-3}.validate()), ConfigError);
    EXPECT_THROW((GramianJob{sim, Vector::Zero(2), {0}, 0.0}.validate()), ConfigError);
}
