#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "obskit/errors.hpp"
#include "obskit/linear_delay.hpp"
#include "test_support.hpp"

using namespace obskit;
using obskit::testing::random_matrix;
using obskit::testing::random_with_radius;

namespace {

Matrix double_integrator(double ts) {
    Matrix A(2, 2);
    A << 1, ts, 0, 1;
    return A;
}

Matrix row(double a, double b) {
    Matrix C(1, 2);
    C << a, b;
    return C;
}

// Zero-input oracle: stacks y_k .. y_{k+n-1} produced from unit initial
// states by explicit state propagation.
Matrix oracle_delayed_observability(const LinearDelaySystem& sys) {
    const int n = sys.states(), p = sys.outputs(), N = sys.window();
    Matrix O(p * n, n);
    for (int col = 0; col < n; ++col) {
        std::vector<Vector> xs{Vector::Unit(n, col)};
        for (int i = 0; i < N + n; ++i) xs.push_back(sys.A * xs.back());
        for (int j = 0; j < n; ++j) {
            Vector y = Vector::Zero(p);
            for (int tau = 0; tau <= N; ++tau) y += sys.taps[tau] * xs[N + j - tau];
            O.block(j * p, col, p, 1) = y;
        }
    }
    return O;
}

// Block lower-triangular A with C reading only the first block: the second
// block is unobservable by construction.
std::pair<Matrix, Matrix> unobservable_pair(std::mt19937_64& rng, int n, int p) {
    const int n1 = n / 2;
    Matrix A = random_with_radius(rng, n, 0.9);
    A.block(0, n1, n1, n - n1).setZero();
    Matrix C = Matrix::Zero(p, n);
    C.leftCols(n1) = random_matrix(rng, p, n1);
    return {A, C};
}

}  // namespace

TEST(TStepObservability, Examples) {
    Matrix O = tstep_observability(Matrix::Identity(2, 2), row(1, 0), 2);
    Matrix expect(2, 2);
    expect << 1, 0, 1, 0;
    EXPECT_EQ(O, expect);
    EXPECT_EQ(numeric_rank(O), 1);

    const double ts = 0.1;
    O = tstep_observability(double_integrator(ts), row(1, 0), 2);
    expect << 1, 0, 1, ts;
    EXPECT_TRUE(O.isApprox(expect));
    EXPECT_EQ(numeric_rank(O), 2);

    std::mt19937_64 rng(3);
    Matrix A = random_matrix(rng, 4, 4);
    EXPECT_EQ(tstep_observability(A, Matrix::Identity(4, 4), 1), Matrix::Identity(4, 4));
}

TEST(TStepObservability, Errors) {
    EXPECT_THROW(tstep_observability(Matrix::Identity(2, 2), row(1, 0), 0), InputError);
    EXPECT_THROW(tstep_observability(Matrix::Identity(3, 3), row(1, 0), 2), DimensionError);
    EXPECT_THROW(tstep_observability(Matrix::Zero(2, 3), row(1, 0), 2), DimensionError);
}

TEST(EffectiveOutput, DifferencingDoubleIntegrator) {
    for (double ts : {0.01, 0.1, 1.0}) {
        LinearDelaySystem sys{double_integrator(ts), Matrix::Zero(2, 1), {row(1, 0), row(-1, 0)}};
        Matrix Cbar = effective_output_matrix(sys);
        EXPECT_NEAR(Cbar(0, 0), 0.0, 1e-15);
        EXPECT_NEAR(Cbar(0, 1), ts, 1e-15);
        Matrix O = delayed_observability_matrix(sys);
        Matrix expect(2, 2);
        expect << 0, ts, 0, ts;
        EXPECT_TRUE(O.isApprox(expect, 1e-14));
        EXPECT_EQ(numeric_rank(O), 1);
    }
}

TEST(EffectiveOutput, NoDelayAndZeroTaps) {
    std::mt19937_64 rng(5);
    Matrix A = random_matrix(rng, 3, 3), C0 = random_matrix(rng, 2, 3);
    LinearDelaySystem sys{A, Matrix::Zero(3, 0), {C0}};
    EXPECT_EQ(effective_output_matrix(sys), C0);
    sys.taps = {Matrix::Zero(2, 3), Matrix::Zero(2, 3), Matrix::Zero(2, 3)};
    EXPECT_TRUE(effective_output_matrix(sys).isZero(0.0));
}

TEST(DelayedObservability, MatchesSimulationOracle) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 5, p = 1 + trial % 2, N = trial % 4;
        LinearDelaySystem sys{random_with_radius(rng, n, 1.1), Matrix::Zero(n, 0), {}};
        for (int tau = 0; tau <= N; ++tau) sys.taps.push_back(random_matrix(rng, p, n));
        EXPECT_LE(obskit::testing::rel_error(delayed_observability_matrix(sys), oracle_delayed_observability(sys)),
                  1e-12);
    }
}

TEST(DelayedObservability, ReducesToClassicalAtZeroDelay) {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix A = random_matrix(rng, 4, 4), C = random_matrix(rng, 1, 4);
        LinearDelaySystem sys{A, Matrix::Zero(4, 0), {C}};
        EXPECT_EQ(numeric_rank(delayed_observability_matrix(sys)), numeric_rank(tstep_observability(A, C, 4)));
    }
    LinearDelaySystem eye{Matrix::Identity(3, 3) * 0.5, Matrix::Zero(3, 0), {Matrix::Identity(3, 3)}};
    EXPECT_EQ(numeric_rank(delayed_observability_matrix(eye)), 3);
}

TEST(UniformFactorization, DifferencingPolynomialIsSingular) {
    for (double ts : {0.01, 0.1, 1.0}) {
        auto f = uniform_factorization(double_integrator(ts), UniformTaps{row(1, 0), {1.0, -1.0}});
        EXPECT_TRUE(f.poly_singular);
        EXPECT_EQ(f.rank_delayed, 1);
        EXPECT_EQ(f.rank_delayfree, 2);
        EXPECT_LE(f.residual, 1e-14);
    }
}

TEST(UniformFactorization, PureDelayOfNonsingularA) {
    std::mt19937_64 rng(23);
    Matrix A = random_matrix(rng, 3, 3), C = random_matrix(rng, 1, 3);
    auto f = uniform_factorization(A, UniformTaps{C, {1.0, 0.0, 0.0, 0.0}});
    Matrix A3 = A * A * A;
    EXPECT_TRUE(f.poly.isApprox(A3, 1e-12));
    EXPECT_EQ(f.rank_delayed, f.rank_delayfree);
}

TEST(UniformFactorization, RandomIdentityAndRankEquality) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 6, N = trial % 7;
        Matrix A = random_with_radius(rng, n, 0.95);
        Matrix C = random_matrix(rng, 1 + trial % 2, n);
        std::vector<double> g(N + 1);
        for (auto& v : g) v = ud(rng);
        auto f = uniform_factorization(A, UniformTaps{C, g});
        // Oracle: the factorization from the simulated delayed observability matrix.
        LinearDelaySystem sys = make_system(A, Matrix::Zero(n, 0), UniformTaps{C, g});
        Matrix Obar = oracle_delayed_observability(sys);
        Matrix On = tstep_observability(A, C, n);
        EXPECT_LE((Obar - On * f.poly).norm(), 1e-12 * std::max(1.0, On.norm() * f.poly.norm()));
        if (f.poly_condition < 1e8) EXPECT_EQ(f.rank_delayed, f.rank_delayfree);
    }
}

TEST(HeterogeneousRankBound, UniformSpecialCaseAgrees) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 4, p = 2, N = 1 + trial % 3;
        Matrix A = random_with_radius(rng, n, 0.9), C = random_matrix(rng, p, n);
        std::vector<double> g(N + 1);
        HeterogeneousTaps het{C, {}};
        for (auto& v : g) {
            v = std::uniform_real_distribution<double>(-1, 1)(rng);
            het.gains.push_back(v * Matrix::Identity(p, p));
        }
        auto h = heterogeneous_rank_bound(A, het);
        auto u = uniform_factorization(A, UniformTaps{C, g});
        EXPECT_EQ(h.rank_delayed, u.rank_delayed);
        EXPECT_EQ(h.rank_delayfree, u.rank_delayfree);
        EXPECT_LE(h.residual, 1e-12);
    }
}

TEST(HeterogeneousRankBound, UnobservablePairsStayUnobservable) {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 5, p = 1 + trial % 3, N = trial % 5;
        auto [A, C] = unobservable_pair(rng, n, p);
        HeterogeneousTaps het{C, {}};
        for (int tau = 0; tau <= N; ++tau) het.gains.push_back(random_matrix(rng, p, 1).asDiagonal());
        auto h = heterogeneous_rank_bound(A, het);
        EXPECT_LT(h.rank_delayed, n);
        EXPECT_TRUE(h.bound_holds);
    }
}

TEST(HeterogeneousRankBound, PureCurrentTapKeepsFullRank) {
    std::mt19937_64 rng(41);
    Matrix A = random_matrix(rng, 4, 4), C = random_matrix(rng, 1, 4);
    HeterogeneousTaps het{C, {Matrix::Identity(1, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1)}};
    EXPECT_EQ(heterogeneous_rank_bound(A, het).rank_delayed, 4);
}

TEST(Reconstruction, ZeroInputRoundTrip) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 4, N = trial % 4;
        LinearDelaySystem sys{random_with_radius(rng, n, 0.9), Matrix::Zero(n, 0), {}};
        for (int tau = 0; tau <= N; ++tau) sys.taps.push_back(random_matrix(rng, 1, n));
        Vector x = random_matrix(rng, n, 1);
        auto ys = simulate_delay_outputs(sys, x, {}, n);
        EXPECT_LE((reconstruct_initial_state(sys, ys, {}) - x).norm(), 1e-9 * std::max(1.0, x.norm()));
    }
}

TEST(Reconstruction, InputCorrectionAndInputInvariance) {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 4, m = 1 + trial % 2, N = trial % 4;
        LinearDelaySystem sys{random_with_radius(rng, n, 0.9), random_matrix(rng, n, m), {}};
        for (int tau = 0; tau <= N; ++tau) sys.taps.push_back(random_matrix(rng, 2, n));
        Vector x = random_matrix(rng, n, 1);
        std::vector<Vector> u1, u2;
        for (int i = 0; i < N + n - 1; ++i) {
            u1.push_back(random_matrix(rng, m, 1));
            u2.push_back(random_matrix(rng, m, 1));
        }
        Vector x1 = reconstruct_initial_state(sys, simulate_delay_outputs(sys, x, u1, n), u1);
        Vector x2 = reconstruct_initial_state(sys, simulate_delay_outputs(sys, x, u2, n), u2);
        EXPECT_LE((x1 - x).norm(), 1e-9 * std::max(1.0, x.norm()));
        EXPECT_LE((x1 - x2).norm(), 1e-9 * std::max(1.0, x.norm()));
    }
}

TEST(Reconstruction, UnobservableAndBadHistory) {
    LinearDelaySystem sys{double_integrator(0.1), Matrix::Zero(2, 1), {row(1, 0), row(-1, 0)}};
    std::vector<Vector> ys(2, Vector::Zero(1));
    std::vector<Vector> us(2, Vector::Zero(1));
    EXPECT_THROW(reconstruct_initial_state(sys, ys, us), UnobservableError);
    LinearDelaySystem ok{double_integrator(0.1), Matrix::Zero(2, 1), {row(1, 0)}};
    EXPECT_THROW(reconstruct_initial_state(ok, ys, {}), InputError);
}

TEST(LinearDelaySystem, Validation) {
    LinearDelaySystem bad{Matrix::Identity(2, 2), Matrix::Zero(3, 1), {row(1, 0)}};
    EXPECT_THROW(bad.validate(), DimensionError);
    LinearDelaySystem mixed{Matrix::Identity(2, 2), Matrix::Zero(2, 1), {row(1, 0), Matrix::Zero(2, 2)}};
    EXPECT_THROW(mixed.validate(), DimensionError);
    EXPECT_THROW((UniformTaps{row(1, 0), {0.0, 0.0}}.validate()), InputError);
}
