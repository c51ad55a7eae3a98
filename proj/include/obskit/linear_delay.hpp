#pragma once

#include <vector>

#include "obskit/numerics.hpp"

namespace obskit {

/// Discrete LTI system whose output is a finite window of past states:
///   x_{k+1} = A x_k + B u_k,   y_k = sum_{tau=0}^{N} C_tau x_{k-tau}.
/// taps[tau] holds C_tau; tau counts backwards from the current sample.
struct LinearDelaySystem {
    Matrix A;
    Matrix B;
    std::vector<Matrix> taps;

    int states() const { return static_cast<int>(A.rows()); }
    int outputs() const { return taps.empty() ? 0 : static_cast<int>(taps.front().rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int window() const { return static_cast<int>(taps.size()) - 1; }

    void validate() const;
};

/// Taps C_tau = gamma_tau * C.
struct UniformTaps {
    Matrix C;
    std::vector<double> gammas;

    void validate() const;
};

/// Taps C_tau = G_tau * C with one gain matrix per lag (usually diagonal).
struct HeterogeneousTaps {
    Matrix C;
    std::vector<Matrix> gains;

    void validate() const;
};

LinearDelaySystem make_system(const Matrix& A, const Matrix& B, const UniformTaps& taps);
LinearDelaySystem make_system(const Matrix& A, const Matrix& B, const HeterogeneousTaps& taps);

/// [C; CA; ...; CA^{T-1}]
Matrix tstep_observability(const Matrix& A, const Matrix& C, int T);

/// C_bar = sum_tau C_tau A^{N - tau}
Matrix effective_output_matrix(const LinearDelaySystem& sys);

/// [C_bar; C_bar A; ...; C_bar A^{n-1}]
Matrix delayed_observability_matrix(const LinearDelaySystem& sys);

struct UniformFactorization {
    Matrix poly;                  // P(A) = sum_j gamma_{N-j} A^j
    int rank_delayed = 0;         // rank of the delayed observability matrix
    int rank_delayfree = 0;       // rank of O_n
    bool poly_singular = false;
    double poly_condition = 0.0;
    double residual = 0.0;        // ||O_bar - O_n P(A)||_F / (||O_n||_F ||P(A)||_F)
};

UniformFactorization uniform_factorization(const Matrix& A, const UniformTaps& uniform,
                                           double rtol = 1e-10);

struct HeterogeneousRankBound {
    int rank_delayed = 0;
    int rank_delayfree = 0;
    bool bound_holds = false;
    double residual = 0.0;  // block-product route vs. direct C_bar route
};

HeterogeneousRankBound heterogeneous_rank_bound(const Matrix& A, const HeterogeneousTaps& het,
                                                double rtol = 1e-10);

/// Outputs y_k .. y_{k+count-1} generated from x_{k-N} and the inputs
/// u_{k-N} .. u_{k+count-2}.
std::vector<Vector> simulate_delay_outputs(const LinearDelaySystem& sys, const Vector& x_oldest,
                                           const std::vector<Vector>& inputs, int count);

/// Recovers x_{k-N} from n consecutive outputs y_k .. y_{k+n-1} and the input
/// history u_{k-N} .. u_{k+n-2} (N + n - 1 vectors; may be empty when m = 0).
/// Throws UnobservableError when the delayed observability matrix is rank
/// deficient and InputError on inconsistent history lengths.
Vector reconstruct_initial_state(const LinearDelaySystem& sys, const std::vector<Vector>& outputs,
                                 const std::vector<Vector>& inputs, double rtol = 1e-10);

}  // namespace obskit
