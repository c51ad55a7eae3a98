#include "obskit/linear_delay.hpp"

#include <cmath>
#include <sstream>

#include "obskit/errors.hpp"

namespace obskit {

namespace {

std::vector<Matrix> matrix_powers(const Matrix& A, int count) {
    std::vector<Matrix> powers;
    powers.reserve(static_cast<std::size_t>(count));
    powers.push_back(Matrix::Identity(A.rows(), A.cols()));
    for (int i = 1; i < count; ++i) powers.push_back(powers.back() * A);
    return powers;
}

void require_square(const Matrix& A, const char* who) {
    if (A.rows() != A.cols() || A.rows() == 0) {
        std::ostringstream msg;
        msg << who << ": A must be square and non-empty";
        throw DimensionError(msg.str());
    }
}

}  // namespace

void LinearDelaySystem::validate() const {
    require_square(A, "LinearDelaySystem");
    if (B.rows() != A.rows()) throw DimensionError("LinearDelaySystem: B row count must equal n");
    if (taps.empty()) throw DimensionError("LinearDelaySystem: at least one tap is required");
    for (const auto& tap : taps) {
        if (tap.rows() != taps.front().rows() || tap.cols() != A.rows()) {
            throw DimensionError("LinearDelaySystem: every tap must be p x n");
        }
    }
}

void UniformTaps::validate() const {
    if (gammas.empty()) throw InputError("UniformTaps: gammas must not be empty");
    bool any = false;
    for (double g : gammas) any = any || g != 0.0;
    if (!any) throw InputError("UniformTaps: at least one gamma must be nonzero");
}

void HeterogeneousTaps::validate() const {
    if (gains.empty()) throw InputError("HeterogeneousTaps: gains must not be empty");
    for (const auto& G : gains) {
        if (G.rows() != C.rows() || G.cols() != C.rows()) {
            throw DimensionError("HeterogeneousTaps: every gain must be p x p");
        }
    }
}

LinearDelaySystem make_system(const Matrix& A, const Matrix& B, const UniformTaps& taps) {
    taps.validate();
    LinearDelaySystem sys{A, B, {}};
    for (double g : taps.gammas) sys.taps.push_back(g * taps.C);
    sys.validate();
    return sys;
}

LinearDelaySystem make_system(const Matrix& A, const Matrix& B, const HeterogeneousTaps& taps) {
    taps.validate();
    LinearDelaySystem sys{A, B, {}};
    for (const auto& G : taps.gains) sys.taps.push_back(G * taps.C);
    sys.validate();
    return sys;
}

Matrix tstep_observability(const Matrix& A, const Matrix& C, int T) {
    require_square(A, "tstep_observability");
    if (T < 1) throw InputError("tstep_observability: T must be at least 1");
    if (C.cols() != A.rows()) throw DimensionError("tstep_observability: C must have n columns");
    const auto p = C.rows();
    Matrix O(p * T, A.cols());
    Matrix block = C;
    for (int k = 0; k < T; ++k) {
        O.middleRows(k * p, p) = block;
        block = block * A;
    }
    return O;
}

Matrix effective_output_matrix(const LinearDelaySystem& sys) {
    sys.validate();
    const int N = sys.window();
    const auto powers = matrix_powers(sys.A, N + 1);
    Matrix Cbar = Matrix::Zero(sys.outputs(), sys.states());
    for (int tau = 0; tau <= N; ++tau) Cbar += sys.taps[tau] * powers[N - tau];
    return Cbar;
}

Matrix delayed_observability_matrix(const LinearDelaySystem& sys) {
    return tstep_observability(sys.A, effective_output_matrix(sys), sys.states());
}

UniformFactorization uniform_factorization(const Matrix& A, const UniformTaps& uniform,
                                           double rtol) {
    require_square(A, "uniform_factorization");
    uniform.validate();
    const int n = static_cast<int>(A.rows());
    const int N = static_cast<int>(uniform.gammas.size()) - 1;

    UniformFactorization out;
    const auto powers = matrix_powers(A, N + 1);
    out.poly = Matrix::Zero(n, n);
    for (int j = 0; j <= N; ++j) out.poly += uniform.gammas[N - j] * powers[j];

    const Matrix On = tstep_observability(A, uniform.C, n);
    const LinearDelaySystem sys = make_system(A, Matrix::Zero(n, 0), uniform);
    const Matrix Obar = delayed_observability_matrix(sys);

    const double scale = On.norm() * out.poly.norm();
    const double diff = (Obar - On * out.poly).norm();
    out.residual = scale > 0.0 ? diff / scale : diff;
    out.rank_delayed = numeric_rank(Obar, rtol);
    out.rank_delayfree = numeric_rank(On, rtol);
    out.poly_condition = condition_number(out.poly);
    out.poly_singular = numeric_rank(out.poly, rtol) < n;
    return out;
}

HeterogeneousRankBound heterogeneous_rank_bound(const Matrix& A, const HeterogeneousTaps& het,
                                                double rtol) {
    require_square(A, "heterogeneous_rank_bound");
    het.validate();
    const int n = static_cast<int>(A.rows());
    const int N = static_cast<int>(het.gains.size()) - 1;
    const auto p = het.C.rows();

    // O_bar = T(G) [C; CA; ...; CA^{N+n-1}] with block-Toeplitz T(G) whose
    // row block j holds G_N, G_{N-1}, ..., G_0 starting at column block j.
    const Matrix Olong = tstep_observability(A, het.C, N + n);
    Matrix toeplitz = Matrix::Zero(p * n, p * (N + n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= N; ++i) {
            toeplitz.block(j * p, (j + i) * p, p, p) = het.gains[N - i];
        }
    }
    const Matrix Obar = toeplitz * Olong;
    const Matrix Odirect = delayed_observability_matrix(make_system(A, Matrix::Zero(n, 0), het));

    HeterogeneousRankBound out;
    const double scale = std::max(Odirect.norm(), 1e-300);
    out.residual = (Obar - Odirect).norm() / scale;
    out.rank_delayed = numeric_rank(Obar, rtol);
    out.rank_delayfree = numeric_rank(tstep_observability(A, het.C, n), rtol);
    out.bound_holds = out.rank_delayed <= out.rank_delayfree;
    return out;
}

std::vector<Vector> simulate_delay_outputs(const LinearDelaySystem& sys, const Vector& x_oldest,
                                           const std::vector<Vector>& inputs, int count) {
    sys.validate();
    const int N = sys.window();
    const int m = sys.inputs();
    const std::size_t needed = static_cast<std::size_t>(N + count - 1);
    if (m > 0 && inputs.size() < needed) throw InputError("simulate_delay_outputs: input history too short");

    // states[i] = x_{k-N+i}
    std::vector<Vector> states{x_oldest};
    for (std::size_t i = 0; i < needed; ++i) {
        Vector next = sys.A * states.back();
        if (m > 0) next += sys.B * inputs[i];
        states.push_back(std::move(next));
    }
    std::vector<Vector> outputs;
    for (int j = 0; j < count; ++j) {
        Vector y = Vector::Zero(sys.outputs());
        for (int tau = 0; tau <= N; ++tau) y += sys.taps[tau] * states[N + j - tau];
        outputs.push_back(std::move(y));
    }
    return outputs;
}

Vector reconstruct_initial_state(const LinearDelaySystem& sys, const std::vector<Vector>& outputs,
                                 const std::vector<Vector>& inputs, double rtol) {
    sys.validate();
    const int n = sys.states();
    const int p = sys.outputs();
    const int m = sys.inputs();
    const int N = sys.window();

    if (static_cast<int>(outputs.size()) != n) {
        throw InputError("reconstruct_initial_state: exactly n consecutive outputs are required");
    }
    for (const auto& y : outputs) {
        if (y.size() != p) throw DimensionError("reconstruct_initial_state: output has wrong size");
    }
    const std::size_t needed = m > 0 ? static_cast<std::size_t>(N + n - 1) : 0;
    if (m > 0 && inputs.size() != needed) {
        std::ostringstream msg;
        msg << "reconstruct_initial_state: expected " << needed
            << " inputs u_{k-N} .. u_{k+n-2}, got " << inputs.size();
        throw InputError(msg.str());
    }
    for (const auto& u : inputs) {
        if (u.size() != m) throw DimensionError("reconstruct_initial_state: input has wrong size");
    }

    const Matrix Obar = delayed_observability_matrix(sys);
    if (numeric_rank(Obar, rtol) < n) {
        throw UnobservableError("reconstruct_initial_state: delayed observability matrix is rank deficient");
    }

    const auto powers = matrix_powers(sys.A, std::max(N, n) + 1);
    const Matrix Cbar = effective_output_matrix(sys);

    // inputs[i] = u_{k-N+i}; y_{k+j} uses u_{k+j-tau} = inputs[N + j - tau].
    Vector stacked(p * n);
    for (int j = 0; j < n; ++j) {
        Vector corrected = outputs[j];
        if (m > 0) {
            for (int tau = 1; tau <= N; ++tau) {
                Matrix gain = Matrix::Zero(p, n);
                for (int i = 1; i <= tau; ++i) gain += sys.taps[i - 1] * powers[tau - i];
                corrected -= gain * sys.B * inputs[N + j - tau];
            }
            for (int i = 0; i < j; ++i) {
                corrected -= Cbar * powers[j - 1 - i] * sys.B * inputs[i];
            }
        }
        stacked.segment(j * p, p) = corrected;
    }
    return Obar.colPivHouseholderQr().solve(stacked);
}

}  // namespace obskit
