#pragma once

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace obskit::testing {

/// Sparse multivariate polynomial with exact symbolic differentiation; the
/// independent oracle for Lie derivatives of polynomial systems.
class Poly {
  public:
    using Exponents = std::vector<int>;

    explicit Poly(int vars = 0) : vars_(vars) {}

    static Poly constant(int vars, double c) {
        Poly p(vars);
        p.add_term(Exponents(vars, 0), c);
        return p;
    }
    static Poly variable(int vars, int i) {
        Poly p(vars);
        Exponents e(vars, 0);
        e[i] = 1;
        p.add_term(e, 1.0);
        return p;
    }

    void add_term(const Exponents& e, double c) {
        if (c == 0.0) return;
        terms_[e] += c;
    }

    double operator()(const Eigen::VectorXd& x) const {
        double acc = 0.0;
        for (const auto& [e, c] : terms_) {
            double t = c;
            for (int i = 0; i < vars_; ++i) t *= std::pow(x(i), e[i]);
            acc += t;
        }
        return acc;
    }

    Poly derivative(int i) const {
        Poly d(vars_);
        for (const auto& [e, c] : terms_) {
            if (e[i] == 0) continue;
            Exponents f = e;
            f[i] -= 1;
            d.add_term(f, c * e[i]);
        }
        return d;
    }

    Poly operator+(const Poly& o) const {
        Poly s = *this;
        for (const auto& [e, c] : o.terms_) s.add_term(e, c);
        return s;
    }

    Poly operator*(const Poly& o) const {
        Poly s(vars_);
        for (const auto& [e1, c1] : terms_) {
            for (const auto& [e2, c2] : o.terms_) {
                Exponents e(vars_);
                for (int i = 0; i < vars_; ++i) e[i] = e1[i] + e2[i];
                s.add_term(e, c1 * c2);
            }
        }
        return s;
    }

    int vars() const { return vars_; }

  private:
    int vars_;
    std::map<Exponents, double> terms_;
};

/// L_f h = grad(h) . f, computed symbolically.
inline Poly lie(const std::vector<Poly>& f, const Poly& h) {
    Poly acc(h.vars());
    for (int i = 0; i < h.vars(); ++i) acc = acc + h.derivative(i) * f[static_cast<std::size_t>(i)];
    return acc;
}

struct PolySystem {
    std::vector<Poly> f;
    Poly h;
};

/// Random system with linear-plus-quadratic drift and quadratic output. The
/// linear part is contracting so flows stay bounded over short horizons.
inline PolySystem random_poly_system(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    PolySystem s{std::vector<Poly>(static_cast<std::size_t>(n), Poly(n)), Poly(n)};
    for (int i = 0; i < n; ++i) {
        Poly fi(n);
        for (int j = 0; j < n; ++j) {
            Poly::Exponents e(n, 0);
            e[j] = 1;
            fi.add_term(e, ud(rng) - (i == j ? 0.5 : 0.0));
            for (int k = j; k < n; ++k) {
                Poly::Exponents q(n, 0);
                q[j] += 1;
                q[k] += 1;
                fi.add_term(q, 0.3 * ud(rng));
            }
        }
        s.f[static_cast<std::size_t>(i)] = fi;
    }
    for (int j = 0; j < n; ++j) {
        Poly::Exponents e(n, 0);
        e[j] = 1;
        s.h.add_term(e, ud(rng));
        for (int k = j; k < n; ++k) {
            Poly::Exponents q(n, 0);
            q[j] += 1;
            q[k] += 1;
            s.h.add_term(q, 0.5 * ud(rng));
        }
    }
    return s;
}

}  // namespace obskit::testing
