#pragma once

// Rank-one elementary divisors R(x) = I + (z - zeta)/(x - z) * f g/(g f),
// with g a formal row vector (transpose pairing, never conjugation). R has
// a simple pole at z, det R(x) = (x - zeta)/(x - z), and the inverse swaps
// the roles of pole and zero.

#include <cmath>
#include <complex>

#include "schlesinger/errors.hpp"
#include "schlesinger/linalg.hpp"

namespace schlesinger {

class ElementaryDivisor {
public:
    ElementaryDivisor(Complex pole, Complex zero, Vector f, RowVector g_dag)
        : pole_(pole), zero_(zero), f_(std::move(f)), g_dag_(std::move(g_dag)) {
        if (f_.size() != g_dag_.size())
            throw DegeneratePairing("f and g must have equal length");
        pairing_ = (g_dag_ * f_)(0, 0);
        if (std::abs(pairing_) < 1e-12)
            throw DegeneratePairing("g f pairing is numerically zero");
        if (std::abs(pole_ - zero_) <= 1e-12 * (1.0 + std::abs(pole_)))
            throw DegeneratePairing("pole and zero coincide");
    }

    Complex pole() const { return pole_; }
    Complex zero() const { return zero_; }
    const Vector& f() const { return f_; }
    const RowVector& g_dag() const { return g_dag_; }
    Complex pairing() const { return pairing_; }
    int size() const { return static_cast<int>(f_.size()); }

    // f g / (g f), the rank-one projector onto span f along ker g.
    Matrix projector() const { return f_ * g_dag_ / pairing_; }

    Matrix eval(Complex x) const {
        require_clear_of(x, pole_, "pole");
        return Matrix::Identity(size(), size()) +
               (pole_ - zero_) / (x - pole_) * projector();
    }

    Matrix eval_inverse(Complex x) const {
        if (std::abs(x - zero_) <= 1e-12 * (1.0 + std::abs(zero_)))
            throw EvalAtZero("inverse evaluated at the divisor zero");
        return Matrix::Identity(size(), size()) +
               (zero_ - pole_) / (x - zero_) * projector();
    }

    Matrix derivative(Complex x) const {
        require_clear_of(x, pole_, "pole");
        const Complex gap = x - pole_;
        return -(pole_ - zero_) / (gap * gap) * projector();
    }

private:
    static void require_clear_of(Complex x, Complex point, const char* label) {
        if (std::abs(x - point) <= 1e-12 * (1.0 + std::abs(point)))
            throw EvalAtPole(std::string("evaluated at the divisor ") + label);
    }

    Complex pole_;
    Complex zero_;
    Vector f_;
    RowVector g_dag_;
    Complex pairing_;
};

// Gradients of the scalar pairing S = w R(x) v with respect to each vector
// argument. A gradient with respect to a column is a row and vice versa, so
// that pairings like (d_f S) f contract naturally.
struct PairingGradients {
    RowVector wrt_v;
    Vector wrt_w_dag;
    RowVector wrt_f;
    Vector wrt_g_dag;
};

inline PairingGradients pairing_gradients(const ElementaryDivisor& divisor,
                                          const Vector& v, const RowVector& w_dag,
                                          Complex x) {
    const Complex phi = (divisor.pole() - divisor.zero()) / (x - divisor.pole());
    const Complex s = divisor.pairing();
    const Vector& f = divisor.f();
    const RowVector& g = divisor.g_dag();
    const Complex wf = (w_dag * f)(0, 0);
    const Complex gv = (g * v)(0, 0);
    PairingGradients out;
    out.wrt_v = w_dag + phi * wf / s * g;
    out.wrt_w_dag = v + phi * gv / s * f;
    out.wrt_f = phi * gv / (s * s) * (w_dag * s - wf * g);
    out.wrt_g_dag = phi * wf / (s * s) * (v * s - gv * f);
    return out;
}

// Max norm of (d_f S) f and g (d_g S); both vanish identically.
inline double check_vanishing_rule(const ElementaryDivisor& divisor, const Vector& v,
                                   const RowVector& w_dag, Complex x) {
    const auto grads = pairing_gradients(divisor, v, w_dag, x);
    const Complex left = (grads.wrt_f * divisor.f())(0, 0);
    const Complex right = (divisor.g_dag() * grads.wrt_g_dag)(0, 0);
    return std::max(std::abs(left), std::abs(right));
}

// Max norm of (v d_v - d_w (.) w) - (d_g (.) g - f d_f) applied to S.
inline double check_exchange_rule(const ElementaryDivisor& divisor, const Vector& v,
                                  const RowVector& w_dag, Complex x) {
    const auto grads = pairing_gradients(divisor, v, w_dag, x);
    const Matrix left = v * grads.wrt_v - grads.wrt_w_dag * w_dag;
    const Matrix right = grads.wrt_g_dag * divisor.g_dag() - divisor.f() * grads.wrt_f;
    return max_abs(left - right);
}

}  // namespace schlesinger
