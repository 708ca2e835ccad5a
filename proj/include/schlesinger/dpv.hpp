#pragma once

// The 2x2 three-pole reduction: a rank-one pole at each of (0, t, 1) with a
// diagonal target at infinity. The chart (p, q) makes the elementary step a
// birational symplectic map; a coordinate dictionary identifies it with the
// standard difference-Painleve-V recurrence.

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "schlesinger/errors.hpp"
#include "schlesinger/fuchsian.hpp"
#include "schlesinger/linalg.hpp"

namespace schlesinger {

struct DPVParameters {
    Complex theta0, theta1, thetat;
    Complex kappa1, kappa2;
    Complex t;
};

struct DPVState {
    Complex p, q;
};

struct StandardDPVState {
    Complex f, g;
};

struct StandardDPVParameters {
    Complex a0, a1, a2, a3, a4;
    Complex s;

    Complex delta() const { return a0 + a1 + 2.0 * a2 + a3 + a4; }
};

namespace detail {

inline void check_dpv_parameters(const DPVParameters& prm) {
    if (std::abs(prm.t) < 1e-12 || std::abs(prm.t - Complex(1)) < 1e-12)
        throw BadT("deformation parameter t must avoid 0 and 1");
    const Complex sum =
        prm.theta0 + prm.theta1 + prm.thetat + prm.kappa1 + prm.kappa2;
    if (std::abs(sum) > 1e-8)
        throw FuchsViolation("exponent sum is " + std::to_string(std::abs(sum)));
}

}  // namespace detail

inline DecompositionPoint build_dpv_point(const DPVParameters& prm,
                                          const DPVState& state,
                                          Complex a1_gauge = Complex(1)) {
    detail::check_dpv_parameters(prm);
    if (std::abs(a1_gauge) < 1e-12)
        throw SingularParameterization("gauge scale a1 vanishes");
    if (std::abs(state.p) < 1e-12) throw SingularParameterization("p vanishes");
    if (std::abs(state.q) < 1e-12)
        throw SingularParameterization("q vanishes, so a_t does");
    if (std::abs(prm.kappa1 - prm.kappa2) < 1e-12)
        throw SingularParameterization("kappa1 = kappa2 leaves w undetermined");

    const Complex a1 = a1_gauge;
    const Complex at = -state.q * a1 / prm.t;
    const Complex a0 = -a1 - at;
    const Complex pq = state.p * state.q;
    const Complex beta_t = prm.t * state.p / a1;
    const Complex beta_1 = (pq - prm.kappa2) / a1;
    const Complex gamma_1 = (prm.theta1 + prm.kappa2 - pq) / a1;
    const Complex gamma_t = (prm.thetat + pq) / at;
    const Complex w = -(a1 * beta_1 * gamma_1 + at * beta_t * gamma_t) /
                      (prm.kappa1 - prm.kappa2);

    const auto factors = [&](Complex location, Complex theta, Complex column_tail,
                             Complex row_head, Complex row_tail) {
        PoleFactors pf;
        pf.location = location;
        pf.basis = Matrix(2, 1);
        pf.basis << Complex(1), column_tail;
        pf.dual = Matrix(1, 2);
        pf.dual << row_head, row_tail;
        pf.exponents = Vector::Constant(1, theta);
        return pf;
    };
    std::vector<PoleFactors> poles;
    // Pole 0 keeps beta_0 = 0; its row is written without dividing by a_0 so
    // the chart stays regular when q = t.
    poles.push_back(factors(Complex(0), prm.theta0, -w, prm.theta0 + a0 * w, a0));
    poles.push_back(
        factors(prm.t, prm.thetat, beta_t - w, at * (gamma_t + w), at));
    poles.push_back(
        factors(Complex(1), prm.theta1, beta_1 - w, a1 * (gamma_1 + w), a1));

    Matrix target = Matrix::Zero(2, 2);
    target(0, 0) = prm.kappa1;
    target(1, 1) = prm.kappa2;
    return DecompositionPoint(std::move(poles), std::move(target));
}

inline DPVState pq_coordinates(const DecompositionPoint& point) {
    if (point.matrix_size() != 2 || point.pole_count() != 3)
        throw FrameMismatch("expected a 2x2 system with three finite poles");
    for (int i = 0; i < 3; ++i)
        if (point.pole(i).rank() != 1)
            throw FrameMismatch("expected rank-one residues at every pole");
    if (std::abs(point.pole(0).location) > 1e-9 ||
        std::abs(point.pole(2).location - Complex(1)) > 1e-9)
        throw FrameMismatch("poles must sit at (0, t, 1) in order");
    const Complex t = point.pole(1).location;
    if (std::abs(t) < 1e-9 || std::abs(t - Complex(1)) < 1e-9)
        throw FrameMismatch("deformation pole collides with 0 or 1");
    const Matrix target = point.infinity_target();
    const double scale = std::max(1.0, max_abs(target));
    if (std::abs(target(0, 1)) > 1e-8 * scale ||
        std::abs(target(1, 0)) > 1e-8 * scale)
        throw FrameMismatch("target at infinity is not diagonal");

    Complex tail[3];  // normalized second components of the basis columns
    Complex a[3];
    for (int i = 0; i < 3; ++i) {
        const Vector b = point.pole(i).basis.col(0);
        if (std::abs(b[0]) < 1e-10 * (1.0 + std::abs(b[1])))
            throw FrameMismatch("basis column cannot be normalized on this chart");
        tail[i] = b[1] / b[0];
        a[i] = point.pole(i).dual(0, 1) * b[0];
    }
    const Complex w = -tail[0];
    if (std::abs(a[2]) < 1e-12)
        throw FrameMismatch("normalization scale a1 vanishes");
    const Complex beta_t = tail[1] + w;
    return DPVState{a[2] * beta_t / t, -t * a[1] / a[2]};
}

// Overload that also identifies the frame against expected parameters; this
// is what distinguishes diag(kappa1, kappa2) from its swap.
inline DPVState pq_coordinates(const DecompositionPoint& point,
                               const DPVParameters& prm) {
    detail::check_dpv_parameters(prm);
    const DPVState state = pq_coordinates(point);
    if (std::abs(point.pole(1).location - prm.t) > 1e-9 * (1.0 + std::abs(prm.t)))
        throw FrameMismatch("deformation pole does not match t");
    const Complex expected[3] = {prm.theta0, prm.thetat, prm.theta1};
    for (int i = 0; i < 3; ++i)
        if (std::abs(point.pole(i).exponents[0] - expected[i]) > 1e-6)
            throw FrameMismatch("pole exponents do not match the parameters");
    const Matrix target = point.infinity_target();
    if (std::abs(target(0, 0) - prm.kappa1) > 1e-6 ||
        std::abs(target(1, 1) - prm.kappa2) > 1e-6)
        throw FrameMismatch("infinity spectrum disagrees with (kappa1, kappa2)");
    return state;
}

inline std::pair<DPVParameters, DPVState> dpv_step(const DPVParameters& prm,
                                                   const DPVState& state) {
    detail::check_dpv_parameters(prm);
    const double tol = 1e-12;
    if (std::abs(state.p) < tol) throw Indeterminacy("p = 0 is a base point");
    const Complex ratio = (prm.theta1 + prm.kappa2) / state.p;
    const Complex d1 = state.q - prm.t - ratio;
    if (std::abs(d1) < tol)
        throw Indeterminacy("denominator q - t - (theta1 + kappa2)/p vanishes");
    const Complex d2 = state.q - Complex(1) - ratio;
    if (std::abs(d2) < tol)
        throw Indeterminacy("denominator q - 1 - (theta1 + kappa2)/p vanishes");
    const Complex pq = state.p * state.q;
    const Complex next_pq = prm.kappa2 - pq +
                            prm.t * (prm.thetat + prm.kappa1) / d1 -
                            (prm.theta1 - Complex(1) + prm.kappa1) / d2;
    const Complex lead = prm.theta1 + prm.kappa2 - pq;
    if (std::abs(lead) < tol)
        throw Indeterminacy("factor theta1 + kappa2 - pq vanishes");
    const Complex tail = prm.kappa2 - next_pq;
    if (std::abs(tail) < tol)
        throw Indeterminacy("factor kappa2 - barred pq vanishes");
    const Complex next_q =
        prm.t * state.p * (prm.thetat + Complex(1) + next_pq) / (lead * tail);
    if (std::abs(next_q) < tol) throw Indeterminacy("barred q vanishes");
    DPVParameters next = prm;
    next.theta1 -= Complex(1);
    next.thetat += Complex(1);
    return {next, DPVState{next_pq / next_q, next_q}};
}

inline std::pair<StandardDPVParameters, StandardDPVState> to_standard(
    const DPVParameters& prm, const DPVState& state) {
    detail::check_dpv_parameters(prm);
    if (std::abs(state.p) < 1e-12) throw ZeroP("p = 0 has no finite (f, g) image");
    StandardDPVParameters std_prm;
    std_prm.a0 = prm.theta1 - Complex(1) + prm.kappa1;
    std_prm.a1 = -prm.thetat - prm.kappa1;
    std_prm.a2 = prm.thetat;
    std_prm.a3 = prm.kappa2;
    std_prm.a4 = -prm.theta1 - prm.thetat - prm.kappa2;
    std_prm.s = prm.t;
    StandardDPVState fg;
    fg.f = state.p * state.q;
    fg.g = -(state.q - (prm.theta1 + prm.kappa2) / state.p) / prm.t;
    return {std_prm, fg};
}

inline std::pair<StandardDPVParameters, StandardDPVState> dpv_standard_step(
    const StandardDPVParameters& prm, const StandardDPVState& state) {
    const double tol = 1e-12;
    if (std::abs(prm.s) < tol) throw Indeterminacy("parameter s vanishes");
    Complex next_f = prm.a3 - state.f;
    // Zero numerators are skipped so degenerate parameter choices stay off
    // the base points entirely.
    if (std::abs(prm.a1) > tol) {
        const Complex g1 = state.g + Complex(1);
        if (std::abs(g1) < tol) throw Indeterminacy("base point g = -1");
        next_f += prm.a1 / g1;
    }
    if (std::abs(prm.a0) > tol) {
        const Complex gs = prm.s * state.g + Complex(1);
        if (std::abs(gs) < tol) throw Indeterminacy("base point g = -1/s");
        next_f += prm.a0 / gs;
    }
    StandardDPVParameters next = prm;
    const Complex delta = prm.delta();
    next.a0 += delta;
    next.a1 += delta;
    next.a2 -= delta;
    if (std::abs(state.g) < tol) throw Indeterminacy("factor g vanishes");
    if (std::abs(next_f) < tol) throw Indeterminacy("factor barred f vanishes");
    if (std::abs(next_f - next.a3) < tol)
        throw Indeterminacy("factor barred f - a3 vanishes");
    const Complex next_g = (next_f + next.a2) * (next_f + next.a2 + next.a4) /
                           (prm.s * next_f * (next_f - next.a3) * state.g);
    return {next, StandardDPVState{next_f, next_g}};
}

inline Complex hamiltonian_pvi(const DPVParameters& prm, const DPVState& state) {
    detail::check_dpv_parameters(prm);
    const Complex pq = state.p * state.q;
    const Complex drift = state.p * (state.q - prm.t);
    const Complex h_t =
        (prm.thetat + pq) * (prm.theta0 + drift) / prm.t +
        (prm.theta1 + prm.kappa2 - drift) *
            (prm.t * prm.thetat + prm.kappa2 * state.q - pq * (state.q - prm.t)) /
            (prm.t * (prm.t - Complex(1)));
    return h_t + pq / prm.t;
}

}  // namespace schlesinger
