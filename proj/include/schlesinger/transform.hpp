#pragma once

// Elementary transformations acting on Fuchsian systems: a unit shift moving
// one exponent down at pole alpha (slot mu) and one up at pole beta (slot
// nu), realized by a rank-one multiplier. Two independent routes are
// provided: conjugation of residues (transform_system) and transport of the
// factor pairs (transform_decomposition). The discrete Hamiltonian is their
// generating function: its gradients in the mixed coordinates (B, barred C)
// reproduce the remaining halves of both factor families.

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "schlesinger/divisor.hpp"
#include "schlesinger/errors.hpp"
#include "schlesinger/fuchsian.hpp"
#include "schlesinger/linalg.hpp"

namespace schlesinger {

struct TransformationIndex {
    int alpha;  // pole whose exponent decreases
    int beta;   // pole whose exponent increases
    int mu;     // slot at pole alpha
    int nu;     // slot at pole beta
};

inline void validate_index(const DecompositionPoint& point,
                           const TransformationIndex& idx) {
    const int n = point.pole_count();
    if (idx.alpha < 0 || idx.alpha >= n || idx.beta < 0 || idx.beta >= n)
        throw InvalidIndex("pole index out of range");
    if (idx.alpha == idx.beta) throw InvalidIndex("alpha and beta must differ");
    const PoleFactors& pa = point.pole(idx.alpha);
    const PoleFactors& pb = point.pole(idx.beta);
    if (idx.mu < 0 || idx.mu >= pa.rank() || idx.nu < 0 || idx.nu >= pb.rank())
        throw InvalidIndex("slot index out of range");
    const Complex theta_mu = pa.exponents[idx.mu];
    const Complex theta_nu = pb.exponents[idx.nu];
    const double tol = 1e-8;
    for (int j = 0; j < pa.rank(); ++j) {
        if (j == idx.mu) continue;
        if (std::abs(pa.exponents[j] - theta_mu) < tol)
            throw MultipleEigenvalue("acting exponent at pole alpha is not simple");
        if (std::abs(pa.exponents[j] - (theta_mu - 1.0)) < tol)
            throw MultipleEigenvalue("unit shift collides with an exponent at pole alpha");
    }
    if (std::abs(theta_mu - 1.0) < tol)
        throw MultipleEigenvalue("unit shift annihilates the exponent at pole alpha");
    for (int j = 0; j < pb.rank(); ++j) {
        if (j == idx.nu) continue;
        if (std::abs(pb.exponents[j] - theta_nu) < tol)
            throw MultipleEigenvalue("acting exponent at pole beta is not simple");
        if (std::abs(pb.exponents[j] - (theta_nu + 1.0)) < tol)
            throw MultipleEigenvalue("unit shift collides with an exponent at pole beta");
    }
    if (std::abs(theta_nu + 1.0) < tol)
        throw MultipleEigenvalue("unit shift annihilates the exponent at pole beta");
}

// Forward multiplier built from the un-barred point alone: the carried
// column at pole beta against the acting dual row at pole alpha.
inline ElementaryDivisor elementary_multiplier(const DecompositionPoint& point,
                                               const TransformationIndex& idx) {
    validate_index(point, idx);
    return ElementaryDivisor(point.pole(idx.alpha).location,
                             point.pole(idx.beta).location,
                             point.pole(idx.beta).basis.col(idx.nu),
                             point.pole(idx.alpha).dual.row(idx.mu));
}

// Exact multiplier once the barred point is known; proportional to the
// forward one, so both define the same projector.
inline ElementaryDivisor elementary_multiplier(const DecompositionPoint& point,
                                               const DecompositionPoint& barred,
                                               const TransformationIndex& idx) {
    validate_index(point, idx);
    return ElementaryDivisor(point.pole(idx.alpha).location,
                             point.pole(idx.beta).location,
                             point.pole(idx.beta).basis.col(idx.nu),
                             barred.pole(idx.beta).dual.row(idx.nu));
}

namespace detail {

// Barred residues at the two acting poles. Away from them the map is plain
// conjugation; at alpha and beta the multiplier's pole and zero contribute
// the projector corrections and the unit exponent shifts.
inline std::pair<Matrix, Matrix> acting_residues(const DecompositionPoint& point,
                                                 const TransformationIndex& idx,
                                                 const Matrix& projector) {
    const int m = point.matrix_size();
    const Complex ua = point.pole(idx.alpha).location;
    const Complex ub = point.pole(idx.beta).location;
    Matrix reg_alpha = Matrix::Zero(m, m);
    Matrix reg_beta = Matrix::Zero(m, m);
    for (int i = 0; i < point.pole_count(); ++i) {
        const Matrix a = point.pole(i).residue();
        if (i != idx.alpha) reg_alpha += a / (ua - point.pole(i).location);
        if (i != idx.beta) reg_beta += a / (ub - point.pole(i).location);
    }
    const Matrix k = Matrix::Identity(m, m) - projector;
    const Complex gap = ub - ua;
    const Complex theta_mu = point.pole(idx.alpha).exponents[idx.mu];
    const Complex theta_nu = point.pole(idx.beta).exponents[idx.nu];
    Matrix alpha_bar = point.pole(idx.alpha).residue() * k -
                       gap * (projector * reg_alpha * k) +
                       (theta_mu - Complex(1)) * projector;
    Matrix beta_bar = k * point.pole(idx.beta).residue() +
                      gap * (k * reg_beta * projector) +
                      (theta_nu + Complex(1)) * projector;
    return {std::move(alpha_bar), std::move(beta_bar)};
}

}  // namespace detail

struct SystemStep {
    FuchsianSystem system;
    ElementaryDivisor multiplier;
};

inline SystemStep transform_system(const FuchsianSystem& system,
                                   const TransformationIndex& idx,
                                   double cluster_tol = 1e-7) {
    const DecompositionPoint point = decompose(system, cluster_tol);
    const ElementaryDivisor multiplier = elementary_multiplier(point, idx);
    const auto [alpha_bar, beta_bar] =
        detail::acting_residues(point, idx, multiplier.projector());
    std::vector<Matrix> residues;
    residues.reserve(system.pole_count());
    for (int i = 0; i < system.pole_count(); ++i) {
        if (i == idx.alpha) {
            residues.push_back(alpha_bar);
        } else if (i == idx.beta) {
            residues.push_back(beta_bar);
        } else {
            const Matrix r = multiplier.eval(system.pole(i));
            const Matrix r_inv = multiplier.eval_inverse(system.pole(i));
            residues.push_back(r * system.residue(i) * r_inv);
        }
    }
    return {build_system(system.poles(), std::move(residues)), multiplier};
}

inline DecompositionPoint transform_decomposition(const DecompositionPoint& point,
                                                  const TransformationIndex& idx) {
    const ElementaryDivisor multiplier = elementary_multiplier(point, idx);
    const int m = point.matrix_size();
    const Matrix projector = multiplier.projector();
    const Matrix complement = Matrix::Identity(m, m) - projector;
    const auto [alpha_bar, beta_bar] = detail::acting_residues(point, idx, projector);

    std::vector<PoleFactors> out;
    out.reserve(point.pole_count());
    for (int i = 0; i < point.pole_count(); ++i) {
        const PoleFactors& pf = point.pole(i);
        PoleFactors next;
        next.location = pf.location;
        next.exponents = pf.exponents;
        if (i != idx.alpha && i != idx.beta) {
            next.basis = multiplier.eval(pf.location) * pf.basis;
            next.dual = pf.dual * multiplier.eval_inverse(pf.location);
            out.push_back(std::move(next));
            continue;
        }
        const int r = pf.rank();
        if (i == idx.alpha) {
            next.exponents[idx.mu] -= Complex(1);
            const Complex shifted = next.exponents[idx.mu];
            Matrix dual(r, m);
            for (int j = 0; j < r; ++j)
                if (j != idx.mu) dual.row(j) = pf.dual.row(j) * complement;
            const auto kernel = unique_kernel_direction(
                Matrix((alpha_bar - shifted * Matrix::Identity(m, m)).transpose()));
            if (kernel.dimension != 1)
                throw MultipleEigenvalue(
                    "barred eigenspace at pole alpha is not one-dimensional");
            const Vector b_mu = gauge_normalize(multiplier.f());
            const Complex pair = (kernel.direction.transpose() * b_mu)(0, 0);
            if (std::abs(pair) < 1e-12)
                throw DegeneratePairing(
                    "left eigenvector orthogonal to the carried column");
            dual.row(idx.mu) = (shifted / pair) * kernel.direction.transpose();
            // The dual rows plus the carried-off left kernel form a frame in
            // which the remaining basis columns are determined by duality.
            Matrix frame(m, m);
            frame.topRows(r) = dual;
            if (r < m) frame.bottomRows(m - r) = left_kernel_rows(pf.basis) * complement;
            if (reciprocal_condition(frame) < 1e-12)
                throw DegeneratePairing("dual frame at pole alpha is singular");
            const Matrix inverse = frame.inverse();
            Matrix basis(m, r);
            for (int j = 0; j < r; ++j)
                basis.col(j) =
                    j == idx.mu ? b_mu : Vector(next.exponents[j] * inverse.col(j));
            next.basis = std::move(basis);
            next.dual = std::move(dual);
        } else {
            next.exponents[idx.nu] += Complex(1);
            const Complex shifted = next.exponents[idx.nu];
            Matrix basis(m, r);
            for (int j = 0; j < r; ++j)
                if (j != idx.nu) basis.col(j) = complement * pf.basis.col(j);
            const auto kernel = unique_kernel_direction(
                beta_bar - shifted * Matrix::Identity(m, m));
            if (kernel.dimension != 1)
                throw MultipleEigenvalue(
                    "barred eigenspace at pole beta is not one-dimensional");
            basis.col(idx.nu) = gauge_normalize(kernel.direction);
            Matrix frame(m, m);
            frame.leftCols(r) = basis;
            if (r < m) frame.rightCols(m - r) = complement * kernel_basis(pf.dual);
            if (reciprocal_condition(frame) < 1e-12)
                throw DegeneratePairing("basis frame at pole beta is singular");
            const Matrix inverse = frame.inverse();
            Matrix dual(r, m);
            for (int j = 0; j < r; ++j) dual.row(j) = next.exponents[j] * inverse.row(j);
            next.basis = std::move(basis);
            next.dual = std::move(dual);
        }
        out.push_back(std::move(next));
    }
    return DecompositionPoint(std::move(out), point.infinity_target());
}

// Mixed coordinates of the generating function: un-barred basis columns
// against barred dual rows, with the un-barred exponents.
struct DiscreteHamiltonianInput {
    std::vector<Complex> poles;
    std::vector<Matrix> basis;        // B_i from the source point
    std::vector<Matrix> barred_dual;  // C_i rows from the image point
    std::vector<Vector> exponents;    // theta_i from the source point
    TransformationIndex index;
};

inline DiscreteHamiltonianInput make_hamiltonian_input(const DecompositionPoint& point,
                                                       const DecompositionPoint& barred,
                                                       const TransformationIndex& idx,
                                                       double ortho_tol = 1e-9) {
    validate_index(point, idx);
    if (barred.pole_count() != point.pole_count() ||
        barred.matrix_size() != point.matrix_size())
        throw RankMismatch("barred point has a different shape");
    DiscreteHamiltonianInput input;
    input.index = idx;
    for (int i = 0; i < point.pole_count(); ++i) {
        if (barred.pole(i).rank() != point.pole(i).rank())
            throw RankMismatch("rank differs at pole " + std::to_string(i));
        input.poles.push_back(point.pole(i).location);
        input.basis.push_back(point.pole(i).basis);
        input.barred_dual.push_back(barred.pole(i).dual);
        input.exponents.push_back(point.pole(i).exponents);
    }
    const Vector& b_nu = input.basis[idx.beta].col(idx.nu);
    for (int j = 0; j < point.pole(idx.alpha).rank(); ++j) {
        if (j == idx.mu) continue;
        if (std::abs((input.barred_dual[idx.alpha].row(j) * b_nu)(0, 0)) > ortho_tol)
            throw RankMismatch("restricted-subspace orthogonality fails at pole alpha");
        if (std::abs((input.barred_dual[idx.beta].row(idx.nu) *
                      input.basis[idx.alpha].col(j))(0, 0)) > ortho_tol)
            throw RankMismatch("restricted-subspace orthogonality fails at pole beta");
    }
    return input;
}

namespace detail {

struct HamiltonianTerm {
    Complex coefficient;
    Complex pairing;
};

// Shared scalars of the Hamiltonian terms.
struct HamiltonianFrame {
    Vector f;        // carried column b at (beta, nu)
    RowVector g;     // barred dual row at (beta, nu)
    Vector b_mu;     // column at (alpha, mu)
    RowVector c_mu;  // barred dual row at (alpha, mu)
    Complex theta_mu;
    Complex theta_nu;
    Complex s1;  // g f
    Complex s2;  // g b_mu
    Complex s3;  // c_mu f
};

inline HamiltonianFrame hamiltonian_frame(const DiscreteHamiltonianInput& in) {
    const auto& idx = in.index;
    HamiltonianFrame frame;
    frame.f = in.basis[idx.beta].col(idx.nu);
    frame.g = in.barred_dual[idx.beta].row(idx.nu);
    frame.b_mu = in.basis[idx.alpha].col(idx.mu);
    frame.c_mu = in.barred_dual[idx.alpha].row(idx.mu);
    frame.theta_mu = in.exponents[idx.alpha][idx.mu];
    frame.theta_nu = in.exponents[idx.beta][idx.nu];
    frame.s1 = (frame.g * frame.f)(0, 0);
    frame.s2 = (frame.g * frame.b_mu)(0, 0);
    frame.s3 = (frame.c_mu * frame.f)(0, 0);
    const auto check = [&](Complex value, const char* label) {
        if (std::abs(value) < 1e-12)
            throw LogOfZeroPairing(std::string("log argument vanishes: ") + label);
    };
    check(frame.s1, "pairing at (beta, nu)");
    check(frame.s2, "barred (beta, nu) row against (alpha, mu) column");
    check(frame.s3, "barred (alpha, mu) row against (beta, nu) column");
    return frame;
}

inline std::vector<HamiltonianTerm> hamiltonian_terms(
    const DiscreteHamiltonianInput& in) {
    const auto& idx = in.index;
    const HamiltonianFrame fr = hamiltonian_frame(in);
    std::vector<HamiltonianTerm> terms;
    terms.push_back({fr.theta_nu - fr.theta_mu + Complex(1), fr.s1});
    terms.push_back({fr.theta_mu, fr.s2});
    terms.push_back({fr.theta_mu - Complex(1), fr.s3});
    const Complex ua = in.poles[idx.alpha];
    const Complex ub = in.poles[idx.beta];
    for (std::size_t i = 0; i < in.poles.size(); ++i) {
        const int rank = static_cast<int>(in.exponents[i].size());
        for (int j = 0; j < rank; ++j) {
            const bool is_mu = static_cast<int>(i) == idx.alpha && j == idx.mu;
            const bool is_nu = static_cast<int>(i) == idx.beta && j == idx.nu;
            if (is_mu || is_nu) continue;
            const Vector b = in.basis[i].col(j);
            const RowVector c = in.barred_dual[i].row(j);
            Complex sigma;
            if (static_cast<int>(i) != idx.alpha) {
                const Complex k = (ua - ub) / (in.poles[i] - ua);
                sigma = (c * b)(0, 0) +
                        k * (c * fr.f)(0, 0) * (fr.g * b)(0, 0) / fr.s1;
            } else {
                sigma = (c * b)(0, 0) -
                        (c * fr.b_mu)(0, 0) * (fr.g * b)(0, 0) / fr.s2 -
                        (c * fr.f)(0, 0) * (fr.c_mu * b)(0, 0) / fr.s3;
            }
            if (std::abs(sigma) < 1e-12)
                throw LogOfZeroPairing("log argument vanishes at pole " +
                                       std::to_string(i) + " slot " +
                                       std::to_string(j));
            terms.push_back({in.exponents[i][j], sigma});
        }
    }
    return terms;
}

}  // namespace detail

inline Complex discrete_hamiltonian(const DiscreteHamiltonianInput& input) {
    Complex value = 0;
    for (const auto& term : detail::hamiltonian_terms(input))
        value += term.coefficient * std::log(term.pairing);
    return value;
}

struct HamiltonianGradients {
    std::vector<Matrix> wrt_basis;  // r_i x m: row j is the gradient in b_{i,j}
    std::vector<Matrix> wrt_dual;   // m x r_i: column j is the gradient in c_{i,j}
};

inline HamiltonianGradients hamiltonian_gradients(const DiscreteHamiltonianInput& in) {
    const auto& idx = in.index;
    const detail::HamiltonianFrame fr = detail::hamiltonian_frame(in);
    const int m = static_cast<int>(fr.f.size());
    HamiltonianGradients grads;
    for (std::size_t i = 0; i < in.poles.size(); ++i) {
        const int rank = static_cast<int>(in.exponents[i].size());
        grads.wrt_basis.push_back(Matrix::Zero(rank, m));
        grads.wrt_dual.push_back(Matrix::Zero(m, rank));
    }
    const auto add_basis = [&](int pole, int slot, const RowVector& v) {
        grads.wrt_basis[pole].row(slot) += v;
    };
    const auto add_dual = [&](int pole, int slot, const Vector& v) {
        grads.wrt_dual[pole].col(slot) += v;
    };

    const Complex k1 = fr.theta_nu - fr.theta_mu + Complex(1);
    add_basis(idx.beta, idx.nu, k1 / fr.s1 * fr.g);
    add_dual(idx.beta, idx.nu, k1 / fr.s1 * fr.f);
    add_basis(idx.alpha, idx.mu, fr.theta_mu / fr.s2 * fr.g);
    add_dual(idx.beta, idx.nu, fr.theta_mu / fr.s2 * fr.b_mu);
    add_basis(idx.beta, idx.nu, (fr.theta_mu - Complex(1)) / fr.s3 * fr.c_mu);
    add_dual(idx.alpha, idx.mu, (fr.theta_mu - Complex(1)) / fr.s3 * fr.f);

    const Complex ua = in.poles[idx.alpha];
    const Complex ub = in.poles[idx.beta];
    for (std::size_t i = 0; i < in.poles.size(); ++i) {
        const int rank = static_cast<int>(in.exponents[i].size());
        for (int j = 0; j < rank; ++j) {
            const bool is_mu = static_cast<int>(i) == idx.alpha && j == idx.mu;
            const bool is_nu = static_cast<int>(i) == idx.beta && j == idx.nu;
            if (is_mu || is_nu) continue;
            const Vector b = in.basis[i].col(j);
            const RowVector c = in.barred_dual[i].row(j);
            const Complex theta = in.exponents[i][j];
            if (static_cast<int>(i) != idx.alpha) {
                const Complex k = (ua - ub) / (in.poles[i] - ua);
                const Complex cf = (c * fr.f)(0, 0);
                const Complex gb = (fr.g * b)(0, 0);
                const Complex cb = (c * b)(0, 0);
                const Complex sigma = cb + k * cf * gb / fr.s1;
                const Complex w = theta / sigma;
                add_basis(i, j, w * (c + k * cf / fr.s1 * fr.g));
                add_dual(i, j, w * (b + k * gb / fr.s1 * fr.f));
                add_basis(idx.beta, idx.nu,
                          w * k * gb * (c * fr.s1 - cf * fr.g) / (fr.s1 * fr.s1));
                add_dual(idx.beta, idx.nu,
                         w * k * cf * (b * fr.s1 - gb * fr.f) / (fr.s1 * fr.s1));
            } else {
                const Complex cbmu = (c * fr.b_mu)(0, 0);
                const Complex gb = (fr.g * b)(0, 0);
                const Complex cf = (c * fr.f)(0, 0);
                const Complex cmub = (fr.c_mu * b)(0, 0);
                const Complex cb = (c * b)(0, 0);
                const Complex sigma = cb - cbmu * gb / fr.s2 - cf * cmub / fr.s3;
                const Complex w = theta / sigma;
                add_basis(i, j, w * (c - cbmu / fr.s2 * fr.g - cf / fr.s3 * fr.c_mu));
                add_dual(i, j, w * (b - gb / fr.s2 * fr.b_mu - cmub / fr.s3 * fr.f));
                add_basis(idx.alpha, idx.mu,
                          -w * gb * (c * fr.s2 - cbmu * fr.g) / (fr.s2 * fr.s2));
                add_dual(idx.beta, idx.nu,
                         -w * cbmu * (b * fr.s2 - gb * fr.b_mu) / (fr.s2 * fr.s2));
                add_basis(idx.beta, idx.nu,
                          -w * cmub * (c * fr.s3 - cf * fr.c_mu) / (fr.s3 * fr.s3));
                add_dual(idx.alpha, idx.mu,
                         -w * cf * (b * fr.s3 - cmub * fr.f) / (fr.s3 * fr.s3));
            }
        }
    }
    return grads;
}

struct GeneratingReport {
    double max_dual_residual;   // gradients in b against the source dual rows
    double max_basis_residual;  // gradients in c against the image factorization
    double max_fd_residual;     // analytic gradients against finite differences
};

inline GeneratingReport verify_generating(const DecompositionPoint& point,
                                          const DecompositionPoint& barred,
                                          const TransformationIndex& idx,
                                          double fd_step = 1e-7,
                                          bool throw_on_failure = true) {
    const DiscreteHamiltonianInput input = make_hamiltonian_input(point, barred, idx);
    const HamiltonianGradients grads = hamiltonian_gradients(input);
    GeneratingReport report{0.0, 0.0, 0.0};

    for (int i = 0; i < point.pole_count(); ++i)
        report.max_dual_residual = std::max(
            report.max_dual_residual, max_abs(grads.wrt_basis[i] - point.pole(i).dual));

    for (int i = 0; i < point.pole_count(); ++i) {
        const Matrix& predicted = grads.wrt_dual[i];
        const PoleFactors& pf = barred.pole(i);
        for (int j = 0; j < pf.rank(); ++j) {
            const Complex pairing = (pf.dual.row(j) * predicted.col(j))(0, 0);
            report.max_basis_residual = std::max(report.max_basis_residual,
                                                 std::abs(pairing - pf.exponents[j]));
        }
        report.max_basis_residual = std::max(
            report.max_basis_residual, max_abs(predicted * pf.dual - pf.residue()));
    }

    // Finite differences, accumulated per log term so the comparison is
    // insensitive to the branch of the total.
    const auto fd_against = [&](const std::function<void(DiscreteHamiltonianInput&,
                                                         Complex)>& bump,
                                Complex analytic) {
        DiscreteHamiltonianInput plus = input;
        bump(plus, Complex(fd_step));
        DiscreteHamiltonianInput minus = input;
        bump(minus, Complex(-fd_step));
        const auto terms_plus = detail::hamiltonian_terms(plus);
        const auto terms_minus = detail::hamiltonian_terms(minus);
        Complex fd = 0;
        for (std::size_t t = 0; t < terms_plus.size(); ++t)
            fd += terms_plus[t].coefficient *
                  std::log(terms_plus[t].pairing / terms_minus[t].pairing);
        fd /= 2.0 * fd_step;
        const double residual = std::abs(fd - analytic) / (1.0 + std::abs(analytic));
        report.max_fd_residual = std::max(report.max_fd_residual, residual);
    };
    for (int i = 0; i < point.pole_count(); ++i) {
        const int rank = point.pole(i).rank();
        const int m = point.matrix_size();
        for (int j = 0; j < rank; ++j) {
            for (int k = 0; k < m; ++k) {
                fd_against([=](DiscreteHamiltonianInput& w,
                               Complex h) { w.basis[i](k, j) += h; },
                           grads.wrt_basis[i](j, k));
                fd_against([=](DiscreteHamiltonianInput& w,
                               Complex h) { w.barred_dual[i](j, k) += h; },
                           grads.wrt_dual[i](k, j));
            }
        }
    }

    if (throw_on_failure &&
        (report.max_dual_residual > 1e-8 || report.max_basis_residual > 1e-8 ||
         report.max_fd_residual > 1e-6))
        throw GradientMismatch(
            "generating equations fail: dual " +
            std::to_string(report.max_dual_residual) + ", basis " +
            std::to_string(report.max_basis_residual) + ", finite-difference " +
            std::to_string(report.max_fd_residual));
    return report;
}

struct OrbitRecord {
    int step;
    FuchsianSystem system;
    RiemannScheme scheme;
};

inline std::vector<OrbitRecord> orbit(const FuchsianSystem& system,
                                      const std::vector<TransformationIndex>& schedule,
                                      int steps) {
    if (schedule.empty()) throw InvalidIndex("orbit needs a nonempty schedule");
    if (steps < 0) throw InvalidIndex("orbit needs a nonnegative step count");
    std::vector<OrbitRecord> trace;
    trace.push_back({0, system, riemann_scheme(system)});
    FuchsianSystem current = system;
    for (int k = 1; k <= steps; ++k) {
        try {
            current = transform_system(
                          current, schedule[static_cast<std::size_t>(k - 1) %
                                            schedule.size()])
                          .system;
        } catch (const Error& e) {
            throw OrbitStepFailure("step " + std::to_string(k) + ": " + e.what());
        }
        trace.push_back({k, current, riemann_scheme(current)});
    }
    return trace;
}

}  // namespace schlesinger
