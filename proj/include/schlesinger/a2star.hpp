#pragma once

// The 3x3 two-pole reduction: a rank-two pole at each of 0 and 1 with fixed
// frame vectors, leaving a two-dimensional chart (x, y) on the dual factors.
// A four-stage composite of elementary steps and a scalar-shift exchange acts
// as a translation on the exponent scheme; a coordinate dictionary identifies
// it with an eight-parameter standard recurrence.

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "schlesinger/errors.hpp"
#include "schlesinger/fuchsian.hpp"
#include "schlesinger/linalg.hpp"
#include "schlesinger/transform.hpp"

namespace schlesinger {

struct A2Parameters {
    Complex theta11, theta12;  // exponents at the pole 0
    Complex theta21, theta22;  // exponents at the pole 1
    Complex kappa1, kappa2, kappa3;
};

struct A2State {
    Complex x, y;
    Complex alpha, beta;  // cached matching-equation solution, revalidated on read
};

struct StandardA2State {
    Complex f, g;
};

struct StandardA2Parameters {
    Complex b1, b2, b3, b4;
    Complex b5, b6, b7, b8;

    Complex delta() const { return b1 + b2 + b3 + b4 + b5 + b6 + b7 + b8; }
};

namespace detail {

inline void check_a2_parameters(const A2Parameters& prm) {
    const Complex sum = prm.theta11 + prm.theta12 + prm.theta21 + prm.theta22 +
                        prm.kappa1 + prm.kappa2 + prm.kappa3;
    if (std::abs(sum) > 1e-8)
        throw FuchsViolation("exponent sum is " + std::to_string(std::abs(sum)));
    if (std::abs(prm.theta11 - prm.theta12) < 1e-10)
        throw MultipleEigenvalue("theta11 and theta12 coincide");
    if (std::abs(prm.theta21 - prm.theta22) < 1e-10)
        throw MultipleEigenvalue("theta21 and theta22 coincide");
}

// The infinity residue in the chart: minus the sum of the two pole residues,
// with alpha and beta each entering a single entry of the last column.
inline Matrix infinity_block(const A2Parameters& prm, Complex x, Complex y,
                             Complex alpha, Complex beta) {
    Matrix m(3, 3);
    m << prm.theta11 - y, y + prm.theta22, alpha,
        -y, prm.theta12 + y + prm.theta22, beta,
        x - prm.theta21 - y, -x + y + prm.theta22, prm.theta21;
    return Matrix(-m);
}

// Residuals of the two nontrivial characteristic coefficients against the
// kappa triple; the trace always matches through the exponent sum.
inline std::pair<Complex, Complex> matching_residuals(const A2Parameters& prm,
                                                      Complex x, Complex y,
                                                      Complex alpha, Complex beta) {
    const Matrix a = infinity_block(prm, x, y, alpha, beta);
    const Complex e2 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) -
                       a(0, 2) * a(2, 0) + a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    const Complex e2_target = prm.kappa1 * prm.kappa2 + prm.kappa1 * prm.kappa3 +
                              prm.kappa2 * prm.kappa3;
    const Complex e3_target = prm.kappa1 * prm.kappa2 * prm.kappa3;
    return {e2 - e2_target, a.determinant() - e3_target};
}

inline double matching_scale(const A2Parameters& prm) {
    return 1.0 +
           std::abs(prm.kappa1 * prm.kappa2 + prm.kappa1 * prm.kappa3 +
                    prm.kappa2 * prm.kappa3) +
           std::abs(prm.kappa1 * prm.kappa2 * prm.kappa3);
}

inline std::string complex_string(Complex z) {
    return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")";
}

inline Vector cross3(const Vector& a, const Vector& b) {
    Vector out(3);
    out << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0];
    return out;
}

}  // namespace detail

// Solves the two matching equations for (alpha, beta). They are affine in the
// pair, so three probes pin the Jacobian; a short Newton polish absorbs the
// rounding of the probe differences.
inline std::pair<Complex, Complex> solve_alpha_beta(const A2Parameters& prm, Complex x,
                                                    Complex y) {
    detail::check_a2_parameters(prm);
    const auto residual = [&](Complex a, Complex b) {
        return detail::matching_residuals(prm, x, y, a, b);
    };
    const auto [r1_base, r2_base] = residual(Complex(0), Complex(0));
    const auto [r1_da, r2_da] = residual(Complex(1), Complex(0));
    const auto [r1_db, r2_db] = residual(Complex(0), Complex(1));
    Matrix jac(2, 2);
    jac << r1_da - r1_base, r1_db - r1_base, r2_da - r2_base, r2_db - r2_base;
    Vector rhs(2);
    rhs << -r1_base, -r2_base;
    const double scale = detail::matching_scale(prm);

    if (reciprocal_condition(jac) < 1e-12) {
        Eigen::JacobiSVD<Matrix> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
        svd.setThreshold(1e-10);
        const Vector candidate = svd.solve(rhs);
        const auto [s1, s2] = residual(candidate[0], candidate[1]);
        if (std::max(std::abs(s1), std::abs(s2)) <= 1e-9 * scale) {
            const Vector direction = svd.matrixV().col(1);
            throw MultipleRoots(
                "matching equations admit a line of solutions through alpha = " +
                detail::complex_string(candidate[0]) +
                ", beta = " + detail::complex_string(candidate[1]) +
                " with direction alpha = " + detail::complex_string(direction[0]) +
                ", beta = " + detail::complex_string(direction[1]));
        }
        throw AlphaBetaUnsolvable("matching equations are singular and inconsistent");
    }

    Vector sol = jac.lu().solve(rhs);
    for (int pass = 0; pass < 3; ++pass) {
        const auto [p1, p2] = residual(sol[0], sol[1]);
        if (std::max(std::abs(p1), std::abs(p2)) <= 1e-14 * scale) break;
        Vector correction(2);
        correction << -p1, -p2;
        sol += jac.lu().solve(correction);
    }
    const auto [f1, f2] = residual(sol[0], sol[1]);
    if (std::max(std::abs(f1), std::abs(f2)) > 1e-9 * scale)
        throw AlphaBetaUnsolvable(
            "matching refinement stalled at residual " +
            std::to_string(std::max(std::abs(f1), std::abs(f2))));
    return {sol[0], sol[1]};
}

inline A2State a2_state(const A2Parameters& prm, Complex x, Complex y) {
    const auto [alpha, beta] = solve_alpha_beta(prm, x, y);
    return {x, y, alpha, beta};
}

inline void validate_state(const A2Parameters& prm, const A2State& st) {
    const auto [r1, r2] =
        detail::matching_residuals(prm, st.x, st.y, st.alpha, st.beta);
    const double worst = std::max(std::abs(r1), std::abs(r2));
    if (worst > 1e-9 * detail::matching_scale(prm))
        throw AlphaBetaUnsolvable("cached alpha, beta violate the matching equations: " +
                                  std::to_string(worst));
}

inline DecompositionPoint build_a2_point(const A2Parameters& prm, const A2State& st) {
    detail::check_a2_parameters(prm);
    validate_state(prm, st);
    Matrix basis1(3, 2);
    basis1 << 1, 0, 0, 1, 0, 0;
    Matrix dual1(2, 3);
    dual1 << prm.theta11, 0, st.alpha, 0, prm.theta12, st.beta;
    Matrix basis2(3, 2);
    basis2 << 0, 1, 0, 1, 1, 1;
    Matrix dual2(2, 3);
    dual2 << st.x - prm.theta21, -st.x, prm.theta21, -st.y, st.y + prm.theta22,
        Complex(0);
    Vector theta1(2);
    theta1 << prm.theta11, prm.theta12;
    Vector theta2(2);
    theta2 << prm.theta21, prm.theta22;
    PoleFactors first{Complex(0), basis1, dual1, theta1};
    PoleFactors second{Complex(1), basis2, dual2, theta2};
    const Matrix target = -(first.residue() + second.residue());

    Eigen::ComplexEigenSolver<Matrix> solver(target, false);
    std::vector<Complex> remaining(solver.eigenvalues().begin(),
                                   solver.eigenvalues().end());
    const std::vector<Complex> expected{prm.kappa1, prm.kappa2, prm.kappa3};
    double worst = 0.0;
    double magnitude = 0.0;
    for (const Complex& k : expected) {
        magnitude = std::max(magnitude, std::abs(k));
        std::size_t best = 0;
        double gap = 1e300;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            const double d = std::abs(remaining[i] - k);
            if (d < gap) {
                gap = d;
                best = i;
            }
        }
        worst = std::max(worst, gap);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    if (worst > 1e-9 * (1.0 + magnitude))
        throw InfinitySpectrumMismatch("infinity spectrum is off the kappa triple by " +
                                       std::to_string(worst));
    return DecompositionPoint({std::move(first), std::move(second)}, target);
}

inline DecompositionPoint build_a2_point(const A2Parameters& prm, Complex x, Complex y) {
    return build_a2_point(prm, a2_state(prm, x, y));
}

// Conjugates and rescales so that the first pole's basis is (e1, e2) and the
// second pole's is (e3, all-ones). This kills every global conjugation and
// every per-slot factor rescale, which is exactly the gauge freedom of the
// decomposition.
inline DecompositionPoint canonical_frame(const DecompositionPoint& point) {
    if (point.matrix_size() != 3 || point.pole_count() != 2 ||
        point.pole(0).rank() != 2 || point.pole(1).rank() != 2)
        throw DegenerateFrame(
            "canonical frame needs a three-by-three point with two rank-two poles");
    const PoleFactors& first = point.pole(0);
    const PoleFactors& second = point.pole(1);
    Matrix frame(3, 3);
    frame.col(0) = first.basis.col(0);
    frame.col(1) = first.basis.col(1);
    frame.col(2) = second.basis.col(0);
    if (reciprocal_condition(frame) < 1e-10)
        throw DegenerateFrame("the three frame vectors are nearly dependent");
    const Matrix unframe = frame.inverse();
    const Vector spread = unframe * second.basis.col(1);
    const double floor = 1e-10 * std::max(1.0, max_abs(spread));
    for (int k = 0; k < 3; ++k)
        if (std::abs(spread[k]) <= floor)
            throw DegenerateFrame(
                "the closing column at the second pole has a vanishing component " +
                std::to_string(k));

    // Conjugate by diag(spread)^{-1} after the frame map; the closing column
    // becomes all-ones and per-slot rescales return the frame columns to unit
    // axes.
    const Vector shrink = spread.cwiseInverse();
    const Matrix left = shrink.asDiagonal() * unframe;
    const Matrix right = frame * spread.asDiagonal();
    std::vector<PoleFactors> poles{first, second};
    for (PoleFactors& pf : poles) {
        pf.basis = left * pf.basis;
        pf.dual = pf.dual * right;
    }
    const auto rescale = [](PoleFactors& pf, int slot, Complex by) {
        pf.basis.col(slot) *= by;
        pf.dual.row(slot) /= by;
    };
    rescale(poles[0], 0, spread[0]);
    rescale(poles[0], 1, spread[1]);
    rescale(poles[1], 0, spread[2]);
    Matrix target = left * point.infinity_target() * right;
    return DecompositionPoint(std::move(poles), std::move(target));
}

// Reads (x, y) off a canonically framed point. Every redundant dual entry is
// cross-checked before the primary reading is returned.
inline std::pair<Complex, Complex> xy_coordinates(const DecompositionPoint& point) {
    if (point.matrix_size() != 3 || point.pole_count() != 2 ||
        point.pole(0).rank() != 2 || point.pole(1).rank() != 2)
        throw FrameMismatch(
            "coordinates need a three-by-three point with two rank-two poles");
    const PoleFactors& first = point.pole(0);
    const PoleFactors& second = point.pole(1);
    if (std::abs(first.location) > 1e-9 || std::abs(second.location - Complex(1)) > 1e-9)
        throw FrameMismatch("poles must sit at zero and one");
    Matrix unit1(3, 2);
    unit1 << 1, 0, 0, 1, 0, 0;
    Matrix unit2(3, 2);
    unit2 << 0, 1, 0, 1, 1, 1;
    const double basis_tol =
        1e-9 * (1.0 + std::max(max_abs(first.basis), max_abs(second.basis)));
    if (max_abs(first.basis - unit1) > basis_tol ||
        max_abs(second.basis - unit2) > basis_tol)
        throw FrameMismatch("point is not in the canonical frame");

    const Matrix& d1 = first.dual;
    const Matrix& d2 = second.dual;
    const double tol = 1e-9 * (1.0 + std::max(max_abs(d1), max_abs(d2)));
    if (std::abs(d1(0, 1)) > tol || std::abs(d1(1, 0)) > tol)
        throw InconsistentEntries("off-diagonal dual entries at the first pole");
    if (std::abs(d2(1, 2)) > tol)
        throw InconsistentEntries("the closing dual entry at the second pole");
    if (std::abs(d2(0, 2) - second.exponents[0]) > tol)
        throw InconsistentEntries("the corner dual entry misses the first exponent");
    const Complex x_direct = d2(0, 0) + second.exponents[0];
    const Complex x_mirror = -d2(0, 1);
    if (std::abs(x_direct - x_mirror) > tol)
        throw InconsistentEntries("the two x readings disagree by " +
                                  std::to_string(std::abs(x_direct - x_mirror)));
    const Complex y_direct = -d2(1, 0);
    const Complex y_mirror = d2(1, 1) - second.exponents[1];
    if (std::abs(y_direct - y_mirror) > tol)
        throw InconsistentEntries("the two y readings disagree by " +
                                  std::to_string(std::abs(y_direct - y_mirror)));
    return {x_direct, y_direct};
}

// One elementary step down at (pole 0, slot 1) and up at (pole 1, slot 1) in
// closed form on the chart, with the auxiliary pair re-solved at the image.
inline std::pair<A2Parameters, A2State> a2_schlesinger_step(const A2Parameters& prm,
                                                            const A2State& st) {
    detail::check_a2_parameters(prm);
    validate_state(prm, st);
    const Complex gap = prm.theta11 - prm.theta12 - Complex(1);
    if (std::abs(gap) < 1e-12)
        throw Indeterminacy("denominator theta11 - theta12 - 1 vanishes");
    if (std::abs(st.alpha) < 1e-12) throw Indeterminacy("alpha vanishes at this point");
    const Complex hinge = (st.alpha - st.beta) * (st.y + prm.theta22) -
                          st.alpha * (prm.theta21 + Complex(1));
    if (std::abs(hinge) < 1e-12)
        throw Indeterminacy(
            "denominator (alpha - beta)(y + theta22) - alpha(theta21 + 1) vanishes");

    const Complex x_next =
        (st.alpha - st.beta) *
        (prm.theta11 * (st.y + prm.theta22) - st.alpha * (st.x - st.y - prm.theta22)) /
        (st.alpha * gap);
    const Complex y_next =
        ((st.alpha - st.beta) * st.y - st.beta * prm.theta22) / gap *
        (Complex(1) + prm.theta11 / st.alpha +
         ((st.beta - st.alpha) * st.x +
          (prm.theta12 + Complex(1) + st.alpha) * (prm.theta21 + Complex(1))) /
             hinge);

    A2Parameters next = prm;
    next.theta11 -= Complex(1);
    next.theta21 += Complex(1);
    return {next, a2_state(next, x_next, y_next)};
}

inline std::pair<A2Parameters, A2State> a2_schlesinger_step(const A2Parameters& prm,
                                                            Complex x, Complex y) {
    return a2_schlesinger_step(prm, a2_state(prm, x, y));
}

// Exchanges the zero exponent into the first slot of the pole at 0: the new
// basis vector spans the residue's kernel, the new dual row is the scaled
// left kernel, and the remaining slot's dual picks up the factor that keeps
// its pairing on the shifted exponent. The residue drops by theta11 times the
// identity; everything else is untouched.
inline std::pair<DecompositionPoint, A2Parameters> sigma13(
    const DecompositionPoint& point, const A2Parameters& prm) {
    if (point.matrix_size() != 3 || point.pole_count() == 0 ||
        point.pole(0).rank() != 2)
        throw RankMismatch(
            "exchange needs a rank-two first pole in a three-by-three system");
    const PoleFactors& first = point.pole(0);
    const Complex t1 = first.exponents[0];
    const Complex t2 = first.exponents[1];
    const double agreement = 1e-8 * (1.0 + std::abs(t1) + std::abs(t2));
    if (std::abs(t1 - prm.theta11) > agreement ||
        std::abs(t2 - prm.theta12) > agreement)
        throw FrameMismatch("first-pole exponents disagree with the parameter table");

    const Vector basis_a = first.basis.col(0);
    const Vector basis_b = first.basis.col(1);
    const Vector dual_a = first.dual.row(0).transpose();
    const Vector dual_b = first.dual.row(1).transpose();
    const Vector basis_cross = detail::cross3(basis_a, basis_b);
    const Vector dual_cross = detail::cross3(dual_a, dual_b);
    const double basis_span = basis_a.norm() * basis_b.norm();
    const double dual_span = dual_a.norm() * dual_b.norm();
    if (basis_cross.norm() <= 1e-10 * basis_span)
        throw DegenerateCross("basis columns at the first pole are nearly parallel");
    if (dual_cross.norm() <= 1e-10 * dual_span)
        throw DegenerateCross("dual rows at the first pole are nearly parallel");
    const Complex pairing = (basis_cross.transpose() * dual_cross)(0, 0);
    if (std::abs(pairing) <= 1e-10 * basis_cross.norm() * dual_cross.norm())
        throw DegenerateCross("the kernel directions pair to zero");

    const Eigen::Index pivot = largest_component(dual_cross);
    PoleFactors moved;
    moved.location = first.location;
    moved.basis = Matrix(3, 2);
    moved.basis.col(0) = dual_cross / dual_cross[pivot];
    moved.basis.col(1) = basis_b;
    moved.dual = Matrix(2, 3);
    moved.dual.row(0) = (-t1 * dual_cross[pivot] / pairing) * basis_cross.transpose();
    moved.dual.row(1) = ((t2 - t1) / t2) * first.dual.row(1);
    moved.exponents = Vector(2);
    moved.exponents << -t1, t2 - t1;

    std::vector<PoleFactors> poles{std::move(moved)};
    for (int i = 1; i < point.pole_count(); ++i) poles.push_back(point.pole(i));
    Matrix target = point.infinity_target() + t1 * Matrix::Identity(3, 3);
    A2Parameters next = prm;
    next.theta11 = -prm.theta11;
    next.theta12 = prm.theta12 - prm.theta11;
    next.kappa1 += prm.theta11;
    next.kappa2 += prm.theta11;
    next.kappa3 += prm.theta11;
    return {DecompositionPoint(std::move(poles), std::move(target)), next};
}

// The scheme translation realized by four stages: an elementary step, the
// exchange, a second elementary step, and the exchange again. Net effect on
// the table: theta12, theta21, theta22 drop by one and every kappa gains one.
inline std::pair<A2Parameters, A2State> composite_step(
    const A2Parameters& prm, const A2State& st,
    std::vector<RiemannScheme>* stage_schemes = nullptr) {
    detail::check_a2_parameters(prm);
    validate_state(prm, st);
    if (stage_schemes) stage_schemes->clear();
    DecompositionPoint current = build_a2_point(prm, st);
    A2Parameters table = prm;
    const auto record = [&](const DecompositionPoint& pt) {
        if (stage_schemes) stage_schemes->push_back(riemann_scheme(recompose(pt)));
    };

    try {
        current = transform_decomposition(current, TransformationIndex{1, 0, 0, 0});
    } catch (const Error& e) {
        throw Indeterminacy(std::string("stage 1: ") + e.what());
    }
    table.theta21 -= Complex(1);
    table.theta11 += Complex(1);
    record(current);

    try {
        std::tie(current, table) = sigma13(current, table);
    } catch (const Error& e) {
        throw Indeterminacy(std::string("stage 2: ") + e.what());
    }
    record(current);

    try {
        current = transform_decomposition(current, TransformationIndex{1, 0, 1, 0});
    } catch (const Error& e) {
        throw Indeterminacy(std::string("stage 3: ") + e.what());
    }
    table.theta22 -= Complex(1);
    table.theta11 += Complex(1);
    record(current);

    try {
        std::tie(current, table) = sigma13(current, table);
    } catch (const Error& e) {
        throw Indeterminacy(std::string("stage 4: ") + e.what());
    }
    record(current);

    Complex x_next, y_next;
    try {
        std::tie(x_next, y_next) = xy_coordinates(canonical_frame(current));
    } catch (const Error& e) {
        throw Indeterminacy(std::string("final frame: ") + e.what());
    }
    return {table, a2_state(table, x_next, y_next)};
}

inline std::pair<A2Parameters, A2State> composite_step(
    const A2Parameters& prm, Complex x, Complex y,
    std::vector<RiemannScheme>* stage_schemes = nullptr) {
    return composite_step(prm, a2_state(prm, x, y), stage_schemes);
}

// Coordinate dictionary onto the standard eight-parameter recurrence. The
// fourth root is pinned to zero and the table always sums to minus one.
inline std::pair<StandardA2Parameters, StandardA2State> to_standard(
    const A2Parameters& prm, Complex x, Complex y) {
    detail::check_a2_parameters(prm);
    const Complex fold = x - y - prm.theta21;
    if (std::abs(fold) < 1e-12)
        throw Indeterminacy("the line x - y = theta21 is blown down");
    StandardA2Parameters table;
    table.b1 = prm.theta12 + prm.kappa1;
    table.b2 = prm.theta12 + prm.kappa2;
    table.b3 = prm.theta12 + prm.kappa3;
    table.b4 = Complex(0);
    table.b5 = prm.theta21;
    table.b6 = prm.theta22;
    table.b7 = prm.theta11 - prm.theta12;
    table.b8 = -prm.theta12 - Complex(1);
    StandardA2State state;
    state.f = (prm.theta11 - prm.theta12) * (x - y - prm.theta22) /
              (prm.theta22 - prm.theta21);
    state.g = (prm.theta22 * (x - prm.theta21) - prm.theta21 * y) / fold;
    return {table, state};
}

inline std::pair<StandardA2Parameters, StandardA2State> to_standard(
    const A2Parameters& prm, const A2State& st) {
    return to_standard(prm, st.x, st.y);
}

// One step of the standard recurrence. Each divisor that can vanish names
// itself; a vanishing numerator legitimately parks the image on f = -g.
inline std::pair<StandardA2Parameters, StandardA2State> a2_standard_step(
    const StandardA2Parameters& prm, const StandardA2State& st) {
    const Complex delta = prm.delta();
    const auto guard = [](Complex z, const char* factor) {
        if (std::abs(z) < 1e-12)
            throw Indeterminacy(std::string("factor ") + factor + " vanishes");
    };
    guard(st.f + st.g, "f + g");
    guard(st.g - prm.b5, "g - b5");
    guard(st.g - prm.b6, "g - b6");
    const Complex f_next =
        -st.g + (st.g + prm.b1) * (st.g + prm.b2) * (st.g + prm.b3) *
                    (st.g + prm.b4) /
                    ((st.g - prm.b5) * (st.g - prm.b6) * (st.f + st.g));
    StandardA2Parameters next = prm;
    next.b5 += delta;
    next.b6 += delta;
    next.b7 -= delta;
    next.b8 -= delta;
    guard(f_next + next.b7, "barred f + shifted b7");
    guard(f_next + next.b8, "barred f + shifted b8");
    guard(f_next + st.g, "barred f + g");
    const Complex g_next =
        -f_next + (f_next - prm.b1) * (f_next - prm.b2) * (f_next - prm.b3) *
                      (f_next - prm.b4) /
                      ((f_next + next.b7) * (f_next + next.b8) * (f_next + st.g));
    return {next, StandardA2State{f_next, g_next}};
}

}  // namespace schlesinger
