#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "schlesinger/a2star.hpp"
#include "schlesinger/transform.hpp"
#include "support/generators.hpp"

using namespace schlesinger;
using Catch::Matchers::ContainsSubstring;

namespace {

const TransformationIndex kSingleStep{0, 1, 0, 0};  // poles ordered (0, 1)

A2Parameters draw_params(testgen::Rng& rng) {
    for (int attempt = 0; attempt < 40000; ++attempt) {
        A2Parameters prm;
        prm.theta11 = rng.box(1.0);
        prm.theta12 = rng.box(1.0);
        prm.theta21 = rng.box(1.0);
        prm.theta22 = rng.box(1.0);
        prm.kappa1 = rng.box(1.0);
        prm.kappa2 = rng.box(1.0);
        prm.kappa3 = -(prm.theta11 + prm.theta12 + prm.theta21 + prm.theta22 +
                       prm.kappa1 + prm.kappa2);
        const auto away = [](Complex z, double floor) { return std::abs(z) > floor; };
        const bool ok =
            away(prm.theta11, 0.2) && away(prm.theta12, 0.2) &&
            away(prm.theta21, 0.2) && away(prm.theta22, 0.2) &&
            away(prm.theta11 - prm.theta12, 0.25) &&
            away(prm.theta11 - prm.theta12 - Complex(1), 0.15) &&
            away(prm.theta11 - prm.theta12 + Complex(1), 0.15) &&
            away(prm.theta21 - prm.theta22, 0.25) &&
            away(prm.theta21 - prm.theta22 - Complex(1), 0.15) &&
            away(prm.theta21 - prm.theta22 + Complex(1), 0.15) &&
            away(prm.theta11 - Complex(1), 0.12) && away(prm.theta11 + Complex(1), 0.12) &&
            away(prm.theta12 - Complex(1), 0.12) && away(prm.theta12 + Complex(1), 0.12) &&
            away(prm.theta21 - Complex(1), 0.12) && away(prm.theta21 + Complex(1), 0.12) &&
            away(prm.theta22 - Complex(1), 0.12) && away(prm.theta22 + Complex(1), 0.12) &&
            away(prm.kappa1 - prm.kappa2, 0.2) && away(prm.kappa1 - prm.kappa3, 0.2) &&
            away(prm.kappa2 - prm.kappa3, 0.2) && away(prm.kappa1, 0.1) &&
            away(prm.kappa2, 0.1) && away(prm.kappa3, 0.1) &&
            std::abs(prm.theta11.imag()) > 0.04 && std::abs(prm.theta12.imag()) > 0.04 &&
            std::abs(prm.theta21.imag()) > 0.04 && std::abs(prm.theta22.imag()) > 0.04;
        if (ok) return prm;
    }
    throw std::logic_error("draw_params: guards unreachable");
}

A2State draw_state(testgen::Rng& rng, const A2Parameters& prm) {
    for (int attempt = 0; attempt < 40000; ++attempt) {
        const Complex x = rng.box(1.5);
        const Complex y = rng.box(1.5);
        if (std::abs(x) < 0.1 || std::abs(y) < 0.1) continue;
        if (std::abs(x - y - prm.theta21) < 0.12) continue;
        if (std::abs(x - y - prm.theta22) < 0.12) continue;
        if (std::abs(y + prm.theta22) < 0.12) continue;
        A2State st;
        try {
            st = a2_state(prm, x, y);
        } catch (const Error&) {
            continue;
        }
        if (std::abs(st.alpha) < 0.1 || std::abs(st.beta) < 0.1) continue;
        if (std::abs(st.alpha - st.beta) < 0.1) continue;
        return st;
    }
    throw std::logic_error("draw_state: guards unreachable");
}

// Independent assembly of the infinity residue from the displayed blocks.
Matrix oracle_infinity(const A2Parameters& prm, Complex x, Complex y, Complex alpha,
                       Complex beta) {
    Matrix m(3, 3);
    m << prm.theta11 - y, y + prm.theta22, alpha,
        -y, prm.theta12 + y + prm.theta22, beta,
        x - prm.theta21 - y, -x + y + prm.theta22, prm.theta21;
    return Matrix(-m);
}

// Degree-two symmetric function through traces, independent of the library's
// principal-minor route.
Complex oracle_e2(const Matrix& a) {
    const Complex tr = a.trace();
    return 0.5 * (tr * tr - (a * a).trace());
}

Complex e2_kappa(const A2Parameters& prm) {
    return prm.kappa1 * prm.kappa2 + prm.kappa1 * prm.kappa3 + prm.kappa2 * prm.kappa3;
}

Complex e3_kappa(const A2Parameters& prm) {
    return prm.kappa1 * prm.kappa2 * prm.kappa3;
}

std::vector<Complex> flatten(const PointSpectrum& ps) {
    std::vector<Complex> out;
    for (const auto& g : ps.groups)
        for (int k = 0; k < g.multiplicity; ++k) out.push_back(g.value);
    return out;
}

double multiset_gap(std::vector<Complex> got, const std::vector<Complex>& expected) {
    REQUIRE(got.size() == expected.size());
    double worst = 0.0;
    for (const Complex& e : expected) {
        std::size_t best = 0;
        double gap = 1e300;
        for (std::size_t i = 0; i < got.size(); ++i) {
            const double d = std::abs(got[i] - e);
            if (d < gap) {
                gap = d;
                best = i;
            }
        }
        worst = std::max(worst, gap);
        got.erase(got.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return worst;
}

void require_scheme(const RiemannScheme& scheme, const std::vector<Complex>& pole0,
                    const std::vector<Complex>& pole1, const std::vector<Complex>& infinity,
                    double tol) {
    REQUIRE(scheme.points.size() == 3);
    REQUIRE(multiset_gap(flatten(scheme.points[0]), pole0) < tol);
    REQUIRE(multiset_gap(flatten(scheme.points[1]), pole1) < tol);
    REQUIRE(multiset_gap(flatten(scheme.points[2]), infinity) < tol);
}

// Rebuild one pole's dual so the pairing condition holds exactly for a
// hand-edited basis.
PoleFactors refit_dual(PoleFactors pf) {
    const Matrix pairing = pf.dual * pf.basis;
    pf.dual = Matrix(pf.exponents.asDiagonal()) * pairing.inverse() * pf.dual;
    return pf;
}

}  // namespace

TEST_CASE("build_a2_point realizes the chart parameterization", "[a2star]") {
    testgen::Rng rng(900);
    const A2Parameters prm = draw_params(rng);
    const A2State st = draw_state(rng, prm);
    const auto point = build_a2_point(prm, st);

    SECTION("frame layout") {
        REQUIRE(point.matrix_size() == 3);
        REQUIRE(point.pole_count() == 2);
        REQUIRE(point.pole(0).location == Complex(0));
        REQUIRE(point.pole(1).location == Complex(1));
        REQUIRE(point.pole(0).rank() == 2);
        REQUIRE(point.pole(1).rank() == 2);
        REQUIRE(std::abs(point.pole(0).exponents[0] - prm.theta11) < 1e-12);
        REQUIRE(std::abs(point.pole(0).exponents[1] - prm.theta12) < 1e-12);
        REQUIRE(std::abs(point.pole(1).exponents[0] - prm.theta21) < 1e-12);
        REQUIRE(std::abs(point.pole(1).exponents[1] - prm.theta22) < 1e-12);
        Matrix eb1(3, 2);
        eb1 << 1, 0, 0, 1, 0, 0;
        Matrix eb2(3, 2);
        eb2 << 0, 1, 0, 1, 1, 1;
        REQUIRE(max_abs(point.pole(0).basis - eb1) < 1e-14);
        REQUIRE(max_abs(point.pole(1).basis - eb2) < 1e-14);
        const Matrix& c2 = point.pole(1).dual;
        REQUIRE(std::abs(c2(0, 0) - (st.x - prm.theta21)) < 1e-12);
        REQUIRE(std::abs(c2(0, 1) + st.x) < 1e-12);
        REQUIRE(std::abs(c2(0, 2) - prm.theta21) < 1e-12);
        REQUIRE(std::abs(c2(1, 0) + st.y) < 1e-12);
        REQUIRE(std::abs(c2(1, 1) - (st.y + prm.theta22)) < 1e-12);
        REQUIRE(std::abs(c2(1, 2)) < 1e-12);
    }
    SECTION("pairing blocks are diagonal identically in the coordinates") {
        testgen::Rng local(901);
        for (int round = 0; round < 3; ++round) {
            const A2State other = draw_state(local, prm);
            const auto pt = build_a2_point(prm, other);
            for (int i = 0; i < 2; ++i) {
                const Matrix block = pt.pole(i).dual * pt.pole(i).basis;
                const Matrix expected = pt.pole(i).exponents.asDiagonal();
                REQUIRE(max_abs(block - expected) < 1e-12);
            }
        }
    }
    SECTION("infinity spectrum matches the kappa triple") {
        const auto system = recompose(point);
        Eigen::ComplexEigenSolver<Matrix> solver(system.residue_at_infinity(), false);
        std::vector<Complex> eig(solver.eigenvalues().begin(), solver.eigenvalues().end());
        REQUIRE(multiset_gap(eig, {prm.kappa1, prm.kappa2, prm.kappa3}) < 1e-9);
        REQUIRE(max_abs(system.residue_at_infinity() -
                        oracle_infinity(prm, st.x, st.y, st.alpha, st.beta)) < 1e-12);
    }
    SECTION("rejects broken parameter tables") {
        A2Parameters broken = prm;
        broken.kappa1 += Complex(0.5);
        REQUIRE_THROWS_AS(build_a2_point(broken, st.x, st.y), FuchsViolation);
        A2Parameters equal_thetas = prm;
        equal_thetas.kappa3 += equal_thetas.theta12 - equal_thetas.theta11;
        equal_thetas.theta12 = equal_thetas.theta11;
        REQUIRE_THROWS_AS(build_a2_point(equal_thetas, st.x, st.y), MultipleEigenvalue);
    }
    SECTION("cached auxiliaries are revalidated on read") {
        A2State corrupted = st;
        corrupted.alpha += Complex(0.5);
        REQUIRE_THROWS_AS(build_a2_point(prm, corrupted), AlphaBetaUnsolvable);
    }
    SECTION("a spectrum drift below the matching tolerance is still caught") {
        testgen::Rng local(903);
        A2Parameters tight = draw_params(local);
        const Complex span = tight.theta11 + tight.theta12 + tight.theta21 + tight.theta22;
        tight.kappa1 = -span / 3.0;
        tight.kappa2 = tight.kappa1 + Complex(1e-3);
        tight.kappa3 = tight.kappa1 - Complex(1e-3);
        const Complex x(0.4, 0.1);
        const Complex y(-0.3, 0.2);
        A2State drifted = a2_state(tight, x, y);
        build_a2_point(tight, drifted);
        drifted.alpha += Complex(0, 3e-11);
        REQUIRE_THROWS_AS(build_a2_point(tight, drifted), InfinitySpectrumMismatch);
    }
}

TEST_CASE("solve_alpha_beta matches the characteristic coefficients", "[a2star]") {
    testgen::Rng rng(902);
    for (int round = 0; round < 20; ++round) {
        const A2Parameters prm = draw_params(rng);
        const A2State st = draw_state(rng, prm);
        const Matrix a = oracle_infinity(prm, st.x, st.y, st.alpha, st.beta);
        const double scale = 1.0 + std::abs(e2_kappa(prm)) + std::abs(e3_kappa(prm));
        REQUIRE(std::abs(oracle_e2(a) - e2_kappa(prm)) < 1e-10 * scale);
        REQUIRE(std::abs(a.determinant() - e3_kappa(prm)) < 1e-10 * scale);

        const Matrix off =
            oracle_infinity(prm, st.x, st.y, st.alpha + Complex(1e-3), st.beta);
        REQUIRE(std::abs(off.determinant() - e3_kappa(prm)) > 1e-7);
    }
    SECTION("round-trip through the frame") {
        testgen::Rng local(904);
        for (int round = 0; round < 10; ++round) {
            const A2Parameters prm = draw_params(local);
            const A2State st = draw_state(local, prm);
            const auto [x, y] = xy_coordinates(canonical_frame(build_a2_point(prm, st)));
            REQUIRE(std::abs(x - st.x) < 1e-9);
            REQUIRE(std::abs(y - st.y) < 1e-9);
        }
    }
    SECTION("a singular inconsistent matching system is reported") {
        testgen::Rng local(906);
        const A2Parameters prm = draw_params(local);
        REQUIRE_THROWS_AS(solve_alpha_beta(prm, prm.theta21, Complex(0)),
                          AlphaBetaUnsolvable);
    }
    SECTION("a singular consistent matching system reports the candidate line") {
        testgen::Rng local(907);
        A2Parameters prm = draw_params(local);
        const Complex x = prm.theta21;
        const Complex y(0);
        const Matrix base = oracle_infinity(prm, x, y, Complex(0), Complex(0));
        const Complex span = prm.theta11 + prm.theta12 + prm.theta21 + prm.theta22;
        const Complex e2(0.3, 0.2);
        const Complex e3 = base.determinant() + prm.theta11 * (oracle_e2(base) - e2);
        Matrix companion(3, 3);
        companion << 0, 0, e3, 1, 0, -e2, 0, 1, -span;
        Eigen::ComplexEigenSolver<Matrix> roots(companion, false);
        prm.kappa1 = roots.eigenvalues()[0];
        prm.kappa2 = roots.eigenvalues()[1];
        prm.kappa3 = roots.eigenvalues()[2];
        REQUIRE_THROWS_MATCHES(
            solve_alpha_beta(prm, x, y), MultipleRoots,
            Catch::Matchers::MessageMatches(ContainsSubstring("line of solutions")));
    }
}

TEST_CASE("canonical_frame normalizes the gauge", "[a2star]") {
    testgen::Rng rng(905);
    const A2Parameters prm = draw_params(rng);
    const A2State st = draw_state(rng, prm);
    const auto point = build_a2_point(prm, st);

    SECTION("conjugation and rescaling wash out") {
        for (int round = 0; round < 10; ++round) {
            Matrix p = testgen::random_matrix(rng, 3, 3);
            while (reciprocal_condition(p) < 1e-2) p = testgen::random_matrix(rng, 3, 3);
            const Matrix p_inv = p.inverse();
            std::vector<PoleFactors> twisted;
            for (int i = 0; i < 2; ++i) {
                PoleFactors pf = point.pole(i);
                pf.basis = p * pf.basis;
                pf.dual = pf.dual * p_inv;
                for (int j = 0; j < 2; ++j) {
                    const Complex scale = rng.box(1.0) + Complex(2);
                    pf.basis.col(j) *= scale;
                    pf.dual.row(j) /= scale;
                }
                twisted.push_back(std::move(pf));
            }
            const DecompositionPoint moved(std::move(twisted),
                                           p * point.infinity_target() * p_inv);
            const auto [x, y] = xy_coordinates(canonical_frame(moved));
            REQUIRE(std::abs(x - st.x) < 1e-9);
            REQUIRE(std::abs(y - st.y) < 1e-9);
        }
    }
    SECTION("idempotence") {
        const auto once = canonical_frame(point);
        const auto twice = canonical_frame(once);
        for (int i = 0; i < 2; ++i) {
            REQUIRE(max_abs(twice.pole(i).basis - once.pole(i).basis) < 1e-12);
            REQUIRE(max_abs(twice.pole(i).dual - once.pole(i).dual) < 1e-12);
        }
        REQUIRE(max_abs(twice.infinity_target() - once.infinity_target()) < 1e-12);
    }
    SECTION("dependent frame vectors are rejected") {
        PoleFactors pf = point.pole(1);
        pf.basis.col(0) = point.pole(0).basis.col(0);
        const DecompositionPoint flat({point.pole(0), refit_dual(std::move(pf))},
                                      point.infinity_target());
        REQUIRE_THROWS_MATCHES(
            canonical_frame(flat), DegenerateFrame,
            Catch::Matchers::MessageMatches(ContainsSubstring("dependent")));
    }
    SECTION("a closing column inside the frame plane is rejected") {
        PoleFactors pf = point.pole(1);
        pf.basis.col(1) = point.pole(0).basis.col(0) + pf.basis.col(0);
        const DecompositionPoint flat({point.pole(0), refit_dual(std::move(pf))},
                                      point.infinity_target());
        REQUIRE_THROWS_MATCHES(
            canonical_frame(flat), DegenerateFrame,
            Catch::Matchers::MessageMatches(ContainsSubstring("vanishing component")));
    }
}

TEST_CASE("xy_coordinates reads the canonical chart", "[a2star]") {
    testgen::Rng rng(908);
    const A2Parameters prm = draw_params(rng);
    const A2State st = draw_state(rng, prm);
    const auto point = build_a2_point(prm, st);

    SECTION("round-trip") {
        const auto [x, y] = xy_coordinates(point);
        REQUIRE(std::abs(x - st.x) < 1e-12);
        REQUIRE(std::abs(y - st.y) < 1e-12);
    }
    SECTION("trivial rescales followed by re-framing keep the chart") {
        testgen::Rng local(909);
        std::vector<PoleFactors> scaled;
        for (int i = 0; i < 2; ++i) {
            PoleFactors pf = point.pole(i);
            for (int j = 0; j < 2; ++j) {
                const Complex s = local.box(1.0) + Complex(2);
                pf.basis.col(j) *= s;
                pf.dual.row(j) /= s;
            }
            scaled.push_back(std::move(pf));
        }
        const DecompositionPoint gauged(std::move(scaled), point.infinity_target());
        const auto [x, y] = xy_coordinates(canonical_frame(gauged));
        REQUIRE(std::abs(x - st.x) < 1e-9);
        REQUIRE(std::abs(y - st.y) < 1e-9);
    }
    SECTION("disagreeing redundant entries are rejected") {
        std::vector<PoleFactors> poles{point.pole(0), point.pole(1)};
        poles[1].dual(0, 0) += Complex(1e-6);
        const DecompositionPoint skewed(std::move(poles), point.infinity_target(), 1e-4);
        REQUIRE_THROWS_MATCHES(
            xy_coordinates(skewed), InconsistentEntries,
            Catch::Matchers::MessageMatches(ContainsSubstring("readings disagree")));
    }
    SECTION("nonvanishing reserved entries are rejected") {
        std::vector<PoleFactors> poles{point.pole(0), point.pole(1)};
        poles[0].dual(0, 1) += Complex(1e-6);
        const DecompositionPoint skewed(std::move(poles), point.infinity_target(), 1e-4);
        REQUIRE_THROWS_AS(xy_coordinates(skewed), InconsistentEntries);
    }
    SECTION("points outside the canonical frame are rejected") {
        Matrix p = testgen::random_matrix(rng, 3, 3);
        while (reciprocal_condition(p) < 1e-2) p = testgen::random_matrix(rng, 3, 3);
        const Matrix p_inv = p.inverse();
        std::vector<PoleFactors> twisted;
        for (int i = 0; i < 2; ++i) {
            PoleFactors pf = point.pole(i);
            pf.basis = p * pf.basis;
            pf.dual = pf.dual * p_inv;
            twisted.push_back(std::move(pf));
        }
        const DecompositionPoint moved(std::move(twisted),
                                       p * point.infinity_target() * p_inv);
        REQUIRE_THROWS_AS(xy_coordinates(moved), FrameMismatch);
        testgen::Rng local(911);
        REQUIRE_THROWS_AS(xy_coordinates(testgen::random_point(local, 3, {2, 2})),
                          FrameMismatch);
        REQUIRE_THROWS_AS(xy_coordinates(testgen::random_point(local, 2, {1, 1})),
                          FrameMismatch);
    }
}

TEST_CASE("a2_schlesinger_step agrees with the transformation pipeline", "[a2star]") {
    testgen::Rng rng(910);
    int accepted = 0;
    while (accepted < 50) {
        const A2Parameters prm = draw_params(rng);
        const A2State st = draw_state(rng, prm);
        A2Parameters next_prm;
        A2State next_st;
        try {
            std::tie(next_prm, next_st) = a2_schlesinger_step(prm, st);
        } catch (const Error&) {
            continue;
        }
        ++accepted;
        REQUIRE(std::abs(next_prm.theta11 - (prm.theta11 - Complex(1))) < 1e-14);
        REQUIRE(std::abs(next_prm.theta21 - (prm.theta21 + Complex(1))) < 1e-14);
        REQUIRE(std::abs(next_prm.theta12 - prm.theta12) < 1e-14);
        REQUIRE(std::abs(next_prm.theta22 - prm.theta22) < 1e-14);
        REQUIRE(std::abs(next_prm.kappa1 - prm.kappa1) < 1e-14);
        REQUIRE(std::abs(next_prm.kappa2 - prm.kappa2) < 1e-14);
        REQUIRE(std::abs(next_prm.kappa3 - prm.kappa3) < 1e-14);

        DecompositionPoint barred = [&] {
            const auto point = build_a2_point(prm, st);
            return transform_decomposition(point, kSingleStep);
        }();
        const auto [x_pipe, y_pipe] = xy_coordinates(canonical_frame(barred));
        REQUIRE(std::abs(next_st.x - x_pipe) / (1.0 + std::abs(x_pipe)) < 1e-8);
        REQUIRE(std::abs(next_st.y - y_pipe) / (1.0 + std::abs(y_pipe)) < 1e-8);

        if (accepted == 1) {
            const auto scheme = riemann_scheme(recompose(barred));
            require_scheme(scheme,
                           {prm.theta11 - Complex(1), prm.theta12, Complex(0)},
                           {prm.theta21 + Complex(1), prm.theta22, Complex(0)},
                           {prm.kappa1, prm.kappa2, prm.kappa3}, 1e-7);
        }
    }
    SECTION("the excluded exponent gap raises Indeterminacy") {
        testgen::Rng local(912);
        const A2Parameters base = draw_params(local);
        A2Parameters tuned = base;
        tuned.kappa3 += tuned.theta12 - (tuned.theta11 - Complex(1));
        tuned.theta12 = tuned.theta11 - Complex(1);
        const A2State st = draw_state(local, tuned);
        REQUIRE_THROWS_MATCHES(
            a2_schlesinger_step(tuned, st), Indeterminacy,
            Catch::Matchers::MessageMatches(ContainsSubstring("theta11 - theta12 - 1")));
    }
}

TEST_CASE("sigma13 acts as a scalar shift at the first pole", "[a2star]") {
    testgen::Rng rng(913);
    const A2Parameters prm = draw_params(rng);
    const A2State st = draw_state(rng, prm);
    const auto point = build_a2_point(prm, st);
    const auto [moved, table] = sigma13(point, prm);

    SECTION("second pole untouched, first pole shifted by the scalar") {
        REQUIRE(max_abs(moved.pole(1).residue() - point.pole(1).residue()) == 0.0);
        const Matrix shift =
            prm.theta11 * Matrix::Identity(3, 3);
        REQUIRE(max_abs(moved.pole(0).residue() - (point.pole(0).residue() - shift)) <
                1e-10);
        REQUIRE(max_abs(moved.infinity_target() - (point.infinity_target() + shift)) <
                1e-12);
        REQUIRE(std::abs(moved.pole(0).exponents[0] + prm.theta11) < 1e-12);
        REQUIRE(std::abs(moved.pole(0).exponents[1] - (prm.theta12 - prm.theta11)) <
                1e-12);
    }
    SECTION("parameter table tracks the scheme display") {
        REQUIRE(std::abs(table.theta11 + prm.theta11) < 1e-14);
        REQUIRE(std::abs(table.theta12 - (prm.theta12 - prm.theta11)) < 1e-14);
        REQUIRE(std::abs(table.theta21 - prm.theta21) < 1e-14);
        REQUIRE(std::abs(table.theta22 - prm.theta22) < 1e-14);
        REQUIRE(std::abs(table.kappa1 - (prm.kappa1 + prm.theta11)) < 1e-14);
        REQUIRE(std::abs(table.kappa2 - (prm.kappa2 + prm.theta11)) < 1e-14);
        REQUIRE(std::abs(table.kappa3 - (prm.kappa3 + prm.theta11)) < 1e-14);
        const auto scheme = riemann_scheme(recompose(moved));
        require_scheme(scheme,
                       {-prm.theta11, prm.theta12 - prm.theta11, Complex(0)},
                       {prm.theta21, prm.theta22, Complex(0)},
                       {prm.kappa1 + prm.theta11, prm.kappa2 + prm.theta11,
                        prm.kappa3 + prm.theta11},
                       1e-7);
    }
    SECTION("applying the exchange twice returns the system") {
        const auto [back, second] = sigma13(moved, table);
        REQUIRE(std::abs(second.theta11 - prm.theta11) < 1e-13);
        REQUIRE(std::abs(second.theta12 - prm.theta12) < 1e-13);
        REQUIRE(std::abs(second.kappa1 - prm.kappa1) < 1e-13);
        for (int i = 0; i < 2; ++i)
            REQUIRE(max_abs(back.pole(i).residue() - point.pole(i).residue()) < 1e-9);
    }
    SECTION("nearly parallel basis columns are rejected") {
        testgen::Rng local(914);
        const Vector lead = testgen::random_matrix(local, 3, 1).col(0);
        Matrix basis(3, 2);
        basis.col(0) = lead;
        basis.col(1) = lead + 1e-12 * testgen::random_matrix(local, 3, 1).col(0);
        Matrix seed = testgen::random_matrix(local, 2, 3);
        Vector theta(2);
        theta << prm.theta11, prm.theta12;
        const Matrix pairing = seed * basis;
        const Matrix dual = Matrix(theta.asDiagonal()) * pairing.inverse() * seed;
        PoleFactors first{Complex(0), basis, dual, theta};
        const PoleFactors second = point.pole(1);
        const Matrix target = -(first.residue() + second.residue());
        const DecompositionPoint thin({first, second}, target, 1.0);
        A2Parameters sheet = prm;
        Eigen::ComplexEigenSolver<Matrix> solver(target, false);
        sheet.kappa1 = solver.eigenvalues()[0];
        sheet.kappa2 = solver.eigenvalues()[1];
        sheet.kappa3 = solver.eigenvalues()[2];
        REQUIRE_THROWS_MATCHES(
            sigma13(thin, sheet), DegenerateCross,
            Catch::Matchers::MessageMatches(ContainsSubstring("basis columns")));
    }
    SECTION("nearly parallel dual rows are rejected") {
        testgen::Rng local(915);
        const RowVector lead = testgen::random_matrix(local, 1, 3).row(0);
        Matrix dual(2, 3);
        dual.row(0) = lead;
        dual.row(1) = lead + 1e-12 * testgen::random_matrix(local, 1, 3).row(0);
        Vector theta(2);
        theta << prm.theta11, prm.theta12;
        // An order-one basis cannot meet the pairing condition against a
        // nearly rank-one dual, so this point only exists at loose tolerance.
        const Matrix basis = testgen::random_matrix(local, 3, 2);
        PoleFactors first{Complex(0), basis, dual, theta};
        const PoleFactors second = point.pole(1);
        const Matrix target = -(first.residue() + second.residue());
        const DecompositionPoint thin({first, second}, target, 50.0);
        A2Parameters sheet = prm;
        Eigen::ComplexEigenSolver<Matrix> solver(target, false);
        sheet.kappa1 = solver.eigenvalues()[0];
        sheet.kappa2 = solver.eigenvalues()[1];
        sheet.kappa3 = solver.eigenvalues()[2];
        REQUIRE_THROWS_MATCHES(
            sigma13(thin, sheet), DegenerateCross,
            Catch::Matchers::MessageMatches(ContainsSubstring("dual rows")));
    }
}

TEST_CASE("composite_step translates the scheme", "[a2star]") {
    testgen::Rng rng(916);
    int accepted = 0;
    while (accepted < 25) {
        const A2Parameters prm = draw_params(rng);
        const A2State st = draw_state(rng, prm);
        A2Parameters moved;
        A2State landed;
        std::vector<RiemannScheme> stages;
        try {
            std::tie(moved, landed) = composite_step(prm, st, &stages);
        } catch (const Error&) {
            continue;
        }
        ++accepted;
        REQUIRE(std::abs(moved.theta11 - prm.theta11) < 1e-12);
        REQUIRE(std::abs(moved.theta12 - (prm.theta12 - Complex(1))) < 1e-12);
        REQUIRE(std::abs(moved.theta21 - (prm.theta21 - Complex(1))) < 1e-12);
        REQUIRE(std::abs(moved.theta22 - (prm.theta22 - Complex(1))) < 1e-12);
        REQUIRE(std::abs(moved.kappa1 - (prm.kappa1 + Complex(1))) < 1e-12);
        REQUIRE(std::abs(moved.kappa2 - (prm.kappa2 + Complex(1))) < 1e-12);
        REQUIRE(std::abs(moved.kappa3 - (prm.kappa3 + Complex(1))) < 1e-12);
        REQUIRE(std::abs(moved.theta11 + moved.theta12 + moved.theta21 + moved.theta22 +
                         moved.kappa1 + moved.kappa2 + moved.kappa3) < 1e-10);

        if (accepted == 1) {
            REQUIRE(stages.size() == 4);
            const Complex one(1);
            require_scheme(stages[0],
                           {prm.theta11 + one, prm.theta12, Complex(0)},
                           {prm.theta21 - one, prm.theta22, Complex(0)},
                           {prm.kappa1, prm.kappa2, prm.kappa3}, 1e-7);
            require_scheme(stages[1],
                           {-prm.theta11 - one, prm.theta12 - prm.theta11 - one,
                            Complex(0)},
                           {prm.theta21 - one, prm.theta22, Complex(0)},
                           {prm.kappa1 + prm.theta11 + one,
                            prm.kappa2 + prm.theta11 + one,
                            prm.kappa3 + prm.theta11 + one},
                           1e-7);
            require_scheme(stages[2],
                           {-prm.theta11, prm.theta12 - prm.theta11 - one, Complex(0)},
                           {prm.theta21 - one, prm.theta22 - one, Complex(0)},
                           {prm.kappa1 + prm.theta11 + one,
                            prm.kappa2 + prm.theta11 + one,
                            prm.kappa3 + prm.theta11 + one},
                           1e-7);
            require_scheme(stages[3],
                           {prm.theta11, prm.theta12 - one, Complex(0)},
                           {prm.theta21 - one, prm.theta22 - one, Complex(0)},
                           {prm.kappa1 + one, prm.kappa2 + one, prm.kappa3 + one},
                           1e-7);
            const auto [table, fg] = to_standard(moved, landed);
            REQUIRE(std::abs(table.delta() + Complex(1)) < 1e-10);
            (void)fg;
        }
    }
    SECTION("failures carry the stage tag") {
        testgen::Rng local(917);
        A2Parameters first = draw_params(local);
        first.kappa3 += first.theta21 - Complex(1);
        first.theta21 = Complex(1);
        const A2State st1 = draw_state(local, first);
        REQUIRE_THROWS_MATCHES(
            composite_step(first, st1), Indeterminacy,
            Catch::Matchers::MessageMatches(ContainsSubstring("stage 1")));

        testgen::Rng later(918);
        A2Parameters third = draw_params(later);
        third.kappa3 += third.theta22 - Complex(1);
        third.theta22 = Complex(1);
        const A2State st3 = draw_state(later, third);
        REQUIRE_THROWS_MATCHES(
            composite_step(third, st3), Indeterminacy,
            Catch::Matchers::MessageMatches(ContainsSubstring("stage 3")));
    }
}

TEST_CASE("to_standard pins the parameter dictionary", "[a2star]") {
    A2Parameters prm;
    prm.theta11 = Complex(0.7);
    prm.theta12 = Complex(0.3);
    prm.theta21 = Complex(0.6);
    prm.theta22 = Complex(-0.2);
    prm.kappa1 = Complex(0.25);
    prm.kappa2 = Complex(-0.55);
    prm.kappa3 = Complex(-1.1);

    SECTION("frozen parameter table") {
        const auto [table, fg] = to_standard(prm, Complex(2), Complex(0.5));
        REQUIRE(std::abs(table.b1 - Complex(0.55)) < 1e-12);
        REQUIRE(std::abs(table.b2 - Complex(-0.25)) < 1e-12);
        REQUIRE(std::abs(table.b3 - Complex(-0.8)) < 1e-12);
        REQUIRE(table.b4 == Complex(0));
        REQUIRE(std::abs(table.b5 - Complex(0.6)) < 1e-12);
        REQUIRE(std::abs(table.b6 - Complex(-0.2)) < 1e-12);
        REQUIRE(std::abs(table.b7 - Complex(0.4)) < 1e-12);
        REQUIRE(std::abs(table.b8 - Complex(-1.3)) < 1e-12);
        REQUIRE(std::abs(table.delta() - Complex(-1)) < 1e-12);
        REQUIRE(std::abs(fg.f - Complex(-0.85)) < 1e-12);
        REQUIRE(std::abs(fg.g - Complex(-0.58 / 0.9)) < 1e-12);
    }
    SECTION("delta is minus one for any admissible table") {
        testgen::Rng rng(919);
        for (int round = 0; round < 5; ++round) {
            const A2Parameters random_prm = draw_params(rng);
            const auto [table, fg] =
                to_standard(random_prm, Complex(2.2, 0.4), Complex(0.3, -0.6));
            REQUIRE(std::abs(table.delta() + Complex(1)) < 1e-12);
            (void)fg;
        }
    }
    SECTION("interior base point lands at the origin") {
        const auto [table, fg] = to_standard(prm, Complex(0), -prm.theta22);
        REQUIRE(std::abs(fg.f) < 1e-12);
        REQUIRE(std::abs(fg.g) < 1e-12);
        (void)table;
    }
    SECTION("the vertical direction lands on the g wall") {
        const auto fg = to_standard(prm, Complex(0.3), Complex(1e9)).second;
        REQUIRE(std::abs(fg.f) > 1e6);
        REQUIRE(std::abs(fg.g - prm.theta21) < 1e-6);
    }
    SECTION("the blown-down line is indeterminate") {
        const Complex x(1.4, 0.2);
        REQUIRE_THROWS_AS(to_standard(prm, x, x - prm.theta21), Indeterminacy);
    }
}

TEST_CASE("a2_standard_step keeps delta and names its factors", "[a2star]") {
    const StandardA2Parameters frozen{Complex(0.55), Complex(-0.25), Complex(-0.8),
                                      Complex(0),    Complex(0.6),   Complex(-0.2),
                                      Complex(0.4),  Complex(-1.3)};
    SECTION("a vanishing numerator reflects across the anticanonical line") {
        // Exactly on the wall the reflected point f = -g re-enters the second
        // half-step's f + g divisor, so the full step is indeterminate there.
        const StandardA2State on_wall{Complex(0.9, 0.3), -frozen.b1};
        REQUIRE_THROWS_MATCHES(
            a2_standard_step(frozen, on_wall), Indeterminacy,
            Catch::Matchers::MessageMatches(ContainsSubstring("barred f + g")));
        const StandardA2State near_wall{Complex(0.9, 0.3),
                                        -frozen.b1 + Complex(1e-6)};
        const auto [next, fg] = a2_standard_step(frozen, near_wall);
        REQUIRE(std::abs(fg.f + near_wall.g) < 1e-4);
        REQUIRE(std::abs(next.delta() - frozen.delta()) < 1e-13);
    }
    SECTION("base points raise Indeterminacy by factor name") {
        REQUIRE_THROWS_MATCHES(
            a2_standard_step(frozen, StandardA2State{Complex(0.4), Complex(-0.4)}),
            Indeterminacy,
            Catch::Matchers::MessageMatches(ContainsSubstring("f + g")));
        REQUIRE_THROWS_MATCHES(
            a2_standard_step(frozen, StandardA2State{Complex(0.4), frozen.b5}),
            Indeterminacy,
            Catch::Matchers::MessageMatches(ContainsSubstring("g - b5")));
        REQUIRE_THROWS_MATCHES(
            a2_standard_step(frozen, StandardA2State{Complex(0.4), frozen.b6}),
            Indeterminacy,
            Catch::Matchers::MessageMatches(ContainsSubstring("g - b6")));
    }
    SECTION("the shift preserves delta and the fixed quadruple") {
        testgen::Rng rng(921);
        for (int round = 0; round < 5; ++round) {
            const StandardA2Parameters table{rng.box(1.0), rng.box(1.0), rng.box(1.0),
                                             rng.box(1.0), rng.box(1.0), rng.box(1.0),
                                             rng.box(1.0), rng.box(1.0)};
            const StandardA2State state{rng.box(1.0) + Complex(2),
                                        rng.box(1.0) + Complex(2)};
            const auto [next, fg] = a2_standard_step(table, state);
            REQUIRE(std::abs(next.delta() - table.delta()) < 1e-13);
            REQUIRE(next.b1 == table.b1);
            REQUIRE(next.b2 == table.b2);
            REQUIRE(next.b3 == table.b3);
            REQUIRE(next.b4 == table.b4);
            REQUIRE(std::abs(next.b5 - (table.b5 + table.delta())) < 1e-15);
            REQUIRE(std::abs(next.b7 - (table.b7 - table.delta())) < 1e-15);
            (void)fg;
        }
    }
}

TEST_CASE("composite and standard dynamics commute with the dictionary", "[a2star]") {
    testgen::Rng rng(923);
    int accepted = 0;
    while (accepted < 25) {
        const A2Parameters prm = draw_params(rng);
        const A2State st = draw_state(rng, prm);
        A2Parameters moved;
        A2State landed;
        StandardA2Parameters stepped_table;
        StandardA2State stepped_fg;
        try {
            std::tie(moved, landed) = composite_step(prm, st);
            const auto [table, fg] = to_standard(prm, st);
            std::tie(stepped_table, stepped_fg) = a2_standard_step(table, fg);
        } catch (const Error&) {
            continue;
        }
        ++accepted;
        const auto [expected_table, expected_fg] = to_standard(moved, landed);
        REQUIRE(std::abs(expected_table.b1 - stepped_table.b1) < 1e-10);
        REQUIRE(std::abs(expected_table.b2 - stepped_table.b2) < 1e-10);
        REQUIRE(std::abs(expected_table.b3 - stepped_table.b3) < 1e-10);
        REQUIRE(std::abs(expected_table.b4 - stepped_table.b4) < 1e-10);
        REQUIRE(std::abs(expected_table.b5 - stepped_table.b5) < 1e-10);
        REQUIRE(std::abs(expected_table.b6 - stepped_table.b6) < 1e-10);
        REQUIRE(std::abs(expected_table.b7 - stepped_table.b7) < 1e-10);
        REQUIRE(std::abs(expected_table.b8 - stepped_table.b8) < 1e-10);
        REQUIRE(std::abs(expected_fg.f - stepped_fg.f) / (1.0 + std::abs(expected_fg.f)) <
                1e-8);
        REQUIRE(std::abs(expected_fg.g - stepped_fg.g) / (1.0 + std::abs(expected_fg.g)) <
                1e-8);
    }
    SECTION("five-step orbits stay matched") {
        bool found = false;
        for (std::uint64_t seed = 930; seed < 990 && !found; ++seed) {
            testgen::Rng local(seed);
            A2Parameters prm = draw_params(local);
            A2State st = draw_state(local, prm);
            StandardA2Parameters table;
            StandardA2State fg;
            try {
                std::tie(table, fg) = to_standard(prm, st);
                auto probe_prm = prm;
                auto probe_st = st;
                auto probe_table = table;
                auto probe_fg = fg;
                for (int step = 0; step < 5; ++step) {
                    std::tie(probe_prm, probe_st) = composite_step(probe_prm, probe_st);
                    std::tie(probe_table, probe_fg) =
                        a2_standard_step(probe_table, probe_fg);
                }
            } catch (const Error&) {
                continue;
            }
            found = true;
            for (int step = 0; step < 5; ++step) {
                std::tie(prm, st) = composite_step(prm, st);
                std::tie(table, fg) = a2_standard_step(table, fg);
                const auto [check_table, check_fg] = to_standard(prm, st);
                REQUIRE(std::abs(check_fg.f - fg.f) / (1.0 + std::abs(fg.f)) < 1e-7);
                REQUIRE(std::abs(check_fg.g - fg.g) / (1.0 + std::abs(fg.g)) < 1e-7);
                REQUIRE(std::abs(check_table.b5 - table.b5) < 1e-9);
                REQUIRE(std::abs(table.delta() + Complex(1)) < 1e-12);
            }
        }
        REQUIRE(found);
    }
}

TEST_CASE("the generating function collapses to the displayed four-log form",
          "[a2star]") {
    testgen::Rng rng(924);
    int accepted = 0;
    while (accepted < 10) {
        const A2Parameters prm = draw_params(rng);
        const A2State st = draw_state(rng, prm);
        const auto point = build_a2_point(prm, st);
        DecompositionPoint barred = point;
        try {
            barred = transform_decomposition(point, kSingleStep);
        } catch (const Error&) {
            continue;
        }
        const Vector b11 = point.pole(0).basis.col(0);
        const Vector b12 = point.pole(0).basis.col(1);
        const Vector b21 = point.pole(1).basis.col(0);
        const Vector b22 = point.pole(1).basis.col(1);
        const RowVector c11 = barred.pole(0).dual.row(0);
        const RowVector c12 = barred.pole(0).dual.row(1);
        const RowVector c21 = barred.pole(1).dual.row(0);
        const RowVector c22 = barred.pole(1).dual.row(1);
        const auto paired = [](const RowVector& c, const Vector& b) {
            return (c * b)(0, 0);
        };

        const Complex s3 = paired(c11, b21);
        const Vector predicted_b11 = (prm.theta11 - Complex(1)) / s3 * b21;
        REQUIRE(max_abs(barred.pole(0).basis.col(0) - predicted_b11) < 1e-9);

        const Matrix reflect =
            Matrix::Identity(3, 3) - b21 * c21 / paired(c21, b21);
        const Vector pushed = reflect * b22;
        const Vector predicted_b22 = prm.theta22 / paired(c22, pushed) * pushed;
        REQUIRE(max_abs(barred.pole(1).basis.col(1) - predicted_b22) < 1e-9);

        const RowVector predicted_c11 = prm.theta11 / paired(c21, b11) * c21;
        REQUIRE(max_abs(point.pole(0).dual.row(0) - predicted_c11) < 1e-9);

        const Complex d1 = paired(c11, b21) * paired(c12, b12) * paired(c21, b11) -
                           paired(c11, b21) * paired(c12, b11) * paired(c21, b12) -
                           paired(c11, b12) * paired(c12, b21) * paired(c21, b11);
        const Complex d2 = paired(c21, b21) * paired(c22, b22) -
                           paired(c21, b22) * paired(c22, b21);
        const Complex displayed =
            (prm.theta21 - prm.theta11 - prm.theta22 + Complex(1)) *
                std::log(paired(c21, b21)) +
            (prm.theta11 - prm.theta12 - Complex(1)) * std::log(paired(c11, b21)) +
            prm.theta12 * std::log(d1) + prm.theta22 * std::log(d2);
        const Complex corrected =
            displayed + (prm.theta11 - prm.theta12) * std::log(paired(c21, b11));
        const Complex general =
            discrete_hamiltonian(make_hamiltonian_input(point, barred, kSingleStep));

        // Branch bookkeeping: the regrouped logs can only wind by full turns
        // weighted by the two spectator exponents.
        const Complex gap = (corrected - general) /
                            (Complex(0, 2) * std::numbers::pi_v<double>);
        Eigen::Matrix2d lattice;
        lattice << prm.theta12.real(), prm.theta22.real(), prm.theta12.imag(),
            prm.theta22.imag();
        if (std::abs(lattice.determinant()) < 1e-3) continue;
        const Eigen::Vector2d turns =
            lattice.lu().solve(Eigen::Vector2d(gap.real(), gap.imag()));
        const double n1 = std::round(turns[0]);
        const double n2 = std::round(turns[1]);
        REQUIRE(std::abs(gap - n1 * prm.theta12 - n2 * prm.theta22) < 1e-7);
        ++accepted;
    }
}

TEST_CASE("the lifted base points sit on the displayed quadric", "[a2star]") {
    testgen::Rng rng(926);
    for (int round = 0; round < 10; ++round) {
        const A2Parameters prm = draw_params(rng);
        const auto quadric = [&](Complex bx, Complex by, Complex bz) {
            return (prm.theta11 - prm.theta12) * (bx - by - prm.theta21 * bz) *
                       (bx - by - prm.theta22 * bz) +
                   (prm.theta21 - prm.theta22) * bz *
                       (prm.theta22 * (prm.theta21 * bz - bx) + prm.theta21 * by);
        };
        REQUIRE(std::abs(quadric(prm.theta21, Complex(0), Complex(1))) < 1e-14);

        const std::vector<Complex> kappas{prm.kappa1, prm.kappa2, prm.kappa3};
        const std::vector<Complex> walls{prm.theta12 + prm.kappa1,
                                         prm.theta12 + prm.kappa2,
                                         prm.theta12 + prm.kappa3};
        for (int j = 0; j < 3; ++j) {
            const Complex spread = prm.theta12 - prm.theta11;
            const Complex bx = (prm.theta12 + kappas[j]) *
                               (prm.theta11 + prm.theta21 + kappas[j]) / spread;
            const Complex by = (prm.theta11 + kappas[j]) *
                               (prm.theta12 + prm.theta22 + kappas[j]) / spread;
            const double scale =
                1.0 + std::abs(bx) * std::abs(bx) + std::abs(by) * std::abs(by);
            REQUIRE(std::abs(quadric(bx, by, Complex(1))) < 1e-9 * scale);

            const auto fg = to_standard(prm, bx, by).second;
            const double reach = 1.0 + std::abs(fg.f) + std::abs(fg.g);
            REQUIRE(std::abs(fg.f + fg.g) < 1e-8 * reach);
            REQUIRE(std::abs(fg.f - walls[j]) < 1e-8 * reach);
        }
    }
}
