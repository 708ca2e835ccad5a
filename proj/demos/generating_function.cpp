// Walks one elementary transformation of a rank-one three-pole system and
// checks that the discrete Hamiltonian generates it: the gradients of the
// scalar value reproduce the dual rows of the source point and the basis
// columns of the image point.
#include <iostream>
#include <string>

#include "schlesinger/dpv.hpp"
#include "schlesinger/serialize.hpp"
#include "schlesinger/transform.hpp"

using namespace schlesinger;

namespace {

std::string show(Complex z) {
    return "(" + format_number(z.real()) + ", " + format_number(z.imag()) + ")";
}

void print_point(const std::string& label, const DecompositionPoint& point) {
    std::cout << label << "\n";
    for (int i = 0; i < point.pole_count(); ++i) {
        const PoleFactors& pf = point.pole(i);
        std::cout << "  pole " << i << " at " << show(pf.location)
                  << "  exponents";
        for (const Complex theta : pf.exponents) std::cout << " " << show(theta);
        std::cout << "\n";
    }
}

}  // namespace

int main() {
    // A point of the two-by-two family with simple poles at 0, t, and 1,
    // parameterized by the chart coordinates (p, q).
    DPVParameters prm{};
    prm.theta1 = Complex(0.31);
    prm.thetat = Complex(-0.45);
    prm.kappa1 = Complex(0.27);
    prm.kappa2 = Complex(0.19);
    prm.theta0 = -(prm.theta1 + prm.thetat + prm.kappa1 + prm.kappa2);
    prm.t = Complex(0.4, 0.3);
    const DPVState state{Complex(0.7, -0.2), Complex(1.3, 0.5)};

    const DecompositionPoint point = build_dpv_point(prm, state);
    const TransformationIndex idx{2, 1, 0, 0};
    const DecompositionPoint barred = transform_decomposition(point, idx);

    print_point("source point", point);
    print_point("image point", barred);

    const ElementaryDivisor multiplier = elementary_multiplier(point, idx);
    std::cout << "multiplier moves a determinant zero from "
              << show(multiplier.zero()) << " to " << show(multiplier.pole())
              << "\n";

    const DiscreteHamiltonianInput input =
        make_hamiltonian_input(point, barred, idx);
    std::cout << "discrete Hamiltonian value "
              << show(discrete_hamiltonian(input)) << "\n";

    const GeneratingReport report = verify_generating(point, barred, idx);
    std::cout << "gradient residual against the dual rows    "
              << format_number(report.max_dual_residual) << "\n";
    std::cout << "gradient residual against the basis columns "
              << format_number(report.max_basis_residual) << "\n";
    std::cout << "finite-difference residual                  "
              << format_number(report.max_fd_residual) << "\n";
    return 0;
}
