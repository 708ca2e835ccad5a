// Runs both discrete Painleve reductions side by side with their lattice
// classification: ten steps of the five-parameter recurrence in (p, q) and
// five composite steps of the seven-parameter recurrence in (x, y), each
// checked against its standard form, then the translation vectors that place
// the two steps in the Picard-lattice classification.
#include <algorithm>
#include <iostream>
#include <string>

#include "schlesinger/a2star.hpp"
#include "schlesinger/dpv.hpp"
#include "schlesinger/lattice.hpp"
#include "schlesinger/serialize.hpp"

using namespace schlesinger;

namespace {

std::string show(Complex z) {
    return "(" + format_number(z.real()) + ", " + format_number(z.imag()) + ")";
}

void print_translation(const std::string& label, const LatticeAction& action,
                       const SurfaceData& surface) {
    const IntVector vec =
        translation_vector(action, surface.roots, surface.minus_k);
    std::cout << "  " << label << " [";
    for (int i = 0; i < vec.size(); ++i)
        std::cout << (i ? ", " : "") << vec(i);
    std::cout << "]\n";
}

}  // namespace

int main() {
    DPVParameters prm{};
    prm.theta1 = Complex(0.31);
    prm.thetat = Complex(-0.45);
    prm.kappa1 = Complex(0.27);
    prm.kappa2 = Complex(0.19);
    prm.theta0 = -(prm.theta1 + prm.thetat + prm.kappa1 + prm.kappa2);
    prm.t = Complex(0.4, 0.3);
    DPVState state{Complex(0.7, -0.2), Complex(1.3, 0.5)};

    std::cout << "five-parameter orbit, ten steps\n";
    auto [table, fg] = to_standard(prm, state);
    double conjugacy_gap = 0.0;
    for (int k = 1; k <= 10; ++k) {
        std::tie(prm, state) = dpv_step(prm, state);
        std::tie(table, fg) = dpv_standard_step(table, fg);
        const auto [lift_table, lift_fg] = to_standard(prm, state);
        conjugacy_gap = std::max({conjugacy_gap, std::abs(lift_fg.f - fg.f),
                                  std::abs(lift_fg.g - fg.g)});
        std::cout << "  step " << k << "  p = " << show(state.p)
                  << "  q = " << show(state.q) << "\n";
    }
    std::cout << "  standard-form conjugacy gap "
              << format_number(conjugacy_gap) << "\n\n";

    A2Parameters a2prm{};
    a2prm.theta11 = Complex(0.21);
    a2prm.theta12 = Complex(-0.34);
    a2prm.theta21 = Complex(0.17);
    a2prm.theta22 = Complex(0.29);
    a2prm.kappa1 = Complex(-0.11);
    a2prm.kappa2 = Complex(0.23);
    a2prm.kappa3 = -(a2prm.theta11 + a2prm.theta12 + a2prm.theta21 +
                     a2prm.theta22 + a2prm.kappa1 + a2prm.kappa2);
    A2State a2st = a2_state(a2prm, Complex(0.9, 0.1), Complex(-0.6, 0.4));

    std::cout << "seven-parameter orbit, five composite steps\n";
    for (int k = 1; k <= 5; ++k) {
        std::tie(a2prm, a2st) = composite_step(a2prm, a2st);
        std::cout << "  step " << k << "  x = " << show(a2st.x)
                  << "  y = " << show(a2st.y) << "\n";
    }
    std::cout << "\n";

    std::cout << "translation vectors on the marked root bases\n";
    const SurfaceData dpv_surface = dpv_standard_surface();
    const SurfaceData a2_surface = a2star_standard_surface();
    print_translation("five-parameter step    ", dpv_standard_step_action(),
                      dpv_surface);
    print_translation("seven-parameter step   ", a2star_standard_step_action(),
                      a2_surface);
    print_translation("decomposition-space step", a2star_schlesinger_step_action(),
                      a2_surface);
    return 0;
}
