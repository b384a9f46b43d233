// Builds a few standard inputs, conjugates them, and prints the quantities a
// first-time user usually wants to see: self-duality of the Gaussian, Santalo
// products, and an Lp sum of two indicator boxes.
#include <cstdio>

#include "lcf/lcf.hpp"

int main() {
    const lcf::GridSpec grid = lcf::make_grid(1, 8.0, 513);
    const lcf::LogConcaveFn gauss = lcf::build_gaussian(grid);

    const lcf::GridSpec dual = lcf::auto_dual_spec(gauss.potential);
    const lcf::GridFunction conj = lcf::conjugate_fast(gauss.potential, dual);
    double self_dual_err = 0.0;
    for (int i = 0; i < dual.n_axis; ++i) {
        const double y = dual.coord(0, i);
        if (std::fabs(y) > 4.0) continue;
        self_dual_err = std::max(self_dual_err, std::fabs(conj.at(i) - 0.5 * y * y));
    }
    std::printf("Gaussian: J = %.12f (expect sqrt(2 pi) = %.12f)\n",
                lcf::total_mass(gauss), std::sqrt(2.0 * 3.14159265358979323846));
    std::printf("Gaussian: sup |phi* - phi| on [-4,4] = %.3e\n", self_dual_err);

    const lcf::MarginReport santalo = lcf::check_santalo(gauss);
    std::printf("Santalo margin (Gaussian, equality case): %.3e, equality=%d\n",
                santalo.margin, santalo.equality_detected ? 1 : 0);

    const lcf::LogConcaveFn box1 = lcf::build_indicator_box(grid, 1.0);
    const lcf::LogConcaveFn box2 = lcf::build_indicator_box(grid, 2.0);
    const lcf::PSumResult sum = lcf::p_sum(box1, box2, 1.0, 1.0, 2.0);
    std::printf("L2 sum of boxes [-1,1], [-2,2]: mass = %.6f (expect 2 sqrt 5 = %.6f)\n",
                lcf::total_mass(sum.result), 2.0 * std::sqrt(5.0));
    return 0;
}
