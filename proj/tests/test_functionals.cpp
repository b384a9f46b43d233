#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lcf/functionals.hpp"
#include "lcf/grid.hpp"
#include "lcf/legendre.hpp"

using namespace lcf;

namespace {
constexpr double kSqrt2Pi = 2.5066282746310002;
constexpr double kTwoPi = 6.283185307179586;
}

TEST_CASE("total mass and entropy of the canonical examples") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    REQUIRE(std::fabs(total_mass(gauss) - kSqrt2Pi) < 1e-9);
    REQUIRE(std::fabs(integral_f_log_f(gauss.potential) - (-0.5 * kSqrt2Pi)) < 1e-9);
    const double gauss_ent = -0.5 * kSqrt2Pi - kSqrt2Pi * std::log(kSqrt2Pi);
    REQUIRE(std::fabs(entropy(gauss) - gauss_ent) < 1e-9);

    const LogConcaveFn box = build_indicator_box(spec, 1.0);
    REQUIRE(total_mass(box) == 2.0);  // node-exact: the walls sit on lattice points
    REQUIRE(integral_f_log_f(box.potential) == 0.0);
    REQUIRE(std::fabs(entropy(box) - (-2.0 * std::log(2.0))) < 1e-12);

    const LogConcaveFn gauss2 = build_gaussian(make_grid(2, 6.0, 129));
    REQUIRE(std::fabs(total_mass(gauss2) - kTwoPi) < 1e-6);

    LogConcaveFn empty;
    empty.potential.spec = make_grid(1, 1.0, 3);
    empty.potential.values = {kInf, kInf, kInf};
    REQUIRE_THROWS_AS(entropy(empty), std::domain_error);
}

TEST_CASE("surface measure of the Gaussian is the Gaussian moment measure") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    PushforwardStats st;
    const DiscreteMeasure mu = surface_measure(gauss, -1.0, &st);

    REQUIRE(st.cells_total == 512);
    REQUIRE(st.cells_total == st.atoms_before_merge + st.cells_skipped_gradient);
    REQUIRE(std::fabs(mu.total_weight() - kSqrt2Pi) < 1e-3);
    REQUIRE(mu.even);
    const double second_moment = measure_integral(mu, [](const Point& y) { return y[0] * y[0]; });
    REQUIRE(std::fabs(second_moment - kSqrt2Pi) < 2e-3);
    for (std::size_t i = 0; i + 1 < mu.atoms.size(); ++i)
        REQUIRE(mu.atoms[i].y[0] < mu.atoms[i + 1].y[0]);  // sorted support
}

TEST_CASE("surface measure of an indicator collapses to a point mass at the origin") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn box = build_indicator_box(spec, 1.0);
    PushforwardStats st;
    const DiscreteMeasure mu = surface_measure(box, -1.0, &st);
    REQUIRE(st.cells_skipped_gradient > 0);  // wall cells have no usable stencil
    REQUIRE(mu.atoms.size() == 1);
    REQUIRE(std::fabs(mu.atoms[0].y[0]) < 1e-12);
    REQUIRE(mu.total_weight() > 1.8);
    REQUIRE(mu.total_weight() <= 2.0);
}

TEST_CASE("lp surface measure: the omega cut removes the zero set") {
    const GridSpec spec = make_grid(1, 8.0, 513);

    // indicator: the gradient is zero wherever it exists, phi^* vanishes
    // there, and the whole interior is cut
    PushforwardStats st;
    const DiscreteMeasure empty = lp_surface_measure(build_indicator_box(spec, 1.0), 2.0, -1.0, &st);
    REQUIRE(empty.atoms.empty());
    REQUIRE(st.cells_cut_omega > 0);
    REQUIRE(st.cells_skipped_gradient > 0);
    REQUIRE(st.cells_total ==
            st.atoms_before_merge + st.cells_skipped_gradient + st.cells_cut_omega);
    REQUIRE(st.eps_omega > 0.0);

    // Gaussian, p = 0: the weight is phi^*(grad phi) itself, and the total is
    // the integral of (x^2/2) e^{-x^2/2}, i.e. sqrt(2 pi)/2
    const LogConcaveFn gauss = build_gaussian(spec);
    const DiscreteMeasure mu0 = lp_surface_measure(gauss, 0.0);
    REQUIRE(std::fabs(mu0.total_weight() - 0.5 * kSqrt2Pi) < 2e-3);

    // the same number through the moment measure and an explicit integrand
    const DiscreteMeasure mu1 = surface_measure(gauss);
    const GridFunction conj = conjugate_fast(gauss.potential, auto_dual_spec(gauss.potential));
    const double via_integral =
        measure_integral(mu1, [&](const Point& y) { return eval(conj, y); });
    REQUIRE(std::fabs(via_integral - 0.5 * kSqrt2Pi) < 2e-3);
    REQUIRE(std::fabs(via_integral - mu0.total_weight()) < 2e-3);
}

TEST_CASE("2D surface measure of the Gaussian keeps the full mass") {
    const LogConcaveFn gauss = build_gaussian(make_grid(2, 6.0, 129));
    const DiscreteMeasure mu = surface_measure(gauss);
    REQUIRE(std::fabs(mu.total_weight() - kTwoPi) < 1e-2);
    REQUIRE(mu.even);
}

TEST_CASE("merge_atoms clusters symmetrically and conserves weight") {
    DiscreteMeasure mu;
    mu.dim = 1;
    mu.atoms = {{pt(-1.0), 1.0}, {pt(-1.0 + 1e-4), 1.0}, {pt(1.0 - 1e-4), 1.0}, {pt(1.0), 1.0}};
    merge_atoms(mu, 1e-3);
    REQUIRE(mu.atoms.size() == 2);
    REQUIRE(mu.atoms[0].w == 2.0);
    REQUIRE(mu.atoms[1].w == 2.0);
    REQUIRE(std::fabs(mu.atoms[0].y[0] + mu.atoms[1].y[0]) < 1e-15);  // mirror pair
    REQUIRE(measure_is_even(mu, 1e-3));
}

TEST_CASE("measure_is_even checks positions and weights") {
    DiscreteMeasure even;
    even.atoms = {{pt(1.0), 1.0}, {pt(-1.0), 1.0}};
    REQUIRE(measure_is_even(even, 1e-9));

    DiscreteMeasure shifted;
    shifted.atoms = {{pt(1.0), 1.0}, {pt(2.0), 1.0}};
    REQUIRE_FALSE(measure_is_even(shifted, 1e-9));

    DiscreteMeasure lopsided;
    lopsided.atoms = {{pt(1.0), 1.0}, {pt(-1.0), 1.5}};
    REQUIRE_FALSE(measure_is_even(lopsided, 1e-9));
}
