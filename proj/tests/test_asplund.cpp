#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lcf/asplund.hpp"
#include "lcf/functionals.hpp"
#include "lcf/grid.hpp"

using namespace lcf;

namespace {
constexpr double kSqrt2Pi = 2.5066282746310002;
}

TEST_CASE("p-sum of box indicators: support radii combine in the lp norm") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn box1 = build_indicator_box(spec, 1.0);
    const LogConcaveFn box2 = build_indicator_box(spec, 2.0);
    const PSumResult sum = p_sum(box1, box2, 1.0, 1.0, 2.0);

    REQUIRE(sum.combined_convexity.pass);
    const double root5 = std::sqrt(5.0);
    for (int i = 0; i < spec.n_axis; ++i) {
        const double x = spec.coord(0, i);
        if (std::fabs(x) <= root5 - 1e-9)
            REQUIRE(std::fabs(sum.result.potential.at(i)) <= 1e-9);
        else
            REQUIRE(sum.result.potential.at(i) >= 0.5);
    }
    REQUIRE(std::fabs(total_mass(sum.result.potential) - 2.0 * root5) < 1e-2);
}

TEST_CASE("p-sum of the Gaussian with itself rescales the variance") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    const PSumResult sum = p_sum(gauss, gauss, 1.0, 0.5, 2.0);
    // conjugates are y^2/2; the combined dual is sqrt(1.5) y^2/2, so the sum
    // is a Gaussian with mass 1.5^{1/4} sqrt(2 pi)
    const double expect = std::pow(1.5, 0.25) * kSqrt2Pi;
    REQUIRE(std::fabs(total_mass(sum.result.potential) - expect) < 5e-3);
    REQUIRE(sum.result.tag == ClassTag::CLASS_A0);
}

TEST_CASE("p = 1 dual route matches the primal infimal convolution") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    const LogConcaveFn box = build_indicator_box(spec, 1.0);
    const LogConcaveFn direct = inf_convolution(gauss, box);
    const PSumResult dual_route = p_sum(gauss, box, 1.0, 1.0, 1.0, 4097);
    double worst = 0.0;
    for (int i = 0; i < spec.n_axis; ++i) {
        const double x = spec.coord(0, i);
        if (std::fabs(x) > 6.0) continue;  // skip the outer band where the cap bites
        worst = std::max(worst,
                         std::fabs(direct.potential.at(i) - dual_route.result.potential.at(i)));
        // the exact value is dist(x, [-1,1])^2 / 2 and the primal route hits it
        const double d = std::max(std::fabs(x) - 1.0, 0.0);
        REQUIRE(std::fabs(direct.potential.at(i) - 0.5 * d * d) <= 1e-12);
    }
    REQUIRE(worst <= 1e-3);
}

TEST_CASE("p_scale: identity at alpha = 1, variance scaling on the Gaussian") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    const LogConcaveFn same = p_scale(gauss, 1.0, 2.0);
    for (std::size_t i = 0; i < same.potential.values.size(); ++i)
        REQUIRE(same.potential.values[i] == gauss.potential.values[i]);

    // alpha = 4, p = 2: sqrt(alpha) phi(x / sqrt(alpha)) = x^2 / 4
    const LogConcaveFn scaled = p_scale(gauss, 4.0, 2.0);
    const LogConcaveFn wide = build_gaussian(spec, 2.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < scaled.potential.values.size(); ++i)
        worst = std::max(worst,
                         std::fabs(scaled.potential.values[i] - wide.potential.values[i]));
    REQUIRE(worst <= 2e-4);
}

TEST_CASE("p-sum is commutative with swapped coefficients") {
    const GridSpec spec = make_grid(1, 6.0, 257);
    const LogConcaveFn a = build_gaussian(spec);
    const LogConcaveFn b = build_power(spec, 3.0);
    const PSumResult ab = p_sum(a, b, 0.7, 0.3, 2.5);
    const PSumResult ba = p_sum(b, a, 0.3, 0.7, 2.5);
    for (std::size_t i = 0; i < ab.result.potential.values.size(); ++i)
        REQUIRE(ab.result.potential.values[i] == ba.result.potential.values[i]);
}

TEST_CASE("p-sum rejects bad parameters and unnormalized inputs") {
    const GridSpec spec = make_grid(1, 6.0, 257);
    const LogConcaveFn gauss = build_gaussian(spec);
    REQUIRE_THROWS_AS(p_sum(gauss, gauss, 1.0, 1.0, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(p_sum(gauss, gauss, 0.0, 1.0, 2.0), std::invalid_argument);
    const LogConcaveFn other{build_gaussian(make_grid(1, 6.0, 129)).potential,
                             ClassTag::CLASS_A0_PRIME};
    REQUIRE_THROWS_AS(p_sum(gauss, other, 1.0, 1.0, 2.0), std::invalid_argument);

    // potential with min > 0: conjugate goes negative at the origin
    LogConcaveFn lifted;
    lifted.potential = sample_to_grid(
        spec, [](const Point& x) { return 0.5 * x[0] * x[0] + 0.5; }, true);
    lifted.tag = ClassTag::CLASS_A;
    REQUIRE_THROWS_AS(p_sum(gauss, lifted, 1.0, 1.0, 2.0), std::invalid_argument);

    REQUIRE_THROWS_AS(p_scale(gauss, 2.0, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(p_scale(gauss, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("monotone family: potentials shrink as t grows") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    const LogConcaveFn box = build_indicator_box(spec, 1.0);
    const MonotoneFamilyResult fam = monotone_family(gauss, box, 2.0, {0.5, 1.0, 2.0});
    REQUIRE(fam.members.size() == 3);
    REQUIRE(fam.monotonicity.pass);
    REQUIRE_THROWS_AS(monotone_family(gauss, box, 2.0, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(monotone_family(gauss, box, 2.0, {0.5, -1.0}), std::invalid_argument);
}
