#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lcf/grid.hpp"
#include "lcf/inequalities.hpp"

using namespace lcf;

TEST_CASE("Prekopa-Leindler type bound: equality for f = g, slack for boxes") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    const MarginReport self = check_prekopa_leindler(gauss, gauss, 0.5, 2.0);
    REQUIRE(self.pass);
    REQUIRE(self.equality_detected);
    REQUIRE(self.witness.find("node sup distance") != std::string::npos);

    const LogConcaveFn box1 = build_indicator_box(spec, 1.0);
    const LogConcaveFn box2 = build_indicator_box(spec, 2.0);
    const MarginReport boxes = check_prekopa_leindler(box1, box2, 0.5, 2.0);
    REQUIRE(boxes.pass);
    REQUIRE_FALSE(boxes.equality_detected);
    // supports combine in the l2 norm: radius sqrt(2.5), so the masses are
    // 2 sqrt(2.5) against the geometric mean 2 sqrt(2)
    REQUIRE(std::fabs(boxes.lhs - 2.0 * std::sqrt(2.5)) < 2e-2);
    REQUIRE(std::fabs(boxes.rhs - 2.0 * std::sqrt(2.0)) < 1e-9);

    const MarginReport mixed = check_prekopa_leindler(gauss, build_power(spec, 3.0), 0.25, 1.5);
    REQUIRE(mixed.margin >= -1e-6);

    REQUIRE_THROWS_AS(check_prekopa_leindler(gauss, gauss, 0.0, 2.0), std::invalid_argument);
    REQUIRE_THROWS_AS(check_prekopa_leindler(gauss, gauss, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("log-concavity along t: triple accounting and pass verdicts") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    const LogConcaveFn box = build_indicator_box(spec, 1.0);

    const MarginReport small = check_t_logconcavity(gauss, box, 2.0, {0.1, 0.2, 0.3});
    REQUIRE(small.pass);
    REQUIRE(small.witness.find("sum-curve triples: 1") != std::string::npos);
    REQUIRE(small.witness.find("interpolation-curve triples: 1") != std::string::npos);

    const MarginReport wide = check_t_logconcavity(gauss, box, 2.0, {0.2, 0.4, 0.6, 0.8});
    REQUIRE(wide.pass);
    REQUIRE(wide.witness.find("sum-curve triples: 2") != std::string::npos);

    REQUIRE_THROWS_AS(check_t_logconcavity(gauss, box, 2.0, {0.1, 0.2}), std::invalid_argument);
    REQUIRE_THROWS_AS(check_t_logconcavity(gauss, box, 2.0, {-0.1, 0.2, 0.3}),
                      std::invalid_argument);
}

TEST_CASE("Minkowski-type first-variation inequality") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    const LogConcaveFn box1 = build_indicator_box(spec, 1.0);
    const LogConcaveFn box2 = build_indicator_box(spec, 2.0);

    const MarginReport self = check_minkowski_type(gauss, gauss, 2.0);
    REQUIRE(self.pass);
    REQUIRE(self.equality_detected);

    const MarginReport mixed = check_minkowski_type(gauss, box1, 2.0);
    REQUIRE(mixed.margin >= -1e-6);
    const MarginReport boxes = check_minkowski_type(box1, box2, 2.0);
    REQUIRE(boxes.margin >= -1e-6);
    const MarginReport raise = check_minkowski_type(box1, gauss, 3.0);
    REQUIRE(raise.margin >= -1e-6);
}

TEST_CASE("Santalo upper bound on the volume product") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const MarginReport gauss = check_santalo(build_gaussian(spec));
    REQUIRE(gauss.pass);
    REQUIRE(gauss.equality_detected);  // the Gaussian saturates the bound
    REQUIRE(std::fabs(gauss.lhs - 2.0 * 3.14159265358979323846) < 2e-3);

    const MarginReport box = check_santalo(build_indicator_box(spec, 1.0));
    REQUIRE(box.pass);
    REQUIRE_FALSE(box.equality_detected);
    REQUIRE(std::fabs(box.lhs - 4.0) < 1e-9);  // closed form: 2 * int e^{-|y|}

    const MarginReport quartic = check_santalo(build_power(spec, 4.0));
    REQUIRE(quartic.pass);

    const MarginReport gauss2 = check_santalo(build_gaussian(make_grid(2, 5.0, 257)));
    REQUIRE(gauss2.pass);

    LogConcaveFn uneven;
    uneven.potential = sample_to_grid(
        spec, [](const Point& x) { return 0.5 * x[0] * x[0]; }, false);
    REQUIRE_THROWS_AS(check_santalo(uneven), std::invalid_argument);
}

TEST_CASE("unique determination diagnostics") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    const std::vector<LogConcaveFn> probes = {build_gaussian(spec, 2.0),
                                              build_power(spec, 3.0)};
    const MarginReport same = check_unique_determination(gauss, gauss, probes, 2.0);
    REQUIRE(same.pass);

    // grossly different masses: the precondition fails before any probing
    const MarginReport gap =
        check_unique_determination(gauss, build_indicator_box(spec, 1.0), probes, 2.0);
    REQUIRE_FALSE(gap.pass);
    REQUIRE(gap.witness.find("mass precondition failed") != std::string::npos);

    REQUIRE_THROWS_AS(check_unique_determination(gauss, gauss, {}, 2.0), std::invalid_argument);
}
