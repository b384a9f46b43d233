#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lcf/grid.hpp"
#include "lcf/variation.hpp"

using namespace lcf;

namespace {
constexpr double kSqrt2Pi = 2.5066282746310002;
}

TEST_CASE("richardson_limit recovers polynomial limits exactly") {
    const std::vector<double> ts = {0.1, 0.05, 0.025, 0.0125};
    std::vector<double> q;
    for (double t : ts) q.push_back(3.0 + 2.0 * t - 5.0 * t * t);  // L + a1 t + a2 t^2
    const RichardsonOutcome out = richardson_limit(ts, q);
    REQUIRE(std::fabs(out.value - 3.0) < 1e-12);
    REQUIRE_FALSE(out.diag.divergent);
    REQUIRE_FALSE(out.diag.noisy);
}

TEST_CASE("richardson_limit flags doubling quotients as divergent") {
    const std::vector<double> ts = {0.1, 0.05, 0.025, 0.0125};
    const std::vector<double> q = {1.0, 2.5, 6.0, 14.0};
    const RichardsonOutcome out = richardson_limit(ts, q);
    REQUIRE(out.diag.divergent);
    REQUIRE(out.value == kInf);
}

TEST_CASE("richardson_limit flags non-monotone noise") {
    const std::vector<double> ts = {0.1, 0.05, 0.025, 0.0125};
    const std::vector<double> q = {1.0, 3.0, 0.5, 2.0};
    const RichardsonOutcome out = richardson_limit(ts, q);
    REQUIRE(out.diag.noisy);
}

TEST_CASE("richardson_limit validates its schedule") {
    REQUIRE_THROWS_AS(richardson_limit({0.1, 0.05}, {1.0, 1.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(richardson_limit({0.05, 0.1, 0.2}, {1.0, 1.0, 1.0}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(richardson_limit({0.1, 0.05, 0.025}, {1.0, kInf, 1.0}),
                      std::invalid_argument);
}

TEST_CASE("first variation of the Gaussian against itself: closed curve in t") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn gauss = build_gaussian(spec);
    // J(f +_2 t ._2 f) = (1 + t)^{1/4} sqrt(2 pi), so the derivative at 0+ is
    // sqrt(2 pi) / 4
    const VariationResult num = delta_J_numeric(gauss, gauss, 2.0);
    REQUIRE(std::fabs(num.value - 0.25 * kSqrt2Pi) < 1e-3);
    REQUIRE_FALSE(num.diagnostics.divergent);

    const VariationResult self = delta_J_self_closed(gauss, 2.0);
    // (1/2) sqrt(2 pi) + (1/2)(-sqrt(2 pi)/2) = sqrt(2 pi)/4
    REQUIRE(std::fabs(self.value - 0.25 * kSqrt2Pi) < 1e-9);
    REQUIRE(std::fabs(num.value - self.value) <= 0.01 * std::fabs(self.value));
}

TEST_CASE("first variation of the indicator against itself, p = 3") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn box = build_indicator_box(spec, 1.0);
    // J = 2, integral f log f = 0: closed form gives (1/3) * 2
    const VariationResult self = delta_J_self_closed(box, 3.0);
    REQUIRE(std::fabs(self.value - 2.0 / 3.0) < 1e-12);
    const VariationResult num = delta_J_numeric(box, box, 3.0);
    REQUIRE(std::fabs(num.value - self.value) <= 0.01 * self.value);
}

TEST_CASE("integral-formula variation matches the closed form for Gaussian pairs") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn f = build_gaussian(spec);
    const LogConcaveFn g = build_gaussian(spec, 0.5);  // phi = x^2, conj = y^2/4
    // (1/p) int (y^2/4)^p (y^2/2)^{1-p} e^{-y^2/2} with y = grad phi(x) = x:
    // (1/2) 2^{-p} int (x^2/2) e^{-x^2/2} = 2^{-(p+1)} sqrt(2 pi) / p at p = 2
    const VariationResult via_integral = delta_J_integral(f, g, 2.0);
    const double expect = kSqrt2Pi / 16.0;
    REQUIRE(std::fabs(via_integral.value - expect) < 2e-3);

    const VariationResult num = delta_J_numeric(f, g, 2.0);
    REQUIRE(std::fabs(num.value - via_integral.value) <= 0.02 * std::fabs(num.value));
    REQUIRE(via_integral.diagnostics.cells_used > 0);

    // smoothness gate: indicators are not admissible inputs here
    const LogConcaveFn box = build_indicator_box(spec, 1.0);
    REQUIRE_THROWS_AS(delta_J_integral(f, box, 2.0), std::invalid_argument);
}

TEST_CASE("decomposition check ties the convex-combination curve to the sum curve") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn f = build_gaussian(spec);
    const LogConcaveFn g = build_gaussian(spec, 2.0);
    const MarginReport rep = delta_J_decomposition_check(f, g, 2.0);
    REQUIRE(rep.pass);

    const LogConcaveFn box1 = build_indicator_box(spec, 1.0);
    const LogConcaveFn box2 = build_indicator_box(spec, 2.0);
    const MarginReport boxes = delta_J_decomposition_check(box1, box2, 2.0, {}, 0, 0.05);
    REQUIRE(boxes.pass);
}

TEST_CASE("admissibility scan finds the expected witness constants") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn f = build_gaussian(spec);

    // f against itself: (phi^*)^p - c (phi^*)^p is convex exactly when c <= 1
    double c = -1.0;
    const MarginReport self_rep = check_admissible(f, f, 2.0, {1.0}, &c);
    REQUIRE(self_rep.pass);
    REQUIRE(c == 1.0);

    const MarginReport half = check_admissible(f, f, 2.0, {0.5}, &c);
    REQUIRE(half.pass);
    REQUIRE(c == 0.5);

    // ascending scan returns the first admissible entry
    const MarginReport pick = check_admissible(f, f, 2.0, {1.0, 0.25}, &c);
    REQUIRE(pick.pass);
    REQUIRE(c == 0.25);
    REQUIRE(pick.witness.find("0.25") != std::string::npos);

    // c > 1 flips the sign of the quadratic: no admissible entry
    const MarginReport fail = check_admissible(f, f, 2.0, {4.0}, &c);
    REQUIRE_FALSE(fail.pass);
    REQUIRE(fail.witness.find("no admissible c") != std::string::npos);

    REQUIRE_THROWS_AS(check_admissible(f, f, 2.0, {-1.0}), std::invalid_argument);
}

TEST_CASE("compatibility of the Gaussian: power route at alpha = 1/2, k1 = 2") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn f = build_gaussian(spec);
    CompatibilityDetail detail;
    const MarginReport rep = check_compatibility(f, 2.0, {0.5}, &detail);
    REQUIRE(rep.pass);
    REQUIRE(detail.power_route_pass);
    REQUIRE(detail.power_alpha == 0.5);
    // <grad, Hess^{-1} grad> = y^2 = 2 phi^*(y) for the Gaussian conjugate
    REQUIRE(detail.gradient_route_pass);
    REQUIRE(std::fabs(detail.gradient_k1 - 2.0) < 1e-6);
    REQUIRE(detail.nodes_masked_out > 0);  // the origin sits in the zero set
}

TEST_CASE("variation entry points validate their inputs") {
    const GridSpec spec = make_grid(1, 8.0, 513);
    const LogConcaveFn f = build_gaussian(spec);
    REQUIRE_THROWS_AS(delta_J_numeric(f, f, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(delta_J_self_closed(f, 0.5), std::invalid_argument);
    const LogConcaveFn other = build_gaussian(make_grid(1, 8.0, 129));
    REQUIRE_THROWS_AS(delta_J_numeric(f, other, 2.0), std::invalid_argument);
}
