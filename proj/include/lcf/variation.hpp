#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcf/asplund.hpp"
#include "lcf/functionals.hpp"
#include "lcf/grid.hpp"
#include "lcf/legendre.hpp"
#include "lcf/report.hpp"

namespace lcf {

enum class VariationMethod { FINITE_DIFFERENCE, CLOSED_FORM_SELF, INTEGRAL_FORMULA };

inline const char* to_string(VariationMethod m) {
    switch (m) {
        case VariationMethod::FINITE_DIFFERENCE: return "FINITE_DIFFERENCE";
        case VariationMethod::CLOSED_FORM_SELF: return "CLOSED_FORM_SELF";
        default: return "INTEGRAL_FORMULA";
    }
}

struct ExtrapolationDiagnostics {
    std::vector<double> quotients;     // raw difference quotients, t descending
    std::vector<double> extrapolants;  // second-order Richardson diagonal
    double error_estimate = 0.0;
    bool divergent = false;
    bool noisy = false;
    std::string note;
    // cell accounting, filled by the integral route only
    long cells_total = 0;
    long cells_used = 0;
    long cells_zeroed = 0;
    long cells_nonfinite = 0;
    long cells_skipped = 0;
};

struct VariationResult {
    double value = 0.0;
    VariationMethod method = VariationMethod::FINITE_DIFFERENCE;
    std::vector<double> t_schedule_used;
    ExtrapolationDiagnostics diagnostics;
};

inline std::vector<double> default_t_schedule() { return {0.1, 0.05, 0.025, 0.0125}; }

inline std::vector<double> default_c_grid() {
    std::vector<double> cs(32);
    for (int i = 0; i < 32; ++i) cs[i] = std::pow(10.0, -4.0 + 8.0 * i / 31.0);
    return cs;
}

inline std::vector<double> default_alpha_grid() {
    std::vector<double> as(20);
    for (int i = 0; i < 20; ++i) as[i] = i / 20.0;
    return as;
}

struct RichardsonOutcome {
    double value = 0.0;
    ExtrapolationDiagnostics diag;
};

// Second-order Richardson fold over a strictly decreasing positive schedule.
// Quotients d(t) = L + a1 t + a2 t^2 + ...: level one cancels a1 pairwise,
// level two cancels a2 through the products t_i t_{i+1}. A quotient sequence
// that at least doubles at every step is taken as evidence of divergence and
// reported as +inf; a finite schedule can only evidence that, not prove it.
inline RichardsonOutcome richardson_limit(const std::vector<double>& ts,
                                          const std::vector<double>& quotients) {
    if (ts.size() != quotients.size() || ts.size() < 3)
        throw std::invalid_argument("richardson_limit: need >= 3 schedule points");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] > 0.0) || !(ts[i] <= 1.0))
            throw std::invalid_argument("richardson_limit: schedule must lie in (0, 1]");
        if (i > 0 && !(ts[i] < ts[i - 1]))
            throw std::invalid_argument("richardson_limit: schedule must strictly decrease");
        if (!std::isfinite(quotients[i]))
            throw std::invalid_argument("richardson_limit: nonfinite difference quotient");
    }
    RichardsonOutcome out;
    out.diag.quotients = quotients;

    bool doubling = quotients.front() > 0.0;
    for (std::size_t i = 0; i + 1 < quotients.size() && doubling; ++i)
        doubling = quotients[i + 1] >= 2.0 * quotients[i];
    if (doubling) {
        out.value = kInf;
        out.diag.divergent = true;
        out.diag.note = "difference quotient at least doubles across the schedule";
        return out;
    }

    const std::size_t k = ts.size();
    std::vector<double> level1(k - 1), level2(k - 2);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const double r = ts[i] / ts[i + 1];
        level1[i] = (r * quotients[i + 1] - quotients[i]) / (r - 1.0);
    }
    for (std::size_t i = 0; i + 2 < k; ++i) {
        const double rho = (ts[i] * ts[i + 1]) / (ts[i + 1] * ts[i + 2]);
        level2[i] = (rho * level1[i + 1] - level1[i]) / (rho - 1.0);
    }
    out.value = level2.back();
    out.diag.extrapolants = level2;
    out.diag.error_estimate = std::fabs(level2.back() - level1.back());
    if (level2.size() >= 2)
        out.diag.error_estimate += std::fabs(level2.back() - level2[level2.size() - 2]);

    bool monotone_up = true, monotone_down = true;
    for (std::size_t i = 0; i + 1 < quotients.size(); ++i) {
        monotone_up = monotone_up && quotients[i + 1] >= quotients[i];
        monotone_down = monotone_down && quotients[i + 1] <= quotients[i];
    }
    if (!monotone_up && !monotone_down &&
        out.diag.error_estimate > 1e-4 * std::max(1.0, std::fabs(out.value))) {
        out.diag.noisy = true;
        out.diag.note = "grid too coarse: non-monotone quotients beyond the error model";
    }
    return out;
}

namespace detail {

inline GridSpec shared_dual_spec(const GridFunction& a, const GridFunction& b, int n_axis) {
    GridSpec da = auto_dual_spec(a, n_axis);
    const GridSpec db = auto_dual_spec(b, n_axis);
    for (int ax = 0; ax < da.dim; ++ax) {
        da.lo[ax] = std::min(da.lo[ax], db.lo[ax]);
        da.hi[ax] = std::max(da.hi[ax], db.hi[ax]);
    }
    return da;
}

// Evaluates t -> J(a ._p f (+)_p b ._p g) through one fixed pair of clamped
// conjugates, so every mass along a schedule shares the same discretization
// and systematic bias cancels in the difference quotients. 1D masses use the
// closed-form piecewise-linear conjugate mass (smooth in t); 2D conjugates
// back and integrates on the primal grid.
struct DualMassModel {
    GridSpec primal;
    GridSpec dual;
    GridFunction fc, gc;
    double p = 2.0;

    double mass(double a_coef, double b_coef) const {
        GridFunction combined;
        combined.spec = dual;
        combined.even = fc.even && gc.even;
        combined.values.resize(dual.size());
        for (std::size_t i = 0; i < combined.values.size(); ++i)
            combined.values[i] = std::pow(
                a_coef * pow_ext(fc.values[i], p) + b_coef * pow_ext(gc.values[i], p), 1.0 / p);
        if (primal.dim == 1) return pl_conjugate_mass(combined);
        return total_mass(conjugate_fast(combined, primal));
    }
};

inline DualMassModel make_dual_mass_model(const LogConcaveFn& f, const LogConcaveFn& g, double p,
                                          int dual_n_axis) {
    if (!(f.potential.spec == g.potential.spec))
        throw std::invalid_argument("variation: operands must share a grid");
    DualMassModel model;
    model.primal = f.potential.spec;
    model.p = p;
    int dn = dual_n_axis;
    if (dn == 0 && model.primal.dim == 1)
        dn = std::max(4 * (model.primal.n_axis - 1) + 1, 8193);
    model.dual = shared_dual_spec(f.potential, g.potential, dn);
    model.fc = conjugate_fast(f.potential, model.dual);
    model.gc = conjugate_fast(g.potential, model.dual);
    require_a0_normalized(model.fc, "variation");
    require_a0_normalized(model.gc, "variation");
    for (double& v : model.fc.values) v = std::max(v, 0.0);
    for (double& v : model.gc.values) v = std::max(v, 0.0);
    return model;
}

inline std::vector<double> checked_schedule(std::vector<double> schedule) {
    if (schedule.empty()) schedule = default_t_schedule();
    std::sort(schedule.begin(), schedule.end(), std::greater<>());
    return schedule;
}

}  // namespace detail

// Difference quotients of t -> J(f (+)_p t ._p g) extrapolated to t -> 0+.
// The baseline J(f) is evaluated through the same dual-side model as the
// perturbed masses, never through an independent quadrature.
inline VariationResult delta_J_numeric(const LogConcaveFn& f, const LogConcaveFn& g, double p,
                                       std::vector<double> t_schedule = {}, int dual_n_axis = 0) {
    if (!(p > 1.0)) throw std::invalid_argument("delta_J_numeric: p > 1 required");
    const auto model = detail::make_dual_mass_model(f, g, p, dual_n_axis);
    const double base = model.mass(1.0, 0.0);
    if (!(base > 0.0) || !std::isfinite(base))
        throw std::domain_error("delta_J_numeric: J(f) not positive");
    VariationResult out;
    out.method = VariationMethod::FINITE_DIFFERENCE;
    out.t_schedule_used = detail::checked_schedule(std::move(t_schedule));
    std::vector<double> quotients;
    quotients.reserve(out.t_schedule_used.size());
    for (double t : out.t_schedule_used) quotients.push_back((model.mass(1.0, t) - base) / t);
    auto ex = richardson_limit(out.t_schedule_used, quotients);
    out.value = ex.value;
    out.diagnostics = std::move(ex.diag);
    return out;
}

// (n/p) J(f) + (1/p) integral of f log f.
inline VariationResult delta_J_self_closed(const LogConcaveFn& f, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("delta_J_self_closed: p > 1 required");
    const double mass = total_mass(f);
    if (!(mass > 0.0)) throw std::domain_error("delta_J_self_closed: J(f) not positive");
    VariationResult out;
    out.method = VariationMethod::CLOSED_FORM_SELF;
    out.value = (f.potential.spec.dim / p) * mass + integral_f_log_f(f.potential) / p;
    return out;
}

// (1/p) integral of (psi^*(grad phi))^p (phi^*(grad phi))^{1-p} e^{-phi} dx
// over cell centers. Both conjugates live on phi's dual grid, which covers the
// observed gradient range. Cells where phi^* is below the Omega cutoff while
// psi^* vanishes contribute zero; a nonfinite integrand elsewhere is counted
// and, past 0.1% of cells, fatal.
inline VariationResult delta_J_integral(const LogConcaveFn& f, const LogConcaveFn& g, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("delta_J_integral: p > 1 required");
    if (f.tag != ClassTag::CLASS_A0_PRIME || g.tag != ClassTag::CLASS_A0_PRIME)
        throw std::invalid_argument("delta_J_integral: smooth-class inputs required");
    if (!(f.potential.spec == g.potential.spec))
        throw std::invalid_argument("delta_J_integral: operands must share a grid");
    const GridSpec dual = auto_dual_spec(f.potential);
    const GridFunction conj_f = conjugate_fast(f.potential, dual);
    const GridFunction conj_g = conjugate_fast(g.potential, dual);
    double conj_max = 0.0;
    for (double v : conj_f.values) conj_max = std::max(conj_max, v);
    const double eps_omega = kOmegaCutRel * conj_max;

    VariationResult out;
    out.method = VariationMethod::INTEGRAL_FORMULA;
    auto& diag = out.diagnostics;
    double acc = 0.0;
    detail::for_each_cell_center(f.potential.spec, [&](const Point& c, double vol) {
        ++diag.cells_total;
        const double pv = eval(f.potential, c);
        if (pv == kInf) {
            ++diag.cells_skipped;
            return;
        }
        const auto grad = try_gradient(f.potential, c);
        if (!grad) {
            ++diag.cells_skipped;
            return;
        }
        const double a = eval(conj_f, *grad);
        const double b = eval(conj_g, *grad);
        if (a <= eps_omega && b == 0.0) {
            ++diag.cells_zeroed;
            return;
        }
        const double term = pow_ext(b, p) * std::pow(a, 1.0 - p) * std::exp(-pv) * vol;
        if (!std::isfinite(term)) {
            ++diag.cells_nonfinite;
            return;
        }
        ++diag.cells_used;
        acc += term;
    });
    if (diag.cells_nonfinite * 1000 > diag.cells_total)
        throw std::runtime_error(
            "delta_J_integral: integrand nonfinite on " + std::to_string(diag.cells_nonfinite) +
            " of " + std::to_string(diag.cells_total) + " cells; Omega cutoff too coarse");
    out.value = acc / p;
    diag.note = "eps_omega = " + std::to_string(eps_omega);
    return out;
}

// Checks that d/dt J((1-t) ._p f (+)_p t ._p g) at 0+ agrees with
// delta_J_numeric(f, g) - delta_J_self_closed(f). Relative discrepancy with a
// mass-scaled floor so the f = g case (both sides near zero) is judged
// against J(f), not against itself.
inline MarginReport delta_J_decomposition_check(const LogConcaveFn& f, const LogConcaveFn& g,
                                                double p, std::vector<double> t_schedule = {},
                                                int dual_n_axis = 0, double tol = 0.03) {
    if (!(p > 1.0))
        throw std::invalid_argument("delta_J_decomposition_check: p > 1 required");
    const auto model = detail::make_dual_mass_model(f, g, p, dual_n_axis);
    const double base = model.mass(1.0, 0.0);
    if (!(base > 0.0) || !std::isfinite(base))
        throw std::domain_error("delta_J_decomposition_check: J(f) not positive");
    const auto schedule = detail::checked_schedule(std::move(t_schedule));

    std::vector<double> convex_q, sum_q;
    for (double t : schedule) {
        convex_q.push_back((model.mass(1.0 - t, t) - base) / t);
        sum_q.push_back((model.mass(1.0, t) - base) / t);
    }
    const auto left = richardson_limit(schedule, convex_q);
    const auto sum_side = richardson_limit(schedule, sum_q);
    const double self = delta_J_self_closed(f, p).value;

    if (left.diag.divergent || sum_side.diag.divergent) {
        const bool both = left.diag.divergent && sum_side.diag.divergent;
        return make_margin_report("delta_J_decomposition_check", left.value,
                                  sum_side.value - self, both ? 0.0 : -kInf, tol, 1e-3,
                                  both ? "both sides divergent" : "one side divergent");
    }
    const double right = sum_side.value - self;
    const double denom =
        std::max({std::fabs(left.value), std::fabs(right), 0.05 * std::max(1.0, base)});
    const double rel = std::fabs(left.value - right) / denom;
    return make_margin_report("delta_J_decomposition_check", left.value, right, -rel, tol, 1e-3,
                              "relative discrepancy " + std::to_string(rel));
}

// Searches c_grid (ascending) for a c > 0 making (phi^*)^p - c (psi^*)^p
// discretely convex. Beyond a function's largest observed slope its discrete
// conjugate continues linearly, a truncation artifact of the primal box
// rather than a property of the pair, so the convexity probe stays on the
// intersection of the two faithful slope ranges.
inline MarginReport check_admissible(const LogConcaveFn& f, const LogConcaveFn& g, double p,
                                     std::vector<double> c_grid = {},
                                     double* c_witness = nullptr, double tol = 1e-7) {
    if (!(p > 1.0)) throw std::invalid_argument("check_admissible: p > 1 required");
    if (!(f.potential.spec == g.potential.spec))
        throw std::invalid_argument("check_admissible: operands must share a grid");
    if (c_grid.empty()) c_grid = default_c_grid();
    std::sort(c_grid.begin(), c_grid.end());
    for (double c : c_grid)
        if (!(c > 0.0)) throw std::invalid_argument("check_admissible: c > 0 required");

    const GridSpec df = auto_dual_spec(f.potential);
    const GridSpec dg = auto_dual_spec(g.potential);
    GridSpec dual = df;
    for (int axis = 0; axis < dual.dim; ++axis) {
        dual.hi[axis] = std::min(df.hi[axis], dg.hi[axis]);
        dual.lo[axis] = -dual.hi[axis];
    }
    GridFunction fc = conjugate_fast(f.potential, dual);
    GridFunction gc = conjugate_fast(g.potential, dual);
    detail::require_a0_normalized(fc, "check_admissible");
    detail::require_a0_normalized(gc, "check_admissible");
    for (double& v : fc.values) v = std::max(v, 0.0);
    for (double& v : gc.values) v = std::max(v, 0.0);

    GridFunction diff;
    diff.spec = dual;
    diff.even = fc.even && gc.even;
    diff.values.resize(dual.size());
    double best_margin = -kInf, best_c = c_grid.front();
    for (double c : c_grid) {
        for (std::size_t i = 0; i < diff.values.size(); ++i)
            diff.values[i] = pow_ext(fc.values[i], p) - c * pow_ext(gc.values[i], p);
        const MarginReport conv = check_convex(diff, tol);
        if (conv.margin > best_margin) {
            best_margin = conv.margin;
            best_c = c;
        }
        if (conv.pass) {
            if (c_witness) *c_witness = c;
            return make_margin_report("check_admissible", conv.margin, 0.0, conv.margin, tol,
                                      1e-12, "admissible with c = " + std::to_string(c));
        }
    }
    if (c_witness) *c_witness = best_c;
    return make_margin_report("check_admissible", best_margin, 0.0, best_margin, tol, 1e-12,
                              "no admissible c in grid; best margin at c = " +
                                  std::to_string(best_c));
}

struct CompatibilityDetail {
    bool power_route_pass = false;
    double power_alpha = -1.0;
    double power_margin = -kInf;
    bool gradient_route_pass = false;
    double gradient_k1 = kInf;
    bool det_route_pass = false;
    double det_k = kInf;
    long nodes_masked_out = 0;
    std::string note;
};

namespace detail {

// Dual grid for the Hessian-based compatibility routes: primal lattice nodes
// clipped to the observed slope range. Second differences are phase-sensitive,
// and on an incommensurate dual grid the piecewise-linear conjugate of even a
// quadratic potential carries percent-level curvature wobble; on the primal
// lattice such conjugates are node-exact. Inputs whose slope range does not
// span a few lattice steps (steep or flat) keep the generic dual.
inline GridSpec compat_dual_spec(const GridFunction& phi) {
    if (has_infinite_node(phi)) return auto_dual_spec(phi);
    const auto slope = max_observed_slope(phi);
    int k = std::numeric_limits<int>::max();
    for (int a = 0; a < phi.spec.dim; ++a)
        k = std::min(k, static_cast<int>(std::floor(slope[a] / phi.spec.spacing(a))));
    if (k < 2) return auto_dual_spec(phi);
    GridSpec dual = phi.spec;
    dual.n_axis = 2 * k + 1;
    for (int a = 0; a < phi.spec.dim; ++a) {
        dual.hi[a] = k * phi.spec.spacing(a);
        dual.lo[a] = -dual.hi[a];
    }
    dual.validate();
    return dual;
}

// Min directional second difference over triples of consecutive unmasked
// nodes. No domain-gap rule here: the mask legitimately punctures the grid.
inline double masked_min_second_diff(const std::vector<double>& vals,
                                     const std::vector<char>& usable, const GridSpec& spec) {
    double worst = kInf;
    const int n = spec.n_axis;
    auto visit = [&](std::size_t a, std::size_t b, std::size_t c) {
        if (!usable[a] || !usable[b] || !usable[c]) return;
        worst = std::min(worst, vals[a] - 2.0 * vals[b] + vals[c]);
    };
    if (spec.dim == 1) {
        for (int i = 1; i + 1 < n; ++i) visit(i - 1, i, i + 1);
        return worst == kInf ? 0.0 : worst;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 1; j + 1 < n; ++j) {
            visit(spec.index(i, j - 1), spec.index(i, j), spec.index(i, j + 1));
            visit(spec.index(j - 1, i), spec.index(j, i), spec.index(j + 1, i));
        }
    for (int i = 1; i + 1 < n; ++i)
        for (int j = 1; j + 1 < n; ++j) {
            visit(spec.index(i - 1, j - 1), spec.index(i, j), spec.index(i + 1, j + 1));
            visit(spec.index(i - 1, j + 1), spec.index(i, j), spec.index(i + 1, j - 1));
        }
    return worst == kInf ? 0.0 : worst;
}

struct HessianSample {
    double value = 0.0;  // conjugate value at the node
    double g0 = 0.0, g1 = 0.0;
    double h00 = 0.0, h01 = 0.0, h11 = 0.0;
};

// Central differences at interior unmasked nodes; the stencil may reach into
// the masked zero set, whose values are still valid data.
template <typename Fn>
void for_each_hessian_sample(const GridFunction& conj, const std::vector<char>& usable, Fn&& fn) {
    const auto& spec = conj.spec;
    const int n = spec.n_axis;
    if (spec.dim == 1) {
        const double h = spec.spacing(0);
        for (int i = 1; i + 1 < n; ++i) {
            if (!usable[static_cast<std::size_t>(i)]) continue;
            HessianSample s;
            s.value = conj.at(i);
            s.g0 = (conj.at(i + 1) - conj.at(i - 1)) / (2.0 * h);
            s.h00 = (conj.at(i + 1) - 2.0 * conj.at(i) + conj.at(i - 1)) / (h * h);
            fn(s);
        }
        return;
    }
    const double h0 = spec.spacing(0), h1 = spec.spacing(1);
    for (int i = 1; i + 1 < n; ++i)
        for (int j = 1; j + 1 < n; ++j) {
            if (!usable[spec.index(i, j)]) continue;
            HessianSample s;
            s.value = conj.at(i, j);
            s.g0 = (conj.at(i + 1, j) - conj.at(i - 1, j)) / (2.0 * h0);
            s.g1 = (conj.at(i, j + 1) - conj.at(i, j - 1)) / (2.0 * h1);
            s.h00 = (conj.at(i + 1, j) - 2.0 * conj.at(i, j) + conj.at(i - 1, j)) / (h0 * h0);
            s.h11 = (conj.at(i, j + 1) - 2.0 * conj.at(i, j) + conj.at(i, j - 1)) / (h1 * h1);
            s.h01 = (conj.at(i + 1, j + 1) - conj.at(i + 1, j - 1) - conj.at(i - 1, j + 1) +
                     conj.at(i - 1, j - 1)) /
                    (4.0 * h0 * h1);
            fn(s);
        }
}

}  // namespace detail

// Compatibility of phi^* in the sense required for the integral formula,
// established through any of three routes on the zero-set-punctured dual grid:
// convexity of (phi^*)^alpha / alpha (log phi^* at alpha = 0), the quadratic
// form bound <grad, Hess^{-1} grad> <= k1 phi^*, or the direct determinant
// ratio det Hess((phi^*)^p) <= k (phi^*)^{n(p-1)} det Hess(phi^*).
inline MarginReport check_compatibility(const LogConcaveFn& f, double p,
                                        std::vector<double> alpha_grid = {},
                                        CompatibilityDetail* detail_out = nullptr,
                                        double tol = 1e-7) {
    if (!(p > 1.0)) throw std::invalid_argument("check_compatibility: p > 1 required");
    if (alpha_grid.empty()) alpha_grid = default_alpha_grid();
    std::sort(alpha_grid.begin(), alpha_grid.end());
    for (double a : alpha_grid)
        if (!(a >= 0.0) || !(a < 1.0))
            throw std::invalid_argument("check_compatibility: alpha in [0, 1) required");

    const GridSpec dual = detail::compat_dual_spec(f.potential);
    GridFunction conj = conjugate_fast(f.potential, dual);
    detail::require_a0_normalized(conj, "check_compatibility");
    for (double& v : conj.values) v = std::max(v, 0.0);
    double conj_max = 0.0;
    for (double v : conj.values) conj_max = std::max(conj_max, v);
    const double eps_omega = kOmegaCutRel * conj_max;

    CompatibilityDetail det;
    std::vector<char> usable(conj.values.size());
    for (std::size_t i = 0; i < usable.size(); ++i) {
        usable[i] = conj.values[i] > eps_omega ? 1 : 0;
        if (!usable[i]) ++det.nodes_masked_out;
    }

    std::vector<double> work(conj.values.size(), 0.0);
    for (double alpha : alpha_grid) {
        for (std::size_t i = 0; i < work.size(); ++i) {
            if (!usable[i]) continue;
            work[i] = alpha == 0.0 ? std::log(conj.values[i])
                                   : std::pow(conj.values[i], alpha) / alpha;
        }
        const double margin = detail::masked_min_second_diff(work, usable, dual);
        if (margin > det.power_margin) det.power_margin = margin;
        if (margin >= -tol) {
            det.power_route_pass = true;
            det.power_alpha = alpha;
            det.power_margin = margin;
            break;
        }
    }

    constexpr double kCurvatureFloor = 1e-8;
    bool grad_ok = true, det_ok = true;
    double k1 = 0.0, kd = 0.0;
    std::vector<double> powered(conj.values.size(), 0.0);
    for (std::size_t i = 0; i < powered.size(); ++i) powered[i] = pow_ext(conj.values[i], p);
    GridFunction powered_fn;
    powered_fn.spec = dual;
    powered_fn.even = conj.even;
    powered_fn.values = powered;

    const int dim = dual.dim;
    std::vector<detail::HessianSample> base_samples, pow_samples;
    detail::for_each_hessian_sample(conj, usable,
                                    [&](const detail::HessianSample& s) { base_samples.push_back(s); });
    detail::for_each_hessian_sample(powered_fn, usable,
                                    [&](const detail::HessianSample& s) { pow_samples.push_back(s); });
    for (std::size_t i = 0; i < base_samples.size(); ++i) {
        const auto& s = base_samples[i];
        const double hdet = dim == 1 ? s.h00 : s.h00 * s.h11 - s.h01 * s.h01;
        if (s.h00 <= kCurvatureFloor || hdet <= kCurvatureFloor) {
            grad_ok = det_ok = false;
            det.note = "flat conjugate Hessian: determinant ratio undefined";
            break;
        }
        const double quad = dim == 1 ? s.g0 * s.g0 / s.h00
                                     : (s.g0 * s.g0 * s.h11 - 2.0 * s.g0 * s.g1 * s.h01 +
                                        s.g1 * s.g1 * s.h00) /
                                           hdet;
        k1 = std::max(k1, quad / s.value);
        const auto& w = pow_samples[i];
        const double wdet = dim == 1 ? w.h00 : w.h00 * w.h11 - w.h01 * w.h01;
        kd = std::max(kd, wdet / (std::pow(s.value, dim * (p - 1.0)) * hdet));
    }
    if (base_samples.empty()) grad_ok = det_ok = false;
    det.gradient_route_pass = grad_ok;
    det.gradient_k1 = grad_ok ? k1 : kInf;
    det.det_route_pass = det_ok && std::isfinite(kd);
    det.det_k = det.det_route_pass ? kd : kInf;

    MarginReport report;
    if (det.power_route_pass) {
        report = make_margin_report("check_compatibility", det.power_margin, 0.0,
                                    det.power_margin, tol, 1e-12,
                                    "power route alpha = " + std::to_string(det.power_alpha));
    } else if (det.gradient_route_pass) {
        report = make_margin_report("check_compatibility", det.gradient_k1, 0.0, 0.0, tol, 1e-12,
                                    "gradient route k1 = " + std::to_string(det.gradient_k1));
    } else if (det.det_route_pass) {
        report = make_margin_report("check_compatibility", det.det_k, 0.0, 0.0, tol, 1e-12,
                                    "determinant route k = " + std::to_string(det.det_k));
    } else {
        report = make_margin_report(
            "check_compatibility", det.power_margin, 0.0,
            det.power_margin == -kInf ? -kInf : std::min(det.power_margin, -tol * 2.0), tol,
            1e-12, det.note.empty() ? "no route passed" : det.note);
    }
    if (detail_out) *detail_out = det;
    return report;
}

}  // namespace lcf
