#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcf/asplund.hpp"
#include "lcf/functionals.hpp"
#include "lcf/grid.hpp"
#include "lcf/report.hpp"
#include "lcf/variation.hpp"

namespace lcf {

namespace detail {

inline double node_sup_distance(const GridFunction& a, const GridFunction& b) {
    double sup = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double va = a.values[i], vb = b.values[i];
        if (va == kInf && vb == kInf) continue;
        if (va == kInf || vb == kInf) return kInf;
        sup = std::max(sup, std::fabs(va - vb));
    }
    return sup;
}

}  // namespace detail

// J((1-lambda) ._p f (+)_p lambda ._p g) >= J(f)^{1-lambda} J(g)^lambda.
// When equality is detected the witness carries the node-wise sup distance of
// the potentials as corroboration; closeness is reported, never asserted.
inline MarginReport check_prekopa_leindler(const LogConcaveFn& f, const LogConcaveFn& g,
                                           double lambda, double p, double tol = 1e-6) {
    if (!(lambda > 0.0) || !(lambda < 1.0))
        throw std::invalid_argument("check_prekopa_leindler: lambda in (0,1) required");
    const auto sum = p_sum(f, g, 1.0 - lambda, lambda, p);
    const double lhs = total_mass(sum.result);
    const double rhs =
        std::pow(total_mass(f), 1.0 - lambda) * std::pow(total_mass(g), lambda);
    const double margin = lhs - rhs;
    MarginReport rep = make_margin_report("check_prekopa_leindler", lhs, rhs, margin, tol, 1e-3,
                                          "lambda = " + std::to_string(lambda));
    if (rep.equality_detected)
        rep.witness += "; node sup distance of potentials = " +
                       std::to_string(detail::node_sup_distance(f.potential, g.potential));
    return rep;
}

// Midpoint concavity of t -> log J(f (+)_p t ._p g) over consecutive triples
// of t_grid, and of t -> log J((1-t) ._p f (+)_p t ._p g) over the triples
// falling inside (0,1). All masses run through one shared conjugate pair.
inline MarginReport check_t_logconcavity(const LogConcaveFn& f, const LogConcaveFn& g, double p,
                                         std::vector<double> t_grid, double tol = 1e-6) {
    if (t_grid.size() < 3)
        throw std::invalid_argument("check_t_logconcavity: need >= 3 grid points");
    std::sort(t_grid.begin(), t_grid.end());
    for (double t : t_grid)
        if (!(t > 0.0)) throw std::invalid_argument("check_t_logconcavity: t > 0 required");
    const auto model = detail::make_dual_mass_model(f, g, p, 0);

    double worst = kInf;
    std::string where = "no triple";
    int sum_triples = 0, interp_triples = 0;
    auto fold_curve = [&](const std::vector<double>& ts, const std::vector<double>& logs,
                          const char* curve, int& count) {
        for (std::size_t k = 0; k + 2 < ts.size(); ++k) {
            const double chord = logs[k] + (logs[k + 2] - logs[k]) * (ts[k + 1] - ts[k]) /
                                              (ts[k + 2] - ts[k]);
            const double m = logs[k + 1] - chord;
            ++count;
            if (m < worst) {
                worst = m;
                where = std::string(curve) + " triple at t = " + std::to_string(ts[k + 1]);
            }
        }
    };

    std::vector<double> logs;
    logs.reserve(t_grid.size());
    for (double t : t_grid) logs.push_back(std::log(model.mass(1.0, t)));
    fold_curve(t_grid, logs, "sum curve", sum_triples);

    std::vector<double> interp_ts, interp_logs;
    for (double t : t_grid)
        if (t < 1.0) {
            interp_ts.push_back(t);
            interp_logs.push_back(std::log(model.mass(1.0 - t, t)));
        }
    if (interp_ts.size() >= 3)
        fold_curve(interp_ts, interp_logs, "interpolation curve", interp_triples);

    if (worst == kInf) worst = 0.0;
    return make_margin_report(
        "check_t_logconcavity", worst, 0.0, worst, tol, 1e-12,
        "sum-curve triples: " + std::to_string(sum_triples) +
            "; interpolation-curve triples: " + std::to_string(interp_triples) + "; worst " +
            where);
}

// delta_J_p(f,g) >= J(f)[n/p + ((1-p)/p) log J(f) + log J(g)] + Ent(f)/p.
// A divergent left side passes outright.
inline MarginReport check_minkowski_type(const LogConcaveFn& f, const LogConcaveFn& g, double p,
                                         double tol = 1e-6) {
    const auto left = delta_J_numeric(f, g, p);
    const double mass_f = total_mass(f);
    const double mass_g = total_mass(g);
    if (!(mass_f > 0.0) || !(mass_g > 0.0))
        throw std::domain_error("check_minkowski_type: zero total mass");
    const double dim = f.potential.spec.dim;
    const double rhs = mass_f * (dim / p + ((1.0 - p) / p) * std::log(mass_f) +
                                 std::log(mass_g)) +
                       entropy(f) / p;
    if (left.value == kInf)
        return make_margin_report("check_minkowski_type", kInf, rhs, kInf, tol, 1e-3,
                                  "divergent first variation");
    const double margin = left.value - rhs;
    MarginReport rep =
        make_margin_report("check_minkowski_type", left.value, rhs, margin, tol, 1e-3, "");
    rep.witness = "first variation by " + std::string(to_string(left.method));
    if (rep.equality_detected)
        rep.witness += "; node sup distance of potentials = " +
                       std::to_string(detail::node_sup_distance(f.potential, g.potential));
    return rep;
}

// J(e^{-phi}) J(e^{-phi^*}) <= (2 pi)^n for even inputs; only the upper bound
// is asserted. The margin is relative to (2 pi)^n; the product itself sits in
// the report for lower-sandwich diagnostics.
inline MarginReport check_santalo(const LogConcaveFn& f, double tol = 1e-3) {
    f.potential.validate();
    if (!f.potential.even)
        throw std::invalid_argument("check_santalo: even input required");
    const double mass = total_mass(f);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw std::domain_error("check_santalo: J(f) outside (0, inf)");
    double dual_mass;
    if (f.potential.spec.dim == 1) {
        dual_mass = pl_conjugate_mass(f.potential);
    } else {
        const GridSpec dual = auto_dual_spec(f.potential);
        dual_mass = total_mass(conjugate_fast(f.potential, dual));
    }
    const double upper = std::pow(2.0 * 3.14159265358979323846, f.potential.spec.dim);
    const double product = mass * dual_mass;
    const double margin = (upper - product) / upper;
    return make_margin_report("check_santalo", product, upper, margin, tol, 1e-3,
                              "product = " + std::to_string(product) +
                                  ", dual mass = " + std::to_string(dual_mass));
}

// Diagnostic for unique determination: equal masses plus equal first
// variations against every probe should only happen for identical inputs. The
// testable direction is f1 = f2 implying zero discrepancies; the converse is
// observed through the probe battery, not asserted.
inline MarginReport check_unique_determination(const LogConcaveFn& f1, const LogConcaveFn& f2,
                                               const std::vector<LogConcaveFn>& probes, double p,
                                               double tol = 0.02) {
    if (probes.empty())
        throw std::invalid_argument("check_unique_determination: no probes");
    const double mass1 = total_mass(f1);
    const double mass2 = total_mass(f2);
    if (!(mass1 > 0.0) || !(mass2 > 0.0))
        throw std::domain_error("check_unique_determination: zero total mass");
    const double mass_gap = std::fabs(mass1 - mass2) / std::max(mass1, mass2);
    if (mass_gap > 0.01)
        return make_margin_report("check_unique_determination", mass1, mass2, -kInf, tol, 1e-12,
                                  "mass precondition failed: relative gap " +
                                      std::to_string(mass_gap));
    double worst = 0.0;
    std::size_t worst_probe = 0;
    const double floor = 0.05 * std::max(1.0, mass1);
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double d1 = delta_J_numeric(f1, probes[i], p).value;
        const double d2 = delta_J_numeric(f2, probes[i], p).value;
        double disc;
        if (d1 == kInf && d2 == kInf) {
            disc = 0.0;
        } else if (d1 == kInf || d2 == kInf) {
            disc = kInf;
        } else {
            disc = std::fabs(d1 - d2) / std::max({std::fabs(d1), std::fabs(d2), floor});
        }
        if (disc > worst) {
            worst = disc;
            worst_probe = i;
        }
    }
    return make_margin_report("check_unique_determination", worst, 0.0, -worst, tol, 1e-12,
                              "worst probe index " + std::to_string(worst_probe));
}

}  // namespace lcf
