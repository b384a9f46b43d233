#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lcf/grid.hpp"
#include "lcf/legendre.hpp"
#include "lcf/report.hpp"

namespace lcf {

// Coefficients below this are degenerate for the dual-side combine and are
// rejected rather than silently flushed.
inline constexpr double kCoefficientFloor = 1e-12;

inline double pow_ext(double v, double p) {
    if (v == kInf) return kInf;
    if (v == 0.0) return 0.0;
    return std::pow(v, p);
}

namespace detail {

inline ClassTag combined_tag(ClassTag a, ClassTag b) {
    // The class A0 is closed under p-scaling and p-sums; smoothness is not.
    auto rank = [](ClassTag t) {
        switch (t) {
            case ClassTag::GENERAL: return 0;
            case ClassTag::CLASS_A: return 1;
            default: return 2;
        }
    };
    const int r = std::min(rank(a), rank(b));
    return r == 2 ? ClassTag::CLASS_A0 : (r == 1 ? ClassTag::CLASS_A : ClassTag::GENERAL);
}

inline void require_a0_normalized(const GridFunction& conj, const char* who) {
    double mn = kInf;
    for (double v : conj.values) mn = std::min(mn, v);
    if (mn < -1e-9)
        throw std::invalid_argument(std::string(who) +
                                    ": conjugate dips below 0; input not normalized (phi(o)=0)");
}

}  // namespace detail

// (phi ._p alpha)(x) = alpha^{1/p} phi(alpha^{-1/p} x), re-sampled on the same
// grid through eval. Lattice-aligned arguments hit nodes exactly.
inline LogConcaveFn p_scale(const LogConcaveFn& f, double alpha, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("p_scale: p >= 1 required");
    if (!(alpha >= kCoefficientFloor))
        throw std::invalid_argument("p_scale: alpha below coefficient floor");
    const double a_out = std::pow(alpha, 1.0 / p);
    const double a_in = std::pow(alpha, -1.0 / p);
    auto g = sample_to_grid(
        f.potential.spec,
        [&](const Point& x) {
            const double v = eval(f.potential, Point{a_in * x[0], a_in * x[1]});
            return v == kInf ? kInf : a_out * v;
        },
        f.potential.even);
    return {std::move(g), f.tag};
}

struct PSumResult {
    LogConcaveFn result;
    GridFunction combined_dual;  // [alpha (phi^*)^p + beta (psi^*)^p]^{1/p} on the dual grid
    GridSpec dual_spec;
    MarginReport combined_convexity;
};

// Lp Asplund sum alpha ._p f (+)_p beta ._p g, evaluated dual-side only:
// conjugate both potentials on a shared dual grid, p-combine, conjugate back.
// The primal-side infimal formula is never used here; inf_convolution exists
// as the independent p = 1 route.
inline PSumResult p_sum(const LogConcaveFn& f, const LogConcaveFn& g, double alpha, double beta,
                        double p, int dual_n_axis = 0, const GridSpec* dual_override = nullptr) {
    if (!(p >= 1.0)) throw std::invalid_argument("p_sum: p >= 1 required");
    if (!(alpha >= kCoefficientFloor) || !(beta >= kCoefficientFloor))
        throw std::invalid_argument("p_sum: coefficient below floor");
    if (!(f.potential.spec == g.potential.spec))
        throw std::invalid_argument("p_sum: operands must share a grid");
    GridSpec dual;
    if (dual_override) {
        dual = *dual_override;
    } else {
        const GridSpec df = auto_dual_spec(f.potential, dual_n_axis);
        const GridSpec dg = auto_dual_spec(g.potential, dual_n_axis);
        dual = df;
        for (int a = 0; a < dual.dim; ++a) {
            dual.lo[a] = std::min(df.lo[a], dg.lo[a]);
            dual.hi[a] = std::max(df.hi[a], dg.hi[a]);
        }
    }
    GridFunction fc = conjugate_fast(f.potential, dual);
    GridFunction gc = conjugate_fast(g.potential, dual);
    detail::require_a0_normalized(fc, "p_sum");
    detail::require_a0_normalized(gc, "p_sum");

    GridFunction combined;
    combined.spec = dual;
    combined.even = fc.even && gc.even;
    combined.values.resize(dual.size());
    for (std::size_t i = 0; i < combined.values.size(); ++i) {
        const double a = std::max(fc.values[i], 0.0);
        const double b = std::max(gc.values[i], 0.0);
        combined.values[i] = std::pow(alpha * pow_ext(a, p) + beta * pow_ext(b, p), 1.0 / p);
    }

    PSumResult out;
    out.dual_spec = dual;
    out.combined_convexity = check_convex(combined, 1e-7);
    out.result.potential = conjugate_fast(combined, f.potential.spec);
    out.result.potential.even = f.potential.even && g.potential.even;
    out.result.tag = detail::combined_tag(f.tag, g.tag);
    out.combined_dual = std::move(combined);
    return out;
}

// Exhaustive infimal convolution over node pairs: the p = 1 Asplund sum,
// computed primal-side as an independent cross-check of the dual route.
inline LogConcaveFn inf_convolution(const LogConcaveFn& f, const LogConcaveFn& g) {
    if (!(f.potential.spec == g.potential.spec))
        throw std::invalid_argument("inf_convolution: operands must share a grid");
    const auto& spec = f.potential.spec;
    GridFunction out;
    out.spec = spec;
    out.even = f.potential.even && g.potential.even;
    out.values.assign(spec.size(), kInf);
    const int n = spec.n_axis;
    auto relax = [&](std::size_t at, const Point& x, const Point& y, double psi_v) {
        const double phi_v = eval(f.potential, Point{x[0] - y[0], x[1] - y[1]});
        if (phi_v == kInf) return;
        const double cand = phi_v + psi_v;
        if (cand < out.values[at]) out.values[at] = cand;
    };
    if (spec.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const Point x = spec.node(i);
            for (int j = 0; j < n; ++j) {
                const double psi_v = g.potential.at(j);
                if (psi_v == kInf) continue;
                relax(spec.index(i), x, spec.node(j), psi_v);
            }
        }
    } else {
        for (int i0 = 0; i0 < n; ++i0)
            for (int i1 = 0; i1 < n; ++i1) {
                const Point x = spec.node(i0, i1);
                for (int j0 = 0; j0 < n; ++j0)
                    for (int j1 = 0; j1 < n; ++j1) {
                        const double psi_v = g.potential.at(j0, j1);
                        if (psi_v == kInf) continue;
                        relax(spec.index(i0, i1), x, spec.node(j0, j1), psi_v);
                    }
            }
    }
    LogConcaveFn r{std::move(out), detail::combined_tag(f.tag, g.tag)};
    return r;
}

struct MonotoneFamilyResult {
    std::vector<LogConcaveFn> members;  // f (+)_p t ._p g for each t
    MarginReport monotonicity;          // potentials nonincreasing in t, node-wise
};

// The curve t -> f (+)_p t ._p g, all members built from one pair of
// conjugates. Potentials must be node-wise nonincreasing in t.
inline MonotoneFamilyResult monotone_family(const LogConcaveFn& f, const LogConcaveFn& g, double p,
                                            const std::vector<double>& ts, int dual_n_axis = 0) {
    if (ts.empty()) throw std::invalid_argument("monotone_family: empty t list");
    for (double t : ts)
        if (!(t > 0.0)) throw std::invalid_argument("monotone_family: t > 0 required");
    MonotoneFamilyResult out;
    double worst = kInf;
    std::string where = "potentials nonincreasing at every node";
    std::vector<double> sorted_ts = ts;
    std::sort(sorted_ts.begin(), sorted_ts.end());
    for (double t : sorted_ts) out.members.push_back(p_sum(f, g, 1.0, t, p, dual_n_axis).result);
    for (std::size_t k = 0; k + 1 < out.members.size(); ++k) {
        const auto& lo = out.members[k + 1].potential;  // larger t
        const auto& hi = out.members[k].potential;
        for (std::size_t i = 0; i < lo.values.size(); ++i) {
            if (hi.values[i] == kInf) continue;  // larger-t member may only shrink the potential
            const double m = lo.values[i] == kInf ? -kInf : hi.values[i] - lo.values[i];
            if (m < worst) {
                worst = m;
                where = "t pair (" + std::to_string(sorted_ts[k]) + "," +
                        std::to_string(sorted_ts[k + 1]) + ") node " + std::to_string(i);
            }
        }
    }
    if (worst == kInf) worst = 0.0;
    out.monotonicity =
        make_margin_report("monotone_family", worst, 0.0, worst, 1e-9, 1e-12, where);
    return out;
}

}  // namespace lcf
