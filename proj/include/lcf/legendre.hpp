#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lcf/grid.hpp"
#include "lcf/report.hpp"

namespace lcf {

// Inputs whose true conjugate has unbounded slope (any +inf node present) get
// the dual radius floored here, so that back-conjugation tail mass (~1/radius
// per side) stays below the mass tolerances used throughout.
inline constexpr double kSteepDualRadius = 128.0;

namespace detail {

inline std::vector<double> axis_coords(const GridSpec& spec, int axis) {
    std::vector<double> xs(spec.n_axis);
    for (int i = 0; i < spec.n_axis; ++i) xs[i] = spec.coord(axis, i);
    return xs;
}

// sup_i (x_i * y - v_i) over finite v_i, for every y in ys (ascending).
// Lower-hull + monotone pointer; exact discrete sup, ties resolved to the
// smaller node index by the strict comparison. Writes -inf when no v is finite.
inline void transform_line(const double* xs, const double* vs, int n, const double* ys, int m,
                           double* out, std::vector<int>& hull) {
    hull.clear();
    auto cross = [&](int o, int a, int b) {
        return (xs[a] - xs[o]) * (vs[b] - vs[o]) - (vs[a] - vs[o]) * (xs[b] - xs[o]);
    };
    for (int i = 0; i < n; ++i) {
        if (vs[i] == kInf) continue;
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) <= 0.0)
            hull.pop_back();
        hull.push_back(i);
    }
    if (hull.empty()) {
        std::fill(out, out + m, -kInf);
        return;
    }
    std::size_t k = 0;
    for (int j = 0; j < m; ++j) {
        const double y = ys[j];
        while (k + 1 < hull.size() &&
               xs[hull[k + 1]] * y - vs[hull[k + 1]] > xs[hull[k]] * y - vs[hull[k]])
            ++k;
        out[j] = xs[hull[k]] * y - vs[hull[k]];
    }
}

inline bool has_infinite_node(const GridFunction& f) {
    for (double v : f.values)
        if (v == kInf) return true;
    return false;
}

inline bool has_finite_node(const GridFunction& f) {
    for (double v : f.values)
        if (v != kInf) return true;
    return false;
}

}  // namespace detail

// Per-axis maximum |slope| between adjacent finite nodes. Zero when no finite
// pair exists along that axis.
inline std::array<double, 2> max_observed_slope(const GridFunction& phi) {
    const auto& spec = phi.spec;
    std::array<double, 2> sl{0.0, 0.0};
    auto feed = [&](int axis, double a, double b) {
        if (a == kInf || b == kInf) return;
        sl[axis] = std::max(sl[axis], std::fabs(b - a) / spec.spacing(axis));
    };
    if (spec.dim == 1) {
        for (int i = 0; i + 1 < spec.n_axis; ++i) feed(0, phi.at(i), phi.at(i + 1));
        return sl;
    }
    for (int i = 0; i < spec.n_axis; ++i)
        for (int j = 0; j + 1 < spec.n_axis; ++j) {
            feed(1, phi.at(i, j), phi.at(i, j + 1));
            feed(0, phi.at(j, i), phi.at(j + 1, i));
        }
    return sl;
}

// Default dual grid: symmetric box whose per-axis radius is the max observed
// slope with a hair of padding. The exact (un-rounded) slope matters: an
// inflated radius manufactures a linear band in the conjugate that the true
// function does not have, which shows up as spurious mass after a second
// conjugation. Indicator-type inputs get the kSteepDualRadius floor instead.
inline GridSpec auto_dual_spec(const GridFunction& phi, int n_axis = 0) {
    phi.validate();
    if (!detail::has_finite_node(phi))
        throw std::invalid_argument("auto_dual_spec: improper input (no finite node)");
    const auto sl = max_observed_slope(phi);
    const bool steep = detail::has_infinite_node(phi);
    GridSpec dual;
    dual.dim = phi.spec.dim;
    dual.n_axis = n_axis > 0 ? n_axis : phi.spec.n_axis;
    for (int a = 0; a < dual.dim; ++a) {
        double r = sl[a];
        if (steep) r = std::max(r, kSteepDualRadius);
        if (r <= 0.0) r = 1.0;
        r *= 1.0 + 1e-9;
        dual.lo[a] = -r;
        dual.hi[a] = r;
    }
    dual.validate();
    return dual;
}

// Brute-force Legendre-Fenchel conjugate on the dual grid: for every dual node
// the sup runs over all finite primal nodes. Reference implementation; the
// fast path must reproduce it.
inline GridFunction conjugate_oracle(const GridFunction& phi, const GridSpec& dual) {
    phi.validate();
    dual.validate();
    if (dual.dim != phi.spec.dim)
        throw std::invalid_argument("conjugate_oracle: dimension mismatch");
    if (!detail::has_finite_node(phi))
        throw std::invalid_argument("conjugate_oracle: improper input");
    GridFunction out;
    out.spec = dual;
    out.even = phi.even && dual.symmetric();
    out.values.assign(dual.size(), -kInf);
    const auto& ps = phi.spec;
    if (ps.dim == 1) {
        for (int j = 0; j < dual.n_axis; ++j) {
            const double y = dual.coord(0, j);
            double best = -kInf;
            for (int i = 0; i < ps.n_axis; ++i) {
                const double v = phi.at(i);
                if (v == kInf) continue;
                const double cand = ps.coord(0, i) * y - v;
                if (cand > best) best = cand;
            }
            out.values[j] = best;
        }
        return out;
    }
    for (int j0 = 0; j0 < dual.n_axis; ++j0)
        for (int j1 = 0; j1 < dual.n_axis; ++j1) {
            const double y0 = dual.coord(0, j0), y1 = dual.coord(1, j1);
            double best = -kInf;
            for (int i0 = 0; i0 < ps.n_axis; ++i0) {
                const double x0y0 = ps.coord(0, i0) * y0;
                for (int i1 = 0; i1 < ps.n_axis; ++i1) {
                    const double v = phi.at(i0, i1);
                    if (v == kInf) continue;
                    const double cand = x0y0 + ps.coord(1, i1) * y1 - v;
                    if (cand > best) best = cand;
                }
            }
            out.at(j0, j1) = best;
        }
    return out;
}

// Linear-time conjugate: 1D by hull + monotone merge, 2D factored per axis
// (conjugate in x1 for each row, then in x0 for each dual column). Equals the
// oracle up to floating-point association.
inline GridFunction conjugate_fast(const GridFunction& phi, const GridSpec& dual) {
    phi.validate();
    dual.validate();
    if (dual.dim != phi.spec.dim)
        throw std::invalid_argument("conjugate_fast: dimension mismatch");
    if (!detail::has_finite_node(phi))
        throw std::invalid_argument("conjugate_fast: improper input");
    GridFunction out;
    out.spec = dual;
    out.even = phi.even && dual.symmetric();
    out.values.assign(dual.size(), 0.0);
    const auto& ps = phi.spec;
    std::vector<int> hull;
    if (ps.dim == 1) {
        const auto xs = detail::axis_coords(ps, 0);
        const auto ys = detail::axis_coords(dual, 0);
        detail::transform_line(xs.data(), phi.values.data(), ps.n_axis, ys.data(), dual.n_axis,
                               out.values.data(), hull);
        return out;
    }
    const auto xs0 = detail::axis_coords(ps, 0);
    const auto xs1 = detail::axis_coords(ps, 1);
    const auto ys0 = detail::axis_coords(dual, 0);
    const auto ys1 = detail::axis_coords(dual, 1);
    const int n = ps.n_axis, m = dual.n_axis;
    // mixed[i0 * m + j1] = sup_{i1} (x1 * y1 - phi(i0, i1)); -inf for all-inf rows
    std::vector<double> mixed(static_cast<std::size_t>(n) * m);
    for (int i0 = 0; i0 < n; ++i0)
        detail::transform_line(xs1.data(), phi.values.data() + ps.index(i0, 0), n, ys1.data(), m,
                               mixed.data() + static_cast<std::size_t>(i0) * m, hull);
    std::vector<double> col(n), res(m);
    for (int j1 = 0; j1 < m; ++j1) {
        for (int i0 = 0; i0 < n; ++i0) {
            const double g = mixed[static_cast<std::size_t>(i0) * m + j1];
            col[i0] = g == -kInf ? kInf : -g;
        }
        detail::transform_line(xs0.data(), col.data(), n, ys0.data(), m, res.data(), hull);
        for (int j0 = 0; j0 < m; ++j0) out.at(j0, j1) = res[j0];
    }
    return out;
}

// Conjugate twice, landing back on the primal grid. phi** <= phi at nodes;
// equality (within slope-resolution error) exactly when phi is discretely
// convex.
inline GridFunction biconjugate(const GridFunction& phi, const GridSpec* dual_spec = nullptr,
                                int dual_n_axis = 0) {
    const GridSpec dual = dual_spec ? *dual_spec : auto_dual_spec(phi, dual_n_axis);
    GridFunction conj = conjugate_fast(phi, dual);
    return conjugate_fast(conj, phi.spec);
}

// (alpha * phi)^*(y) = alpha * phi^*(y / alpha). Both sides are evaluated on
// the same dual nodes; the right side reads phi^* on a dual grid shrunk by
// alpha so y / alpha lands exactly on nodes.
inline MarginReport scale_conjugate_check(const GridFunction& phi, double alpha,
                                          const GridSpec* dual_spec = nullptr,
                                          double tol = 1e-9) {
    if (!(alpha > 0.0)) throw std::invalid_argument("scale_conjugate_check: alpha > 0");
    const GridSpec dual = dual_spec ? *dual_spec : auto_dual_spec(phi);
    GridFunction scaled = phi;
    for (double& v : scaled.values)
        if (v != kInf) v *= alpha;
    GridFunction lhs = conjugate_fast(scaled, dual);
    GridSpec shrunk = dual;
    for (int a = 0; a < dual.dim; ++a) {
        shrunk.lo[a] /= alpha;
        shrunk.hi[a] /= alpha;
    }
    GridFunction base = conjugate_fast(phi, shrunk);
    double worst = 0.0;
    for (std::size_t i = 0; i < lhs.values.size(); ++i)
        worst = std::max(worst, std::fabs(lhs.values[i] - alpha * base.values[i]));
    return make_margin_report("scale_conjugate_check", worst, 0.0, -worst, tol, 1e-12,
                              "max |(alpha phi)^* - alpha phi^*(./alpha)| over dual nodes");
}

// Exact total mass of e^{-g^*} over the whole line, where g^* is the conjugate
// of the sampled dual data (a max-affine function of x whose pieces are the
// lower-hull vertices of g). Closed form per hull segment; no quadrature grid,
// so the result is smooth in deformations of g. Returns +inf when the hull
// slopes do not bracket 0 (e^{-g^*} not integrable). 1D only.
inline double pl_conjugate_mass(const GridFunction& g) {
    g.validate();
    if (g.spec.dim != 1) throw std::invalid_argument("pl_conjugate_mass: 1D only");
    const auto xs = detail::axis_coords(g.spec, 0);  // dual coordinates y_j
    std::vector<int> hull;
    hull.reserve(g.spec.n_axis);
    auto cross = [&](int o, int a, int b) {
        return (xs[a] - xs[o]) * (g.values[b] - g.values[o]) -
               (g.values[a] - g.values[o]) * (xs[b] - xs[o]);
    };
    for (int i = 0; i < g.spec.n_axis; ++i) {
        if (g.values[i] == kInf) continue;
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) <= 0.0)
            hull.pop_back();
        hull.push_back(i);
    }
    if (hull.empty()) throw std::invalid_argument("pl_conjugate_mass: improper input");
    const std::size_t m = hull.size();
    if (xs[hull.front()] >= 0.0 || xs[hull.back()] <= 0.0) return kInf;
    // Breakpoints s_v between consecutive active slopes; b_v = g^*(s_v).
    std::vector<double> brk(m - 1), bval(m - 1);
    for (std::size_t v = 0; v + 1 < m; ++v) {
        const int a = hull[v], b = hull[v + 1];
        brk[v] = (g.values[b] - g.values[a]) / (xs[b] - xs[a]);
        bval[v] = brk[v] * xs[a] - g.values[a];
    }
    double mass = 0.0;
    for (std::size_t v = 0; v < m; ++v) {
        const double slope = xs[hull[v]];
        if (v == 0) {
            mass += std::exp(-bval[0]) / (-slope);  // slope < 0
        } else if (v + 1 == m) {
            mass += std::exp(-bval[m - 2]) / slope;  // slope > 0
        } else if (slope == 0.0) {
            mass += (brk[v] - brk[v - 1]) * std::exp(g.values[hull[v]]);
        } else {
            mass += (std::exp(-bval[v - 1]) - std::exp(-bval[v])) / slope;
        }
    }
    return mass;
}

}  // namespace lcf
