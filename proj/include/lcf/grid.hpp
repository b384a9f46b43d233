#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcf/report.hpp"

namespace lcf {

// Extended-real convention: potentials take values in (-inf, +inf]. IEEE +inf
// is the sentinel for "outside the effective domain"; it saturates under the
// operations we need (inf + r = inf, exp(-inf) = 0, inf^p = inf for p > 0).
// -inf and NaN are never valid grid values.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_ext_value(double v) { return !std::isnan(v) && v != -kInf; }

using Point = std::array<double, 2>;

inline Point pt(double x) { return {x, 0.0}; }
inline Point pt(double x, double y) { return {x, y}; }

// Uniform tensor grid, dim 1 or 2, same node count along each axis.
// n_axis is odd so that symmetric boxes (lo = -hi) carry an exact origin node;
// coordinates on symmetric boxes are exactly mirrored, which the evenness
// machinery relies on.
struct GridSpec {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{0.0, 0.0};
    int n_axis = 0;

    bool operator==(const GridSpec&) const = default;

    double spacing(int axis) const { return (hi[axis] - lo[axis]) / (n_axis - 1); }

    bool symmetric() const {
        for (int a = 0; a < dim; ++a)
            if (lo[a] != -hi[a]) return false;
        return true;
    }

    int center() const { return (n_axis - 1) / 2; }

    double coord(int axis, int i) const {
        if (lo[axis] == -hi[axis]) return (i - center()) * spacing(axis);
        return lo[axis] + i * spacing(axis);
    }

    std::size_t size() const {
        std::size_t n = static_cast<std::size_t>(n_axis);
        return dim == 1 ? n : n * n;
    }

    // Row-major, axis 0 slowest.
    std::size_t index(int i0, int i1 = 0) const {
        return dim == 1 ? static_cast<std::size_t>(i0)
                        : static_cast<std::size_t>(i0) * n_axis + i1;
    }

    Point node(int i0, int i1 = 0) const {
        return dim == 1 ? pt(coord(0, i0)) : pt(coord(0, i0), coord(1, i1));
    }

    void validate() const {
        if (dim != 1 && dim != 2) throw std::invalid_argument("GridSpec: dim must be 1 or 2");
        if (n_axis < 3 || n_axis % 2 == 0)
            throw std::invalid_argument("GridSpec: n_axis must be odd and >= 3");
        for (int a = 0; a < dim; ++a) {
            if (!(lo[a] < hi[a])) throw std::invalid_argument("GridSpec: lo < hi required");
            if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]))
                throw std::invalid_argument("GridSpec: finite box required");
        }
    }
};

inline GridSpec make_grid(int dim, double radius, int n_axis) {
    GridSpec g;
    g.dim = dim;
    g.n_axis = n_axis;
    for (int a = 0; a < dim; ++a) {
        g.lo[a] = -radius;
        g.hi[a] = radius;
    }
    g.validate();
    return g;
}

struct GridFunction {
    GridSpec spec;
    std::vector<double> values;
    bool even = false;

    double& at(int i0, int i1 = 0) { return values[spec.index(i0, i1)]; }
    double at(int i0, int i1 = 0) const { return values[spec.index(i0, i1)]; }

    void validate() const {
        spec.validate();
        if (values.size() != spec.size())
            throw std::invalid_argument("GridFunction: value count does not match spec");
        for (double v : values)
            if (!is_ext_value(v))
                throw std::invalid_argument("GridFunction: values must lie in (-inf, +inf]");
        if (even && !spec.symmetric())
            throw std::invalid_argument("GridFunction: even flag requires a symmetric box");
    }
};

enum class ClassTag { GENERAL, CLASS_A, CLASS_A0, CLASS_A0_PRIME };

inline std::string to_string(ClassTag t) {
    switch (t) {
        case ClassTag::GENERAL: return "GENERAL";
        case ClassTag::CLASS_A: return "CLASS_A";
        case ClassTag::CLASS_A0: return "CLASS_A0";
        case ClassTag::CLASS_A0_PRIME: return "CLASS_A0_PRIME";
    }
    return "GENERAL";
}

inline ClassTag class_tag_from_string(const std::string& s) {
    if (s == "GENERAL") return ClassTag::GENERAL;
    if (s == "CLASS_A") return ClassTag::CLASS_A;
    if (s == "CLASS_A0") return ClassTag::CLASS_A0;
    if (s == "CLASS_A0_PRIME") return ClassTag::CLASS_A0_PRIME;
    throw std::invalid_argument("unknown class tag: " + s);
}

// A log-concave function f = e^{-phi}, stored through its potential.
// The tag declares regularity the grid cannot witness (C^1 / C^2_+ membership
// is asserted by the builder, only the checkable properties are ever verified).
struct LogConcaveFn {
    GridFunction potential;
    ClassTag tag = ClassTag::GENERAL;
};

template <typename F>
GridFunction sample_to_grid(const GridSpec& spec, F&& fn, bool even = false) {
    spec.validate();
    GridFunction g;
    g.spec = spec;
    g.even = even && spec.symmetric();
    g.values.resize(spec.size());
    if (spec.dim == 1) {
        for (int i = 0; i < spec.n_axis; ++i) g.values[i] = fn(spec.node(i));
    } else {
        for (int i = 0; i < spec.n_axis; ++i)
            for (int j = 0; j < spec.n_axis; ++j) g.values[spec.index(i, j)] = fn(spec.node(i, j));
    }
    return g;
}

inline double sq_norm(const Point& x, int dim) {
    return dim == 1 ? x[0] * x[0] : x[0] * x[0] + x[1] * x[1];
}

// phi(x) = |x|^2 / (2 s), s > 0. Self-dual at s = 1.
inline LogConcaveFn build_gaussian(const GridSpec& spec, double s = 1.0) {
    if (!(s > 0.0)) throw std::invalid_argument("build_gaussian: s > 0 required");
    auto g = sample_to_grid(
        spec, [&](const Point& x) { return sq_norm(x, spec.dim) / (2.0 * s); }, true);
    return {std::move(g), ClassTag::CLASS_A0_PRIME};
}

// phi = 0 on the centered box with the given half-widths, +inf outside.
inline LogConcaveFn build_indicator_box(const GridSpec& spec, const std::array<double, 2>& radius) {
    for (int a = 0; a < spec.dim; ++a) {
        if (!(radius[a] > 0.0)) throw std::invalid_argument("build_indicator_box: radius > 0");
        if (!(-radius[a] >= spec.lo[a] && radius[a] <= spec.hi[a]))
            throw std::invalid_argument("build_indicator_box: box exceeds the grid domain");
    }
    auto g = sample_to_grid(
        spec,
        [&](const Point& x) {
            for (int a = 0; a < spec.dim; ++a)
                if (std::fabs(x[a]) > radius[a]) return kInf;
            return 0.0;
        },
        true);
    return {std::move(g), ClassTag::CLASS_A0};
}

inline LogConcaveFn build_indicator_box(const GridSpec& spec, double radius) {
    return build_indicator_box(spec, {radius, radius});
}

// phi(x) = |x|^q / (q s), q >= 1.
inline LogConcaveFn build_power(const GridSpec& spec, double q, double s = 1.0) {
    if (!(q >= 1.0)) throw std::invalid_argument("build_power: q >= 1 required");
    if (!(s > 0.0)) throw std::invalid_argument("build_power: s > 0 required");
    auto g = sample_to_grid(
        spec,
        [&](const Point& x) {
            return std::pow(std::sqrt(sq_norm(x, spec.dim)), q) / (q * s);
        },
        true);
    return {std::move(g), q >= 2.0 ? ClassTag::CLASS_A0_PRIME : ClassTag::CLASS_A0};
}

namespace detail {

// Continuous index along an axis, with snapping: a coordinate within
// 1e-9 * spacing of a node is treated as that node, so node evaluations
// reproduce stored values bit-exactly and lattice arithmetic stays robust.
struct AxisLocator {
    int i = 0;        // lower cell node
    double frac = 0;  // in [0,1); 0 with on_node set when snapped
    bool on_node = false;
    bool outside = false;
};

inline AxisLocator locate(const GridSpec& spec, int axis, double x) {
    AxisLocator loc;
    const double h = spec.spacing(axis);
    const double u = (x - spec.coord(axis, 0)) / h;
    const double r = std::round(u);
    if (std::fabs(u - r) <= 1e-9 && r >= 0 && r < spec.n_axis) {
        loc.i = static_cast<int>(r);
        loc.on_node = true;
        return loc;
    }
    if (u < 0.0 || u > static_cast<double>(spec.n_axis - 1)) {
        loc.outside = true;
        return loc;
    }
    loc.i = static_cast<int>(std::floor(u));
    if (loc.i >= spec.n_axis - 1) loc.i = spec.n_axis - 2;
    loc.frac = u - loc.i;
    return loc;
}

}  // namespace detail

// Multilinear interpolation. Returns +inf when x leaves the box or any node of
// the containing cell is +inf (a cell touching the effective-domain boundary
// cannot be trusted to interpolate).
inline double eval(const GridFunction& f, const Point& x) {
    const auto& spec = f.spec;
    std::array<detail::AxisLocator, 2> loc;
    for (int a = 0; a < spec.dim; ++a) {
        loc[a] = detail::locate(spec, a, x[a]);
        if (loc[a].outside) return kInf;
    }
    if (spec.dim == 1) {
        if (loc[0].on_node) return f.at(loc[0].i);
        const double v0 = f.at(loc[0].i), v1 = f.at(loc[0].i + 1);
        if (v0 == kInf || v1 == kInf) return kInf;
        return v0 + (v1 - v0) * loc[0].frac;
    }
    if (loc[0].on_node && loc[1].on_node) return f.at(loc[0].i, loc[1].i);
    const int di0 = loc[0].on_node ? 0 : 1;
    const int di1 = loc[1].on_node ? 0 : 1;
    double acc = 0.0;
    for (int b0 = 0; b0 <= di0; ++b0)
        for (int b1 = 0; b1 <= di1; ++b1) {
            const double v = f.at(loc[0].i + b0, loc[1].i + b1);
            if (v == kInf) return kInf;
            const double w0 = di0 ? (b0 ? loc[0].frac : 1.0 - loc[0].frac) : 1.0;
            const double w1 = di1 ? (b1 ? loc[1].frac : 1.0 - loc[1].frac) : 1.0;
            acc += w0 * w1 * v;
        }
    return acc;
}

inline double eval(const LogConcaveFn& f, const Point& x) { return eval(f.potential, x); }

// Central difference gradient with step = grid spacing. Empty when the stencil
// leaves the box or touches +inf.
inline std::optional<Point> try_gradient(const GridFunction& f, const Point& x) {
    Point g{0.0, 0.0};
    for (int a = 0; a < f.spec.dim; ++a) {
        const double h = f.spec.spacing(a);
        Point xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        const double vp = eval(f, xp), vm = eval(f, xm);
        if (vp == kInf || vm == kInf) return std::nullopt;
        g[a] = (vp - vm) / (2.0 * h);
    }
    return g;
}

inline Point gradient(const GridFunction& f, const Point& x) {
    auto g = try_gradient(f, x);
    if (!g)
        throw std::domain_error(
            "gradient: stencil touches +inf or the grid boundary (non-differentiable point)");
    return *g;
}

namespace detail {

// Walks every grid line in the given direction, accumulating the minimum raw
// second difference over finite triples and checking that +inf never sits
// between two finite nodes (discrete convexity of the effective domain).
struct ConvexityScan {
    double min_second_diff = kInf;
    bool domain_ok = true;
    std::string worst;
    int triples = 0;
};

inline void scan_line(const GridFunction& f, int i0, int i1, int d0, int d1, int steps,
                      ConvexityScan& out) {
    double prev2 = kInf, prev1 = kInf;
    bool seen_finite = false, gap_open = false;
    int p0 = i0, p1 = i1;
    for (int s = 0; s < steps; ++s, p0 += d0, p1 += d1) {
        const double v = f.at(p0, p1);
        if (v == kInf) {
            if (seen_finite) gap_open = true;
        } else {
            if (gap_open) out.domain_ok = false;  // finite - inf - finite pattern
            seen_finite = true;
            if (prev1 != kInf && prev2 != kInf) {
                const double d2 = prev2 - 2.0 * prev1 + v;
                ++out.triples;
                if (d2 < out.min_second_diff) {
                    out.min_second_diff = d2;
                    out.worst = "node(" + std::to_string(p0 - d0) +
                                (f.spec.dim == 2 ? "," + std::to_string(p1 - d1) : "") + ")";
                }
            }
        }
        prev2 = prev1;
        prev1 = v;
    }
}

inline ConvexityScan scan_convexity(const GridFunction& f) {
    ConvexityScan out;
    const int n = f.spec.n_axis;
    if (f.spec.dim == 1) {
        scan_line(f, 0, 0, 1, 0, n, out);
        return out;
    }
    for (int j = 0; j < n; ++j) scan_line(f, 0, j, 1, 0, n, out);   // axis 0 lines
    for (int i = 0; i < n; ++i) scan_line(f, i, 0, 0, 1, n, out);   // axis 1 lines
    for (int j = 0; j < n; ++j) scan_line(f, 0, j, 1, 1, n - j, out);  // diagonals
    for (int i = 1; i < n; ++i) scan_line(f, i, 0, 1, 1, n - i, out);
    for (int j = 0; j < n; ++j) scan_line(f, 0, j, 1, -1, j + 1, out);  // anti-diagonals
    for (int i = 1; i < n; ++i) scan_line(f, i, n - 1, 1, -1, n - i, out);
    return out;
}

}  // namespace detail

// Discrete convexity: every axis-aligned and diagonal second difference of
// finite values >= -tol, and no +inf between two finite nodes on any line.
// A domain violation is reported as margin = -inf so the pass rule stays
// margin >= -tol.
inline MarginReport check_convex(const GridFunction& f, double tol = 1e-9) {
    auto scan = detail::scan_convexity(f);
    double margin = scan.min_second_diff;
    if (margin == kInf) margin = 0.0;  // fewer than three finite nodes on any line
    std::string witness = scan.worst;
    if (!scan.domain_ok) {
        margin = -kInf;
        witness = "+inf between finite nodes (effective domain not grid-convex)";
    }
    return make_margin_report("check_convex", margin, 0.0, margin, tol, 1e-12, witness);
}

// Coercivity proxy threshold: the potential must rise by at least this much
// from its origin value to the boundary shell of the box.
inline constexpr double kCoercivityRise = 4.0;

namespace detail {

inline double boundary_min(const GridFunction& f) {
    const int n = f.spec.n_axis;
    double m = kInf;
    if (f.spec.dim == 1) return std::min(f.at(0), f.at(n - 1));
    for (int i = 0; i < n; ++i) {
        m = std::min({m, f.at(i, 0), f.at(i, n - 1), f.at(0, i), f.at(n - 1, i)});
    }
    return m;
}

}  // namespace detail

// Membership check against the declared class, as far as a grid can witness:
// properness, nonnegativity, phi(o) = 0, discrete convexity, and a coercivity
// proxy (min boundary value >= phi(o) + kCoercivityRise). The reported margin
// is the worst individual margin, so pass <=> margin >= -tol covers all parts.
inline MarginReport check_class(const LogConcaveFn& f, ClassTag target, double tol = 1e-9) {
    const auto& g = f.potential;
    g.validate();
    double margin = kInf;
    std::string witness = "all constraints satisfied";
    auto worse = [&](double m, const std::string& what) {
        if (m < margin) {
            margin = m;
            witness = what;
        }
    };

    double vmin = kInf;
    bool any_finite = false;
    for (double v : g.values) {
        if (v != kInf) {
            any_finite = true;
            vmin = std::min(vmin, v);
        }
    }
    if (!any_finite)
        return make_margin_report("check_class", -kInf, 0.0, -kInf, tol, 1e-12,
                                  "improper: no finite value");
    if (target == ClassTag::GENERAL)
        return make_margin_report("check_class", 0.0, 0.0, 0.0, tol, 1e-12, "proper");

    const double origin_ref = target == ClassTag::CLASS_A ? vmin : 0.0;
    // Coercivity proxy; boundary +inf counts as maximal rise.
    const double bmin = detail::boundary_min(g);
    const double rise = bmin == kInf ? kInf : bmin - origin_ref;
    if (rise != kInf) worse(rise - kCoercivityRise, "coercivity proxy: boundary rise too small");

    if (target == ClassTag::CLASS_A0 || target == ClassTag::CLASS_A0_PRIME) {
        if (!g.spec.symmetric())
            return make_margin_report("check_class", -kInf, 0.0, -kInf, tol, 1e-12,
                                      "origin conditions need a symmetric box");
        const int c = g.spec.center();
        const double at_o = g.spec.dim == 1 ? g.at(c) : g.at(c, c);
        worse(-std::fabs(at_o), "phi(o) = 0 violated");
        worse(vmin, "nonnegativity violated");
        auto conv = check_convex(g, tol);
        worse(conv.margin, "convexity: " + conv.witness);
    }
    return make_margin_report("check_class", margin, 0.0, margin, tol, 1e-12, witness);
}

}  // namespace lcf
