#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcf/grid.hpp"
#include "lcf/legendre.hpp"

namespace lcf {

// Relative cutoff defining the working region Omega = {0 < phi^* < inf}:
// nodes with phi^*(y) <= kOmegaCutRel * max phi^* are treated as the zero set.
inline constexpr double kOmegaCutRel = 1e-8;

namespace detail {

inline double trapezoid_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

}  // namespace detail

// Composite trapezoid quadrature of e^{-phi} over the grid box. +inf nodes
// contribute zero, so cells on the domain edge keep only their finite corners'
// share.
inline double total_mass(const GridFunction& phi) {
    phi.validate();
    const auto& spec = phi.spec;
    const int n = spec.n_axis;
    double acc = 0.0;
    if (spec.dim == 1) {
        for (int i = 0; i < n; ++i)
            acc += detail::trapezoid_weight(i, n) * std::exp(-phi.at(i));
        return acc * spec.spacing(0);
    }
    for (int i = 0; i < n; ++i) {
        const double wi = detail::trapezoid_weight(i, n);
        for (int j = 0; j < n; ++j)
            acc += wi * detail::trapezoid_weight(j, n) * std::exp(-phi.at(i, j));
    }
    return acc * spec.spacing(0) * spec.spacing(1);
}

inline double total_mass(const LogConcaveFn& f) { return total_mass(f.potential); }

// integral of f log f with the 0 log 0 = 0 convention: the integrand is
// -phi e^{-phi}, which vanishes at +inf nodes.
inline double integral_f_log_f(const GridFunction& phi) {
    phi.validate();
    const auto& spec = phi.spec;
    const int n = spec.n_axis;
    auto term = [&](double v) { return v == kInf ? 0.0 : -v * std::exp(-v); };
    double acc = 0.0;
    if (spec.dim == 1) {
        for (int i = 0; i < n; ++i) acc += detail::trapezoid_weight(i, n) * term(phi.at(i));
        return acc * spec.spacing(0);
    }
    for (int i = 0; i < n; ++i) {
        const double wi = detail::trapezoid_weight(i, n);
        for (int j = 0; j < n; ++j)
            acc += wi * detail::trapezoid_weight(j, n) * term(phi.at(i, j));
    }
    return acc * spec.spacing(0) * spec.spacing(1);
}

inline double entropy(const LogConcaveFn& f) {
    const double J = total_mass(f);
    if (!(J > 0.0)) throw std::domain_error("entropy: zero total mass");
    return integral_f_log_f(f.potential) - J * std::log(J);
}

struct DiscreteMeasure {
    struct Atom {
        Point y{0.0, 0.0};
        double w = 0.0;
    };
    int dim = 1;
    std::vector<Atom> atoms;
    bool even = false;

    double total_weight() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.w;
        return s;
    }
};

inline void sort_atoms(DiscreteMeasure& mu) {
    std::sort(mu.atoms.begin(), mu.atoms.end(), [](const auto& a, const auto& b) {
        if (a.y[0] != b.y[0]) return a.y[0] < b.y[0];
        return a.y[1] < b.y[1];
    });
}

// Sequential greedy merge: each unconsumed atom seeds a cluster absorbing
// everything within `radius` of the seed, and clusters collapse to their
// weighted centroid. Seeds are taken by increasing distance from the origin so
// a mirror-symmetric atom set merges into a mirror-symmetric cluster set; a
// lexicographic order would anchor the two half-axes at opposite cluster ends.
inline void merge_atoms(DiscreteMeasure& mu, double radius) {
    if (radius <= 0.0 || mu.atoms.size() < 2) {
        sort_atoms(mu);
        return;
    }
    std::sort(mu.atoms.begin(), mu.atoms.end(), [](const auto& a, const auto& b) {
        const double na = a.y[0] * a.y[0] + a.y[1] * a.y[1];
        const double nb = b.y[0] * b.y[0] + b.y[1] * b.y[1];
        if (na != nb) return na < nb;
        if (a.y[0] != b.y[0]) return a.y[0] < b.y[0];
        return a.y[1] < b.y[1];
    });
    std::vector<DiscreteMeasure::Atom> merged;
    std::vector<bool> used(mu.atoms.size(), false);
    for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
        if (used[i]) continue;
        const Point seed = mu.atoms[i].y;
        const double seed_norm = std::sqrt(seed[0] * seed[0] + seed[1] * seed[1]);
        double w = 0.0, c0 = 0.0, c1 = 0.0;
        for (std::size_t j = i; j < mu.atoms.size(); ++j) {
            if (used[j]) continue;
            const double d0 = mu.atoms[j].y[0] - seed[0];
            const double d1 = mu.atoms[j].y[1] - seed[1];
            const double norm_j =
                std::sqrt(mu.atoms[j].y[0] * mu.atoms[j].y[0] + mu.atoms[j].y[1] * mu.atoms[j].y[1]);
            if (norm_j > seed_norm + radius) break;  // sorted by norm, nothing closer follows
            if (d0 * d0 + d1 * d1 > radius * radius) continue;
            used[j] = true;
            w += mu.atoms[j].w;
            c0 += mu.atoms[j].w * mu.atoms[j].y[0];
            c1 += mu.atoms[j].w * mu.atoms[j].y[1];
        }
        if (w > 0.0) merged.push_back({Point{c0 / w, c1 / w}, w});
    }
    mu.atoms = std::move(merged);
    sort_atoms(mu);
}

inline bool measure_is_even(const DiscreteMeasure& mu, double pos_tol, double w_rel_tol = 1e-6) {
    for (const auto& a : mu.atoms) {
        double matched = 0.0;
        for (const auto& b : mu.atoms) {
            const double d0 = b.y[0] + a.y[0];
            const double d1 = b.y[1] + a.y[1];
            if (d0 * d0 + d1 * d1 <= pos_tol * pos_tol) matched += b.w;
        }
        if (std::fabs(matched - a.w) > w_rel_tol * std::max(std::fabs(a.w), 1.0)) return false;
    }
    return true;
}

struct PushforwardStats {
    long cells_total = 0;
    long cells_skipped_gradient = 0;  // stencil hit +inf or the box edge
    long cells_cut_omega = 0;         // phi^*(grad phi) below the Omega cutoff
    long atoms_before_merge = 0;
    double eps_omega = 0.0;
};

namespace detail {

template <typename CellFn>
void for_each_cell_center(const GridSpec& spec, CellFn&& fn) {
    const int n = spec.n_axis;
    if (spec.dim == 1) {
        for (int i = 0; i + 1 < n; ++i)
            fn(Point{0.5 * (spec.coord(0, i) + spec.coord(0, i + 1)), 0.0},
               spec.spacing(0));
        return;
    }
    const double vol = spec.spacing(0) * spec.spacing(1);
    for (int i = 0; i + 1 < n; ++i)
        for (int j = 0; j + 1 < n; ++j)
            fn(Point{0.5 * (spec.coord(0, i) + spec.coord(0, i + 1)),
                     0.5 * (spec.coord(1, j) + spec.coord(1, j + 1))},
               vol);
}

}  // namespace detail

// Surface-area (moment) measure of f = e^{-phi}: pushforward of e^{-phi} dx
// under grad phi, discretized per cell center. Cells whose gradient stencil is
// unusable are skipped and accounted, not guessed.
inline DiscreteMeasure surface_measure(const LogConcaveFn& f, double merge_radius = -1.0,
                                       PushforwardStats* stats = nullptr) {
    f.potential.validate();
    DiscreteMeasure mu;
    mu.dim = f.potential.spec.dim;
    PushforwardStats st;
    if (merge_radius < 0.0) {
        const GridSpec dual = auto_dual_spec(f.potential);
        merge_radius = std::max(dual.spacing(0), dual.dim == 2 ? dual.spacing(1) : 0.0);
    }
    detail::for_each_cell_center(f.potential.spec, [&](const Point& c, double vol) {
        ++st.cells_total;
        const double pv = eval(f.potential, c);
        if (pv == kInf) {
            ++st.cells_skipped_gradient;
            return;
        }
        const auto grad = try_gradient(f.potential, c);
        if (!grad) {
            ++st.cells_skipped_gradient;
            return;
        }
        mu.atoms.push_back({*grad, std::exp(-pv) * vol});
    });
    st.atoms_before_merge = static_cast<long>(mu.atoms.size());
    merge_atoms(mu, merge_radius);
    mu.even = f.potential.even && measure_is_even(mu, std::max(merge_radius, 1e-12));
    if (stats) *stats = st;
    return mu;
}

// Lp surface-area measure: weight (phi^*(grad phi))^{1-p} relative to the
// moment measure, supported on Omega = {phi^* above the cutoff}. The cut is
// applied before the weight, and weights are never clamped afterwards; for
// p > 1 they are allowed to be large near the zero set.
inline DiscreteMeasure lp_surface_measure(const LogConcaveFn& f, double p,
                                          double merge_radius = -1.0,
                                          PushforwardStats* stats = nullptr) {
    f.potential.validate();
    const GridSpec dual = auto_dual_spec(f.potential);
    const GridFunction conj = conjugate_fast(f.potential, dual);
    double conj_max = 0.0;
    for (double v : conj.values) conj_max = std::max(conj_max, v);
    const double eps_omega = kOmegaCutRel * conj_max;
    if (merge_radius < 0.0)
        merge_radius = std::max(dual.spacing(0), dual.dim == 2 ? dual.spacing(1) : 0.0);

    DiscreteMeasure mu;
    mu.dim = f.potential.spec.dim;
    PushforwardStats st;
    st.eps_omega = eps_omega;
    detail::for_each_cell_center(f.potential.spec, [&](const Point& c, double vol) {
        ++st.cells_total;
        const double pv = eval(f.potential, c);
        if (pv == kInf) {
            ++st.cells_skipped_gradient;
            return;
        }
        const auto grad = try_gradient(f.potential, c);
        if (!grad) {
            ++st.cells_skipped_gradient;
            return;
        }
        const double cv = eval(conj, *grad);
        if (cv == kInf || cv <= eps_omega) {
            ++st.cells_cut_omega;
            return;
        }
        mu.atoms.push_back({*grad, std::exp(-pv) * vol * std::pow(cv, 1.0 - p)});
    });
    st.atoms_before_merge = static_cast<long>(mu.atoms.size());
    merge_atoms(mu, merge_radius);
    mu.even = f.potential.even && measure_is_even(mu, std::max(merge_radius, 1e-12));
    if (stats) *stats = st;
    return mu;
}

template <typename G>
double measure_integral(const DiscreteMeasure& mu, G&& g) {
    double acc = 0.0;
    for (const auto& a : mu.atoms) acc += a.w * g(a.y);
    return acc;
}

}  // namespace lcf
