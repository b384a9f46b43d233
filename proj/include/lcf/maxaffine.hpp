#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "lcf/grid.hpp"

namespace lcf {

// Even max-affine potential: phi(x) = max(0, max_j |<a_j, x>| - b_j), b_j >= 0.
// Each stored pair stands for the mirrored pieces (a_j, b_j) and (-a_j, b_j);
// the zero piece is implicit. phi(o) = 0 and evenness hold by construction.
struct MaxAffinePotential {
    struct Pair {
        Point a{0.0, 0.0};
        double b = 0.0;
    };
    int dim = 1;
    std::vector<Pair> pairs;

    int n_pieces() const { return 2 * static_cast<int>(pairs.size()); }

    double eval(const Point& x) const {
        double best = 0.0;
        for (const auto& pc : pairs) {
            const double dot = dim == 1 ? pc.a[0] * x[0] : pc.a[0] * x[0] + pc.a[1] * x[1];
            const double v = std::fabs(dot) - pc.b;
            if (v > best) best = v;
        }
        return best;
    }

    double max_slope() const {
        double m = 0.0;
        for (const auto& pc : pairs)
            m = std::max(m, std::sqrt(sq_norm(pc.a, dim)));
        return m;
    }

    void project() {
        for (auto& pc : pairs) pc.b = std::max(pc.b, 0.0);
    }

    void validate() const {
        if (dim != 1 && dim != 2) throw std::invalid_argument("MaxAffinePotential: dim 1 or 2");
        for (const auto& pc : pairs) {
            if (!(pc.b >= 0.0)) throw std::invalid_argument("MaxAffinePotential: b >= 0 required");
            if (!std::isfinite(pc.a[0]) || !std::isfinite(pc.a[1]) || !std::isfinite(pc.b))
                throw std::invalid_argument("MaxAffinePotential: finite parameters required");
        }
    }

    GridFunction sample(const GridSpec& spec) const {
        return sample_to_grid(spec, [&](const Point& x) { return eval(x); }, true);
    }

    LogConcaveFn as_logconcave(const GridSpec& spec) const {
        return {sample(spec), ClassTag::CLASS_A0};
    }
};

// Seeded generator of coercive even max-affine potentials: slope magnitudes in
// [0.3, 3], intercepts in [0, 1.5]. The first dim pairs carry zero intercept
// and spread directions so the potential is coercive in every direction.
inline MaxAffinePotential random_max_affine(int dim, int n_pairs, std::uint64_t seed) {
    if (n_pairs < dim) throw std::invalid_argument("random_max_affine: need at least dim pairs");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MaxAffinePotential phi;
    phi.dim = dim;
    const double base_angle = unit(rng) * 3.14159265358979323846;
    for (int j = 0; j < n_pairs; ++j) {
        MaxAffinePotential::Pair pc;
        const bool anchor = j < dim;
        const double mag = anchor ? 0.8 + 2.2 * unit(rng) : 0.3 + 2.7 * unit(rng);
        if (dim == 1) {
            pc.a[0] = mag;
        } else {
            const double th = anchor ? base_angle + j * 1.5707963267948966
                                     : unit(rng) * 3.14159265358979323846;
            pc.a = Point{mag * std::cos(th), mag * std::sin(th)};
        }
        pc.b = anchor ? 0.0 : 1.5 * unit(rng);
        phi.pairs.push_back(pc);
    }
    return phi;
}

}  // namespace lcf
