// Round trip of the even Lp Minkowski problem: take the L2 surface-area
// measure of a Gaussian, hand it to the solver, and report how well the
// recovered potential satisfies the stationarity identity.
#include <cstdio>

#include "lcf/lcf.hpp"

int main() {
    const lcf::GridSpec grid = lcf::make_grid(1, 8.0, 513);
    const lcf::LogConcaveFn f = lcf::build_gaussian(grid);
    const lcf::DiscreteMeasure nu = lcf::forward_measure(f, 2.0);
    std::printf("target measure: %zu atoms, total weight %.6f\n", nu.atoms.size(),
                nu.total_weight());

    lcf::SolverConfig cfg;
    cfg.grid = grid;
    const lcf::SolveResult res = lcf::solve(nu, cfg);
    std::printf("objective %.6f (lower bound %.6f), restart %d, %ld evaluations\n",
                res.objective_value, res.lower_bound, res.best_restart, res.total_evals);
    std::printf("tau = %.6f, stationarity residual = %.4f\n", res.tau, res.el_residual);
    std::printf("%s\n", res.diagnostics.c_str());
    return 0;
}
