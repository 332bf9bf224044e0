#include "grbsde/ensemble.hpp"

#include <cmath>
#include <numbers>
#include <thread>

#include "grbsde/common.hpp"

namespace grbsde {

double SplitMix64::normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double BrownianEnsemble::weight(int level, int state) const {
    if (mode == EnsembleMode::monte_carlo) return 1.0 / paths;
    // binomial(level, state) / 2^level via the stable Pascal recursion
    std::vector<double> row{1.0};
    for (int i = 0; i < level; ++i) {
        std::vector<double> next(i + 2, 0.0);
        for (int k = 0; k <= i; ++k) {
            next[k] += 0.5 * row[k];
            next[k + 1] += 0.5 * row[k];
        }
        row.swap(next);
    }
    return row[state];
}

namespace {

void fill_paths(BrownianEnsemble& e, const TimeGrid& grid, int p_begin, int p_end) {
    const int N = grid.steps();
    for (int p = p_begin; p < p_end; ++p) {
        // counter-derived substream: finalize-mix (seed, path) so consecutive
        // paths do not land on shifted windows of one stream
        SplitMix64 rng(SplitMix64::mix(e.seed ^ SplitMix64::mix(p + 1)));
        double b = 0.0;
        e.bvalues[0][p] = 0.0;
        for (int i = 0; i < N; ++i) {
            const double db = rng.normal() * std::sqrt(grid.dt(i));
            e.increments[i][p] = db;
            b += db;
            e.bvalues[i + 1][p] = b;
        }
    }
}

}  // namespace

BrownianEnsemble simulate_ensemble(const TimeGrid& grid, EnsembleMode mode,
                                   int M, uint64_t seed, int threads) {
    BrownianEnsemble e;
    e.grid = &grid;
    e.mode = mode;
    e.seed = seed;

    if (mode == EnsembleMode::tree) {
        if (!grid.is_uniform())
            throw ValidationError(
                "simulate_ensemble: tree mode needs a uniform grid (recombination)");
        e.sqrt_dt = std::sqrt(grid.dt(0));
        return e;
    }

    if (M < 1) throw ValidationError("simulate_ensemble: monte_carlo needs M >= 1");
    e.paths = M;
    const int N = grid.steps();
    e.increments.assign(N, std::vector<double>(M, 0.0));
    e.bvalues.assign(N + 1, std::vector<double>(M, 0.0));

    threads = std::max(1, threads);
    if (threads == 1 || M < 2 * threads) {
        fill_paths(e, grid, 0, M);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (M + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int lo = t * chunk, hi = std::min(M, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(fill_paths, std::ref(e), std::cref(grid), lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return e;
}

}  // namespace grbsde
