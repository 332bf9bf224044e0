#pragma once

#include <cstdint>
#include <vector>

#include "grbsde/time_grid.hpp"

namespace grbsde {

// splitmix64: small, fully specified, deterministic across platforms.
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    uint64_t next() { return mix(state += 0x9E3779B97F4A7C15ULL); }
    double uniform01() {  // in (0, 1]
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }
    double normal();                       // Box-Muller, consumes two draws
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }
};

enum class EnsembleMode { tree, monte_carlo };

// Discretized Brownian driver: either a recombining binomial tree with
// increments +-sqrt(dt), or M seeded Monte Carlo paths. Paths use per-path
// substreams derived from (seed, path index), so generation is independent
// of how work is partitioned across threads.
struct BrownianEnsemble {
    const TimeGrid* grid = nullptr;
    EnsembleMode mode = EnsembleMode::tree;
    uint64_t seed = 0;
    int paths = 0;       // monte_carlo only
    double sqrt_dt = 0;  // tree only (uniform grid required)

    std::vector<std::vector<double>> increments;  // [interval][path], mc only
    std::vector<std::vector<double>> bvalues;     // [node][path], mc only

    int states(int level) const {
        return mode == EnsembleMode::tree ? level + 1 : paths;
    }
    double brownian(int level, int state) const {
        if (mode == EnsembleMode::tree) return (2.0 * state - level) * sqrt_dt;
        return bvalues[level][state];
    }
    double increment(int interval, int state) const {
        return increments[interval][state];
    }
    // probability weight of a state at a level (binomial / uniform)
    double weight(int level, int state) const;
};

BrownianEnsemble simulate_ensemble(const TimeGrid& grid, EnsembleMode mode,
                                   int M, uint64_t seed, int threads = 1);

}  // namespace grbsde
