#pragma once

// shared scaffolding for solver-level tests

#include <cmath>
#include <vector>

#include "grbsde/coefficients.hpp"
#include "grbsde/solver.hpp"

namespace grbsde::testing {

inline CoefficientSet basic_set(const TimeGrid& g, double lbar, double ubar) {
    CoefficientSet c;
    c.grid = &g;
    c.L = BarrierModel::tabulated(RcllPath::constant(g, lbar));
    c.U = BarrierModel::tabulated(RcllPath::constant(g, ubar));
    c.A = FiniteVariationPath::zero(g);
    c.R = FiniteVariationPath::zero(g);
    return c;
}

// wide enough that reflection never binds for |B| paths on an N-step tree
inline CoefficientSet wide_set(const TimeGrid& g) {
    const int N = g.steps();
    const double reach = N * std::sqrt(g.dt(0)) + 1.0;
    return basic_set(g, -reach, reach);
}

inline BackendSpec tree_spec() {
    BackendSpec s;
    s.kind = BackendKind::tree;
    return s;
}

inline BackendSpec lsmc_spec(int paths, uint64_t seed, int degree = 3) {
    BackendSpec s;
    s.kind = BackendKind::lsmc;
    s.paths = paths;
    s.seed = seed;
    s.degree = degree;
    return s;
}

// enumerate every root-to-leaf path of a depth-N tree
inline std::vector<std::vector<int>> all_tree_paths(int N) {
    std::vector<std::vector<int>> out;
    for (int bits = 0; bits < (1 << N); ++bits) {
        std::vector<int> moves(N);
        for (int i = 0; i < N; ++i) moves[i] = (bits >> i) & 1;
        out.push_back(moves);
    }
    return out;
}

}  // namespace grbsde::testing
