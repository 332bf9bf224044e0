#pragma once

#include <vector>

#include "grbsde/time_grid.hpp"

namespace grbsde {

// Right-continuous path sampled on a grid, with explicit left limits.
// Convention: left(0) == right(0) (Y_{0-} = Y_0).
struct RcllPath {
    const TimeGrid* grid = nullptr;
    std::vector<double> right;  // value at each node t_i
    std::vector<double> left;   // value at t_i-

    static RcllPath constant(const TimeGrid& g, double v);
    double jump_at(int node) const { return right[node] - left[node]; }
};

// Signed finite-variation path: per-interval continuous increments plus
// per-node jump sizes. Value at t_i is the sum of everything up to and
// including the node-i jump. jump[0] is 0 by convention (processes start at
// their stated initial value; class-K processes start at 0).
struct FiniteVariationPath {
    const TimeGrid* grid = nullptr;
    std::vector<double> cont;  // size N, increment over (t_i, t_{i+1})
    std::vector<double> jump;  // size N+1, atom at t_i

    static FiniteVariationPath zero(const TimeGrid& g);

    double value_at(int node) const;
    double left_value_at(int node) const;
    double total_variation_to(int node) const;
    bool is_nondecreasing(double tol = 0.0) const;
    bool is_continuous(double tol = 0.0) const;
    double final_value() const { return value_at(grid->steps()); }
};

// Total variation |p| over (0, t]; t must coincide with a grid node.
double total_variation(const FiniteVariationPath& p, double t);

// sum of phi-left-values against jump atoms plus phi-right-values (at each
// interval's left node) against continuous increments.
double integrate_against(const RcllPath& phi, const FiniteVariationPath& K);

// First grid node s where sum_{r<=s} l_r + C_s + |R|_s >= level, else T.
double truncation_time(const std::vector<double>& l_atoms,
                       const std::vector<double>& C,
                       const FiniteVariationPath& R,
                       double level,
                       const TimeGrid& grid);

// One realized trajectory of a solved GRBSDE.
struct Solution {
    RcllPath Y;
    std::vector<double> Z;  // per interval
    FiniteVariationPath Kplus, Kminus;
};

}  // namespace grbsde
