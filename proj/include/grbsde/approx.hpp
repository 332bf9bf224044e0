#pragma once

#include <functional>
#include <vector>

#include "grbsde/coefficients.hpp"
#include "grbsde/time_grid.hpp"

namespace grbsde {

// Lipschitz regularization from above:
//   f_n(y, z) = sup_{p,q} { f(p, q) - n|p - y| - n|q - z| }   (n >= 1)
// with f <= 0 and f(y, z) >= -bound at the query point. Any maximizer lies in
// the 1-ball of radius -f(y,z)/n (and of radius bound/n), which makes the sup
// a finite search: 64 grid points per dimension plus golden-section polish.
// z may have up to 3 components; d > 3 is rejected.
double sup_convolution(const std::function<double(double, const std::vector<double>&)>& f,
                       int n, double y, const std::vector<double>& z, double bound);

// Scalar variant for g (no z argument).
double sup_convolution_scalar(const std::function<double(double)>& g, int n, double y,
                              double bound);

// h_n: h at the first n marks of the enumeration, 0 elsewhere.
bool mark_active(const std::vector<int>& mark_enumeration, int n, int node);

double truncate_h(const JumpFn& h, const std::vector<int>& mark_enumeration, int n,
                  const StepContext& ctx, double x, double y);

// One rung of the regularization ladder: f_n and g_n as sup-convolution
// envelopes, h_n truncated to the first n marks. The closures borrow the
// coefficient set, which must outlive the level.
struct LadderLevel {
    int n = 0;
    GenFn f_n;
    ScalarFn g_n;
    JumpFn h_n;
    std::vector<int> active_jump_times;  // sorted node indices
};

LadderLevel make_ladder_level(const CoefficientSet& c, int n);

// Sorted stopping sequence S_0 = 0 < S_1 < ... < S_k <= S_{k+1} = T built
// from a set of pairwise distinct mark times.
std::vector<double> order_jump_times(std::vector<double> marks, double T);

// Per-path variant ordering node indices (marks may be path-dependent
// stopping times; N stands in for "never").
std::vector<int> order_jump_nodes(std::vector<int> mark_nodes, int N);

}  // namespace grbsde
