#pragma once

#include <vector>

namespace grbsde {

// Partition 0 = t_0 < t_1 < ... < t_N = T with a set of nodes designated as
// jump marks (times where the jump coefficient h may act).
struct TimeGrid {
    double horizon = 1.0;
    std::vector<double> nodes;       // size N+1
    std::vector<int> jump_marks;     // sorted node indices, in [1, N]

    int steps() const { return static_cast<int>(nodes.size()) - 1; }
    double dt(int interval) const { return nodes[interval + 1] - nodes[interval]; }
    bool is_marked(int node) const;
    bool is_uniform(double rel_tol = 1e-9) const;
    int node_at(double t, double tol = 1e-9) const;  // index of node matching t, -1 if none
};

// Uniform N-step grid over [0, T] plus the given jump times. A jump time
// coinciding with an existing node marks it; otherwise a node is inserted at
// the jump time. Duplicate jump times are rejected.
TimeGrid build_grid(double T, int N, const std::vector<double>& jump_times);

}  // namespace grbsde
