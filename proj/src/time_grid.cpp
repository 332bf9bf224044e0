#include "grbsde/time_grid.hpp"

#include <algorithm>
#include <cmath>

#include "grbsde/common.hpp"

namespace grbsde {

bool TimeGrid::is_marked(int node) const {
    return std::binary_search(jump_marks.begin(), jump_marks.end(), node);
}

bool TimeGrid::is_uniform(double rel_tol) const {
    if (steps() < 1) return true;
    const double d0 = dt(0);
    for (int i = 1; i < steps(); ++i)
        if (std::abs(dt(i) - d0) > rel_tol * horizon) return false;
    return true;
}

int TimeGrid::node_at(double t, double tol) const {
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
        if (std::abs(nodes[i] - t) <= tol) return i;
    return -1;
}

TimeGrid build_grid(double T, int N, const std::vector<double>& jump_times) {
    if (!(T > 0.0)) throw ValidationError("build_grid: horizon must be positive");
    if (N < 1) throw ValidationError("build_grid: need at least one step");

    TimeGrid g;
    g.horizon = T;
    g.nodes.resize(N + 1);
    for (int i = 0; i <= N; ++i) g.nodes[i] = T * static_cast<double>(i) / N;
    g.nodes[N] = T;

    const double snap = 1e-9 * T;
    std::vector<double> marks_t;
    for (double jt : jump_times) {
        if (!(jt > 0.0) || jt > T + snap)
            throw ValidationError("build_grid: jump time outside (0, T]");
        for (double prev : marks_t)
            if (std::abs(prev - jt) <= snap)
                throw ValidationError("build_grid: duplicate jump time after snapping");
        marks_t.push_back(jt);

        auto it = std::lower_bound(g.nodes.begin(), g.nodes.end(), jt - snap);
        if (it != g.nodes.end() && std::abs(*it - jt) <= snap) {
            *it = std::min(jt, T);  // exact coincidence: adopt the jump time
        } else {
            g.nodes.insert(it, jt);
        }
    }

    g.jump_marks.clear();
    for (double jt : marks_t) {
        int idx = g.node_at(jt, snap);
        if (idx <= 0) throw ValidationError("build_grid: mark lost during snapping");
        g.jump_marks.push_back(idx);
    }
    std::sort(g.jump_marks.begin(), g.jump_marks.end());
    return g;
}

}  // namespace grbsde
