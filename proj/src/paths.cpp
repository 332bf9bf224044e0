#include "grbsde/paths.hpp"

#include <cmath>

#include "grbsde/common.hpp"

namespace grbsde {

RcllPath RcllPath::constant(const TimeGrid& g, double v) {
    RcllPath p;
    p.grid = &g;
    p.right.assign(g.nodes.size(), v);
    p.left.assign(g.nodes.size(), v);
    return p;
}

FiniteVariationPath FiniteVariationPath::zero(const TimeGrid& g) {
    FiniteVariationPath p;
    p.grid = &g;
    p.cont.assign(g.steps(), 0.0);
    p.jump.assign(g.nodes.size(), 0.0);
    return p;
}

double FiniteVariationPath::value_at(int node) const {
    double v = 0.0;
    for (int i = 0; i <= node; ++i) {
        v += jump[i];
        if (i < node) v += cont[i];
    }
    return v;
}

double FiniteVariationPath::left_value_at(int node) const {
    return value_at(node) - jump[node];
}

double FiniteVariationPath::total_variation_to(int node) const {
    double v = 0.0;
    for (int i = 1; i <= node; ++i) v += std::abs(jump[i]);
    for (int i = 0; i < node; ++i) v += std::abs(cont[i]);
    return v;
}

bool FiniteVariationPath::is_nondecreasing(double tol) const {
    for (double c : cont)
        if (c < -tol) return false;
    for (double j : jump)
        if (j < -tol) return false;
    return true;
}

bool FiniteVariationPath::is_continuous(double tol) const {
    for (double j : jump)
        if (std::abs(j) > tol) return false;
    return true;
}

double total_variation(const FiniteVariationPath& p, double t) {
    int node = p.grid->node_at(t);
    if (node < 0) throw ValidationError("total_variation: t is not a grid node");
    return p.total_variation_to(node);
}

double integrate_against(const RcllPath& phi, const FiniteVariationPath& K) {
    if (phi.grid != K.grid) throw ValidationError("integrate_against: grid mismatch");
    const int N = K.grid->steps();
    double acc = 0.0;
    for (int i = 1; i <= N; ++i) acc += phi.left[i] * K.jump[i];
    for (int i = 0; i < N; ++i) acc += phi.right[i] * K.cont[i];
    return acc;
}

double truncation_time(const std::vector<double>& l_atoms,
                       const std::vector<double>& C,
                       const FiniteVariationPath& R,
                       double level,
                       const TimeGrid& grid) {
    const int N = grid.steps();
    double lsum = 0.0;
    for (int i = 0; i <= N; ++i) {
        lsum += l_atoms.empty() ? 0.0 : l_atoms[i];
        const double c = C.empty() ? 0.0 : C[i];
        if (lsum + c + R.total_variation_to(i) >= level) return grid.nodes[i];
    }
    return grid.horizon;
}

}  // namespace grbsde
