#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grbsde/paths.hpp"
#include "grbsde/time_grid.hpp"

namespace grbsde {

// What a coefficient evaluation is allowed to see at a node (adaptedness is
// structural: node index, node time, Brownian value on this node/path).
struct StepContext {
    int node;
    double t;
    double b;
};

using GenFn = std::function<double(const StepContext&, double y, double z)>;
using ScalarFn = std::function<double(const StepContext&, double y)>;
using JumpFn = std::function<double(const StepContext&, double x, double y)>;
using PathFn = std::function<double(const StepContext&)>;

// Barrier as a function of the node state, with explicit left limits at its
// declared jump nodes. A deterministic tabulation is attached when the
// barrier does not depend on the Brownian state (required by the transform).
struct BarrierModel {
    PathFn right;
    PathFn left;                  // null -> same as right
    std::vector<int> jump_nodes;  // nodes where left may differ from right
    std::optional<RcllPath> table;

    double value(const StepContext& c) const { return right(c); }
    double left_value(const StepContext& c) const { return left ? left(c) : right(c); }
    bool has_jump(int node) const;
    static BarrierModel constant(double v);
    static BarrierModel tabulated(RcllPath path);
};

// Full GRBSDE datum: terminal xi, generators f/g/h, driving processes A and
// R, barriers L/U, bound witnesses, and the between-barriers semimartingale
// witness S = S0 + V + int gamma dB.
struct CoefficientSet {
    const TimeGrid* grid = nullptr;

    PathFn xi;          // terminal value (null -> 0); convention L_T = xi = U_T
    GenFn f;            // null -> 0
    ScalarFn g;         // null -> 0
    JumpFn h;           // null -> 0
    bool f_zdep = true; // false lets the ladder use the exact 1-d envelope
    double f_lip = 0.0; // declared Lipschitz constants (picard regime)
    double g_lip = 0.0;

    std::vector<double> eta, cwit, beta;  // witnesses per node (rcll, piecewise const)
    std::vector<double> l_atoms;          // per-node atoms bounding |h|

    FiniteVariationPath A;  // nondecreasing, continuous
    FiniteVariationPath R;  // signed forcing

    BarrierModel L, U;
    std::vector<int> mark_order;  // enumeration T_1, T_2, ... of h's jump nodes

    // semimartingale witness (deterministic components)
    bool has_semimartingale = false;
    double S0 = 0.0;
    FiniteVariationPath V;
    std::vector<double> gamma;  // per node

    bool f_zero() const { return !f; }
    bool g_zero() const { return !g; }
    bool h_zero() const { return !h; }

    double eta_at(int i) const { return eta.empty() ? 0.0 : eta[i]; }
    double cwit_at(int i) const { return cwit.empty() ? 0.0 : cwit[i]; }
    double beta_at(int i) const { return beta.empty() ? 0.0 : beta[i]; }
    double l_at(int i) const { return l_atoms.empty() ? 0.0 : l_atoms[i]; }
    double gamma_at(int i) const { return gamma.empty() ? 0.0 : gamma[i]; }

    void validate() const;               // structural checks (throws ValidationError)
    bool h_box_admissible(double tol = 1e-12) const;  // unit barrier box, tabulated only
};

// ---- built-in generator catalog (shared by CLI and tests) ----

struct GeneratorInfo {
    std::string family;  // f | g | h | barrier | xi
    std::string name;
    std::string params;  // human-readable schema
};

std::vector<GeneratorInfo> generator_catalog();  // sorted, stable

using Params = std::map<std::string, double>;

GenFn make_f_generator(const std::string& name, const Params& p);
ScalarFn make_g_generator(const std::string& name, const Params& p);
JumpFn make_h_generator(const std::string& name, const Params& p, const TimeGrid& grid,
                        const std::vector<int>& marks);
BarrierModel make_barrier_generator(const std::string& name, const Params& p,
                                    const TimeGrid& grid, bool is_upper);
PathFn make_xi_generator(const std::string& name, const Params& p);

// Growth witnesses implied by a named f/g/h generator (witnesses are data,
// so the catalog supplies them alongside the function).
void witness_for_f(const std::string& name, const Params& p, double& eta, double& cw);
double witness_for_g(const std::string& name, const Params& p);
double witness_for_h(const std::string& name, const Params& p);

}  // namespace grbsde
