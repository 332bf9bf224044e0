#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grbsde/coefficients.hpp"
#include "grbsde/paths.hpp"

namespace grbsde {

// Deterministic node-sampled data the exponential transform consumes: the
// barriers, the realized semimartingale S, the witnesses, and the original
// generators bound to a fixed Brownian realization.
struct Realization {
    const TimeGrid* grid = nullptr;
    RcllPath L, U, S;
    std::vector<double> bpath;              // realized Brownian values per node
    std::vector<double> gamma;              // per node
    std::vector<double> eta, cwit, beta;    // per node
    std::vector<double> l_atoms;            // per node
    FiniteVariationPath V;                  // finite-variation part of S
    FiniteVariationPath A;                  // nondecreasing continuous
    double xi = 0.0;                        // = S_T by construction

    std::function<double(int, double, double)> f;  // (node, y, z), null -> 0
    std::function<double(int, double)> g;          // (node, y)
    std::function<double(int, double, double)> h;  // (node, x, y)

    double eta_at(int i) const { return eta.empty() ? 0.0 : eta[i]; }
    double cwit_at(int i) const { return cwit.empty() ? 0.0 : cwit[i]; }
    double beta_at(int i) const { return beta.empty() ? 0.0 : beta[i]; }
    double l_at(int i) const { return l_atoms.empty() ? 0.0 : l_atoms[i]; }
    double gamma_at(int i) const { return gamma.empty() ? 0.0 : gamma[i]; }

    void validate() const;
};

// Builds a Realization from a CoefficientSet with tabulated barriers and a
// Brownian path (node values). gamma integrates into S along that path.
Realization realize(const CoefficientSet& c, const std::vector<double>& bpath);

// Everything derived from the dominating process m: its continuous/jump
// split, eta-bar, A-bar and the regular (continuous) part of R-bar. The
// singular e^{3m^2} dm jumps of R-bar are kept in compensated form: they
// cancel against the same term in h-bar in every solver quantity.
struct TransformContext {
    const TimeGrid* grid = nullptr;
    Realization data;

    std::vector<double> m_right, m_left;  // m at t_i and t_i-
    std::vector<double> dm_cont;          // per interval, m_{(i+1)-} - m_i
    std::vector<double> etabar;           // per node: 2 e^{-m}(eta + gamma^2)
    std::vector<double> etabar_int;       // per interval: int etabar ds (m-linear quadrature)
    FiniteVariationPath m;                // assembled split
    FiniteVariationPath Abar;             // continuous, 2(e^{-m_i} - e^{-m_{(i+1)-}})
    FiniteVariationPath Rbar_regular;     // 1/2 Abar + 1/2 int etabar, continuous

    double delta_m(int node) const { return m.jump[node]; }
    double abar_total() const { return Abar.final_value(); }
    double etabar_total() const;
    double max_m() const { return m_right.back(); }
};

TransformContext build_m(const Realization& c);

// The transformed datum of the auxiliary equation: barred barriers and
// terminal, the barred coefficients, and the computational (compensated)
// accessors the solver uses.
struct TransformedSet {
    const TimeGrid* grid = nullptr;
    double xibar = 0.0;  // exactly 0
    RcllPath Lbar, Ubar;

    // formula-normalized accessors (used by the bound harness)
    std::function<double(int, double, double)> fbar;   // (node, ybar, zbar)
    std::function<double(int, double)> gbar;           // (interval, ybar)
    std::function<double(int, double, double)> hbar_compensated;  // h-bar + e^{3m^2} dm
    // signed margin of fbar >= -etabar - e^{2m^2}|z|^2, evaluated in extended
    // precision so the e^{2m^2} and 1/e_y scales cancel before clamping
    std::function<double(int, double, double)> f_lower_margin;

    // computational accessors (cancellation applied analytically):
    //   drift over interval i at ybar: ftilde*dt + gtilde*dAbar  (== fbar*dt
    //   + gbar*dAbar + dRbar_regular), and jump shift = htilde (== hbar + dRbar_jump)
    std::function<double(int, double, double)> ftilde;  // (node, ybar, zbar)
    std::function<double(int, double)> gtilde;          // (interval, ybar)
    std::function<double(int, double, double)> htilde;  // (node, xbar, ybar)
};

TransformedSet forward_transform(const Realization& c, const TransformContext& ctx);

// Remark 3.3: map a barred (Y, Z) back; K's continuous parts are rescaled,
// jumps rebuilt from the original-problem jump formulas.
Solution inverse_transform(const Solution& barred, const TransformContext& ctx);

// Forward map of an admissible original-problem (Y, Z) trajectory (the
// round-trip partner of inverse_transform).
Solution forward_solution(const Solution& orig, const TransformContext& ctx);

struct BoundReportEntry {
    std::string id;
    double worst_margin;
    double arg_s, arg_y, arg_z;  // witness of the worst margin
};

// Samples (s, y, z) triples and reports the worst signed margin of each
// transformed-data inequality; margins >= -1e-12 everywhere means pass.
// The sampling boxes default to y in [-2,2], z in [-3,3] (covering the unit
// barrier range with margin); every 4th sample pins z = 0, where the
// f-inequalities are tight.
struct BoundSampling {
    double y_lo = -2.0, y_hi = 2.0;
    double z_lo = -3.0, z_hi = 3.0;
};
std::vector<BoundReportEntry> verify_bounds(const TransformedSet& ts,
                                            const TransformContext& ctx,
                                            int samples, uint64_t seed,
                                            const BoundSampling& box = {});

bool bounds_pass(const std::vector<BoundReportEntry>& report, double tol = 1e-12);

}  // namespace grbsde
