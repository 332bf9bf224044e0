#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "grbsde/coefficients.hpp"
#include "grbsde/ensemble.hpp"
#include "grbsde/paths.hpp"
#include "grbsde/transform.hpp"

namespace grbsde {

enum class BackendKind { tree, lsmc };
enum class Regime { zero, picard, concatenated, general };

struct BackendSpec {
    BackendKind kind = BackendKind::tree;
    int degree = 3;     // lsmc regression basis degree (polynomials in B_t)
    int paths = 10000;  // lsmc path count
    uint64_t seed = 1;
    int threads = 1;
    void validate() const;
};

struct SolveOptions {
    bool raw = false;          // skip H-admissibility, no transform rescale
    int max_iter = 60;         // picard sweeps per segment
    double tol = 1e-12;        // picard convergence (sup-norm gap)
    int ladder_depth = 8;      // max regularization level
    double ladder_tol = 1e-9;  // stop when level decrement falls below
    bool keep_ladder_fields = true;
    double jump_tol = 1e-12;   // jump_reflect fixed-point tolerance
};

// Conditional-expectation backend: exact on the recombining tree, regression
// (least-squares Monte Carlo) on path ensembles.
class CondExpEngine {
  public:
    CondExpEngine(const BrownianEnsemble& ens, const BackendSpec& spec);
    // ey[s] = E[next | state s at `level`], z[s] = E[next dB | state]/dt
    void step(int level, const std::vector<double>& next_left,
              std::vector<double>& ey, std::vector<double>& z) const;
    int states(int level) const { return ens_->states(level); }
    const BrownianEnsemble& ensemble() const { return *ens_; }

  private:
    const BrownianEnsemble* ens_;
    BackendSpec spec_;
};

// Node-by-state arrays of a solved field over the whole ensemble.
struct SolveField {
    const TimeGrid* grid = nullptr;
    const BrownianEnsemble* ens = nullptr;
    std::vector<std::vector<double>> y_right, y_left;     // [node][state]
    std::vector<std::vector<double>> z;                   // [interval][state]
    std::vector<std::vector<double>> dkp_cont, dkm_cont;  // [interval][state]
    std::vector<std::vector<double>> dkp_jump, dkm_jump;  // [node][state]

    double y0() const { return y_right[0][0]; }
    double sup_distance(const SolveField& other) const;
    double max_signed_excess(const SolveField& other) const;  // max(this - other)
};

Solution extract_tree_track(const SolveField& f, const std::vector<int>& up_moves);
Solution extract_mc_track(const SolveField& f, int path);

struct Diagnostics {
    double lower_residual = 0, upper_residual = 0;  // expectation-weighted minimality
    double singularity_max = 0;
    double barrier_violation = 0;
    double identity_residual = 0;   // jump bookkeeping identity, worst node
    double jump_fix_residual = 0;   // worst jump_reflect fixed-point residual
    double kp_total = 0, km_total = 0;
};

struct SegmentRecord {
    int left_node = 0, right_node = 0;
    std::vector<double> gaps;  // per picard sweep
};

struct Counters {
    long condexp_steps = 0;     // backend conditional-expectation calls
    long jump_reflections = 0;  // per node-state reflection solves
    long picard_sweeps = 0;
};

struct LadderRecord {
    int level = 0;
    double sup_gap = 0;  // vs previous level
    bool monotone_ok = true;
    double kp_total = 0, km_total = 0;
    int sweeps = 0;
    bool implicit = false;
};

struct SolveReport {
    Regime regime = Regime::zero;
    SolveField field;
    Diagnostics diag;
    Counters counters;
    std::vector<SegmentRecord> segments;
    std::vector<LadderRecord> ladder;
    std::vector<SolveField> ladder_fields;  // filled when options request it
    bool rescaled = false;                  // solved through the exponential transform

    double y0() const { return field.y0(); }
    int max_picard_iters() const;
};

// One explicit backward step (exposed building block): y_tilde = E[next] +
// f(t_i, ., Z)dt + g dA + dR^c with the f/g argument at the conditional mean,
// or iterated to a per-step fixed point when `implicit` is set (3 sweeps).
void step_backward(const CondExpEngine& engine, const CoefficientSet& c, int level,
                   const std::vector<double>& next_left, bool implicit,
                   std::vector<double>& y_tilde, std::vector<double>& z);

SolveReport solve_zero_generator(const CoefficientSet& c, const BrownianEnsemble& ens,
                                 const BackendSpec& spec, const SolveOptions& opt = {});
SolveReport solve_lipschitz_picard(const CoefficientSet& c, const BrownianEnsemble& ens,
                                   const BackendSpec& spec, const SolveOptions& opt = {});
SolveReport solve_concatenated(const CoefficientSet& c, const BrownianEnsemble& ens,
                               const BackendSpec& spec, const SolveOptions& opt = {});
SolveReport solve_general(const CoefficientSet& c, const BrownianEnsemble& ens,
                          const BackendSpec& spec, const SolveOptions& opt = {});

// Front door: validates the normalized admissibility box unless raw;
// inadmissible deterministic data
// are rescaled through the exponential transform, solved, and mapped back.
SolveReport solve(const CoefficientSet& c, Regime regime, const BrownianEnsemble& ens,
                  const BackendSpec& spec, const SolveOptions& opt = {});

// Solve the transformed (auxiliary) problem directly on an ensemble.
SolveReport solve_transformed(const TransformedSet& ts, const TransformContext& ctx,
                              const BrownianEnsemble& ens, const BackendSpec& spec,
                              const SolveOptions& opt = {});

struct DynkinResult {
    double lower = 0, upper = 0;  // max-min and min-max over stop sets
    int positions = 0;
};

// Value of the discrete Dynkin game (zero generators) by exhaustive
// enumeration of one player's stopping sets with the exact best response for
// the other, in both directions. lower == upper certifies the value.
DynkinResult dynkin_value_bruteforce(const CoefficientSet& c, const BrownianEnsemble& ens,
                                     int max_positions = 22);

// Expected cumulative K at each (node, state): conditional expectation on the
// tree (pathwise cumulative is not node-measurable there), pathwise on mc.
std::vector<std::vector<double>> expected_cumulative_k(const SolveField& f, bool plus);

}  // namespace grbsde
