#pragma once

#include <string>
#include <vector>

#include "grbsde/coefficients.hpp"
#include "grbsde/solver.hpp"

namespace grbsde {

// A pair of coefficient sets sharing a grid and ensemble, claimed to satisfy
// the comparison-theorem hypotheses with c1 the dominated side.
struct ComparisonCase {
    const CoefficientSet* c1 = nullptr;
    const CoefficientSet* c2 = nullptr;
    Regime regime = Regime::concatenated;
};

struct HypothesisMargin {
    std::string id;      // e.g. "f1<=f2_along_sol1"
    double margin;       // worst signed margin, >= 0 passes
    int node = -1, state = -1;
};

// Evaluates the ordering hypotheses along the solved paths; report-only.
std::vector<HypothesisMargin> validate_hypotheses(const ComparisonCase& cmp,
                                                  const SolveReport& s1,
                                                  const SolveReport& s2,
                                                  const BrownianEnsemble& ens);

struct ComparisonReport {
    std::vector<HypothesisMargin> hypotheses;
    bool hypotheses_ok = false;

    double worst_y_violation = 0.0;  // max(Y1 - Y2), conclusion needs <= tol
    int witness_node = -1, witness_state = -1;
    std::size_t violation_count = 0;
    std::size_t pair_count = 0;
    double violation_fraction = 0.0;

    double worst_measure_violation = 0.0;  // indicator-restricted K ordering
    bool passed(double tol) const { return hypotheses_ok && worst_y_violation <= tol; }

    SolveReport sol1, sol2;
};

// Solves both sides and asserts the ordered conclusions: Y1 <= Y2 + tol
// everywhere, and the reflecting-measure ordering restricted to nodes where
// the barriers coincide (equality tolerance 1e-12).
ComparisonReport check_comparison(const ComparisonCase& cmp, const BrownianEnsemble& ens,
                                  const BackendSpec& spec, const SolveOptions& opt = {},
                                  double tol = 1e-10);

}  // namespace grbsde
