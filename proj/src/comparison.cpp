#include "grbsde/comparison.hpp"

#include <algorithm>
#include <cmath>

#include "grbsde/common.hpp"
#include "grbsde/reflection.hpp"

namespace grbsde {

namespace {

struct MarginAcc {
    double margin = 1e308;
    int node = -1, state = -1;
    void note(double m, int i, int s) {
        if (m < margin) {
            margin = m;
            node = i;
            state = s;
        }
    }
};

StepContext ctx_of(const CoefficientSet& c, const BrownianEnsemble& ens, int node, int s) {
    return StepContext{node, c.grid->nodes[node], ens.brownian(node, s)};
}

}  // namespace

std::vector<HypothesisMargin> validate_hypotheses(const ComparisonCase& cmp,
                                                  const SolveReport& s1,
                                                  const SolveReport& s2,
                                                  const BrownianEnsemble& ens) {
    const CoefficientSet& c1 = *cmp.c1;
    const CoefficientSet& c2 = *cmp.c2;
    const int N = c1.grid->steps();

    MarginAcc d1_box, d1_cross, d2_a, d2_r, d3a, d4a, d5a, d5b, d5c, dxi;

    // terminal ordering
    for (int s = 0; s < ens.states(N); ++s) {
        const double xi1 = c1.xi ? c1.xi(ctx_of(c1, ens, N, s)) : 0.0;
        const double xi2 = c2.xi ? c2.xi(ctx_of(c2, ens, N, s)) : 0.0;
        dxi.note(xi2 - xi1, N, s);
    }

    const FiniteVariationPath R1 = c1.R.grid ? c1.R : FiniteVariationPath::zero(*c1.grid);
    const FiniteVariationPath R2 = c2.R.grid ? c2.R : FiniteVariationPath::zero(*c2.grid);
    const FiniteVariationPath A1 = c1.A.grid ? c1.A : FiniteVariationPath::zero(*c1.grid);
    const FiniteVariationPath A2 = c2.A.grid ? c2.A : FiniteVariationPath::zero(*c2.grid);

    d2_a.note(1.0 - A2.final_value(), N, -1);
    for (int i = 0; i < N; ++i) d2_r.note(R2.cont[i] - R1.cont[i], i, -1);
    for (int i = 1; i <= N; ++i) d2_r.note(R2.jump[i] - R1.jump[i], i, -1);

    for (int i = 0; i <= N; ++i) {
        for (int s = 0; s < ens.states(i); ++s) {
            const StepContext ctx1 = ctx_of(c1, ens, i, s);
            const double y1 = s1.field.y_right[i][s];
            const double y2 = s2.field.y_right[i][s];
            const double L1 = (i == N) ? y1 : c1.L.value(ctx1);
            const double U1 = (i == N) ? y1 : c1.U.value(ctx1);
            const double L2 = (i == N) ? y2 : c2.L.value(ctx1);
            const double U2 = (i == N) ? y2 : c2.U.value(ctx1);

            // barrier hypotheses: L1 <= Y2, Y1 <= U2, box width <= 2
            d1_cross.note(y2 - L1, i, s);
            d1_cross.note(U2 - y1, i, s);
            d1_box.note(2.0 - (std::min(U1, U2) - std::max(L1, L2)), i, s);

            if (i < N) {
                const double z1 = s1.field.z[i][s];
                // generator ordering along the first solution's arguments
                const double f1v = c1.f ? c1.f(ctx1, y1, z1) : 0.0;
                const double f2v = c2.f ? c2.f(ctx1, y1, z1) : 0.0;
                d3a.note(f2v - f1v, i, s);
                // g1 dA1 <= g2 dA2 incrementwise
                const double g1v = c1.g ? c1.g(ctx1, y1) : 0.0;
                const double g2v = c2.g ? c2.g(ctx1, y1) : 0.0;
                d4a.note(g2v * A2.cont[i] - g1v * A1.cont[i], i, s);
            }

            if (i >= 1) {
                const double yl1 = s1.field.y_left[i][s];
                // jump-coefficient ordering at the first solution's arguments
                const double h1v = c1.h ? c1.h(ctx1, yl1, y1) : 0.0;
                const double h2v = c2.h ? c2.h(ctx1, yl1, y1) : 0.0;
                d5a.note(h2v - h1v, i, s);
                // y + h2 nondecreasing (sampled at the solved points)
                if (c2.h) {
                    const double lo = std::min(y1, y2), hi = std::max(y1, y2);
                    const double vlo = lo + c2.h(ctx1, yl1, lo);
                    const double vhi = hi + c2.h(ctx1, yl1, hi);
                    d5b.note(vhi - vlo, i, s);
                } else {
                    d5b.note(0.0, i, s);
                }
                // Y2 must satisfy the maximal fixed-point identity at marks
                if (c1.grid->is_marked(i) || R2.jump[i] != 0.0) {
                    const double y2r = s2.field.y_right[i][s];
                    std::function<double(double)> slice;
                    if (c2.h) slice = [&c2, ctx1, y2r](double x) { return c2.h(ctx1, x, y2r); };
                    JumpReflectResult jr = jump_reflect(
                        y2r, slice, R2.jump[i], c2.L.left_value(ctx1), c2.U.left_value(ctx1));
                    d5c.note(1e-9 - std::abs(s2.field.y_left[i][s] - jr.y_left), i, s);
                }
            }
        }
    }

    std::vector<HypothesisMargin> out;
    auto push = [&out](const std::string& id, const MarginAcc& a) {
        out.push_back({id, a.margin, a.node, a.state});
    };
    push("xi1<=xi2", dxi);
    push("box_width<=2", d1_box);
    push("cross_barriers", d1_cross);
    push("A2_T<=1", d2_a);
    push("dR1<=dR2", d2_r);
    push("f1<=f2_along_sol1", d3a);
    push("g1dA1<=g2dA2", d4a);
    push("h1<=h2_along_sol1", d5a);
    push("y+h2_nondecreasing", d5b);
    push("max_fixed_point_on_sol2", d5c);
    return out;
}

ComparisonReport check_comparison(const ComparisonCase& cmp, const BrownianEnsemble& ens,
                                  const BackendSpec& spec, const SolveOptions& opt,
                                  double tol) {
    ComparisonReport rep;
    rep.sol1 = solve(*cmp.c1, cmp.regime, ens, spec, opt);
    rep.sol2 = solve(*cmp.c2, cmp.regime, ens, spec, opt);

    rep.hypotheses = validate_hypotheses(cmp, rep.sol1, rep.sol2, ens);
    rep.hypotheses_ok = true;
    for (const auto& h : rep.hypotheses)
        if (h.margin < -1e-9) rep.hypotheses_ok = false;

    const int N = cmp.c1->grid->steps();
    rep.worst_y_violation = -1e308;
    for (int i = 0; i <= N; ++i) {
        for (int s = 0; s < ens.states(i); ++s) {
            const double excess = rep.sol1.field.y_right[i][s] - rep.sol2.field.y_right[i][s];
            ++rep.pair_count;
            if (excess > tol) ++rep.violation_count;
            if (excess > rep.worst_y_violation) {
                rep.worst_y_violation = excess;
                rep.witness_node = i;
                rep.witness_state = s;
            }
        }
    }
    rep.violation_fraction =
        rep.pair_count ? static_cast<double>(rep.violation_count) / rep.pair_count : 0.0;

    // measure ordering at barrier-coincidence supports:
    //   1_{U1- = U2-} dK1- <= dK2-  and  1_{L1- = L2-} dK2+ <= dK1+
    const double eq_tol = 1e-12;
    double worst = 0.0;
    for (int i = 0; i <= N; ++i) {
        for (int s = 0; s < ens.states(i); ++s) {
            const StepContext ctx = ctx_of(*cmp.c1, ens, i, s);
            if (i >= 1) {
                if (std::abs(cmp.c1->U.left_value(ctx) - cmp.c2->U.left_value(ctx)) <= eq_tol)
                    worst = std::max(worst, rep.sol1.field.dkm_jump[i][s] -
                                               rep.sol2.field.dkm_jump[i][s]);
                if (std::abs(cmp.c1->L.left_value(ctx) - cmp.c2->L.left_value(ctx)) <= eq_tol)
                    worst = std::max(worst, rep.sol2.field.dkp_jump[i][s] -
                                               rep.sol1.field.dkp_jump[i][s]);
            }
            if (i < N) {
                if (std::abs(cmp.c1->U.value(ctx) - cmp.c2->U.value(ctx)) <= eq_tol)
                    worst = std::max(worst, rep.sol1.field.dkm_cont[i][s] -
                                               rep.sol2.field.dkm_cont[i][s]);
                if (std::abs(cmp.c1->L.value(ctx) - cmp.c2->L.value(ctx)) <= eq_tol)
                    worst = std::max(worst, rep.sol2.field.dkp_cont[i][s] -
                                               rep.sol1.field.dkp_cont[i][s]);
            }
        }
    }
    rep.worst_measure_violation = worst;
    return rep;
}

}  // namespace grbsde
