#include "grbsde/solver.hpp"

#include <algorithm>
#include <cmath>

#include "grbsde/approx.hpp"
#include "grbsde/common.hpp"
#include "grbsde/reflection.hpp"

namespace grbsde {

void BackendSpec::validate() const {
    if (kind == BackendKind::lsmc) {
        if (degree < 0) throw ValidationError("BackendSpec: degree must be >= 0");
        if (paths < 10 * (degree + 1))
            throw ValidationError("BackendSpec: lsmc needs M >= 10 * basis dimension");
    }
}

// ------------------------------------------------------------------ backend

namespace {

// Least-squares fit of y on z-scored monomials of x, evaluated back at x.
void lsmc_fit_predict(const std::vector<double>& x, const std::vector<double>& y,
                      int degree, std::vector<double>& pred) {
    const size_t M = x.size();
    long double mean = 0.0L;
    for (double v : x) mean += v;
    mean /= static_cast<long double>(M);
    long double var = 0.0L;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<long double>(M);
    const long double sd = sqrtl(var);

    const int K = (sd < 1e-150L) ? 1 : degree + 1;
    std::vector<std::vector<long double>> G(K, std::vector<long double>(K, 0.0L));
    std::vector<long double> rhs(K, 0.0L);
    std::vector<long double> phi(K);
    for (size_t p = 0; p < M; ++p) {
        const long double u = (K == 1) ? 0.0L : (x[p] - mean) / sd;
        phi[0] = 1.0L;
        for (int k = 1; k < K; ++k) phi[k] = phi[k - 1] * u;
        for (int k = 0; k < K; ++k) {
            rhs[k] += phi[k] * y[p];
            for (int l = k; l < K; ++l) G[k][l] += phi[k] * phi[l];
        }
    }
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < k; ++l) G[k][l] = G[l][k];

    // gaussian elimination with partial pivoting
    std::vector<int> perm(K);
    for (int k = 0; k < K; ++k) perm[k] = k;
    for (int col = 0; col < K; ++col) {
        int piv = col;
        for (int r = col + 1; r < K; ++r)
            if (fabsl(G[r][col]) > fabsl(G[piv][col])) piv = r;
        if (fabsl(G[piv][col]) < 1e-12L * static_cast<long double>(M))
            throw PropertyViolation("lsmc regression: rank-deficient design matrix");
        std::swap(G[col], G[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (int r = col + 1; r < K; ++r) {
            const long double fac = G[r][col] / G[col][col];
            for (int cc = col; cc < K; ++cc) G[r][cc] -= fac * G[col][cc];
            rhs[r] -= fac * rhs[col];
        }
    }
    std::vector<long double> coef(K, 0.0L);
    for (int r = K - 1; r >= 0; --r) {
        long double acc = rhs[r];
        for (int cc = r + 1; cc < K; ++cc) acc -= G[r][cc] * coef[cc];
        coef[r] = acc / G[r][r];
    }

    pred.resize(M);
    for (size_t p = 0; p < M; ++p) {
        const long double u = (K == 1) ? 0.0L : (x[p] - mean) / sd;
        long double acc = 0.0L, mono = 1.0L;
        for (int k = 0; k < K; ++k) {
            acc += coef[k] * mono;
            mono *= u;
        }
        pred[p] = static_cast<double>(acc);
    }
}

}  // namespace

CondExpEngine::CondExpEngine(const BrownianEnsemble& ens, const BackendSpec& spec)
    : ens_(&ens), spec_(spec) {
    spec.validate();
    if (spec.kind == BackendKind::tree && ens.mode != EnsembleMode::tree)
        throw ValidationError("CondExpEngine: tree backend needs a tree ensemble");
    if (spec.kind == BackendKind::lsmc && ens.mode != EnsembleMode::monte_carlo)
        throw ValidationError("CondExpEngine: lsmc backend needs a monte_carlo ensemble");
}

void CondExpEngine::step(int level, const std::vector<double>& next_left,
                         std::vector<double>& ey, std::vector<double>& z) const {
    const double dt = ens_->grid->dt(level);
    if (spec_.kind == BackendKind::tree) {
        const int n = level + 1;
        ey.resize(n);
        z.resize(n);
        for (int k = 0; k < n; ++k) {
            ey[k] = 0.5 * (next_left[k] + next_left[k + 1]);
            z[k] = (next_left[k + 1] - next_left[k]) / (2.0 * ens_->sqrt_dt);
        }
        return;
    }
    const int M = ens_->paths;
    const std::vector<double>& x = ens_->bvalues[level];
    lsmc_fit_predict(x, next_left, spec_.degree, ey);
    std::vector<double> w(M);
    for (int p = 0; p < M; ++p) w[p] = next_left[p] * ens_->increments[level][p] / dt;
    lsmc_fit_predict(x, w, spec_.degree, z);
}

// -------------------------------------------------------------- solve field

double SolveField::sup_distance(const SolveField& other) const {
    double d = 0.0;
    for (size_t i = 0; i < y_right.size(); ++i)
        for (size_t s = 0; s < y_right[i].size(); ++s)
            d = std::max(d, std::abs(y_right[i][s] - other.y_right[i][s]));
    return d;
}

double SolveField::max_signed_excess(const SolveField& other) const {
    double d = -1e308;
    for (size_t i = 0; i < y_right.size(); ++i)
        for (size_t s = 0; s < y_right[i].size(); ++s)
            d = std::max(d, y_right[i][s] - other.y_right[i][s]);
    return d;
}

Solution extract_tree_track(const SolveField& f, const std::vector<int>& up_moves) {
    const int N = f.grid->steps();
    Solution sol;
    sol.Y = RcllPath::constant(*f.grid, 0.0);
    sol.Z.assign(N, 0.0);
    sol.Kplus = FiniteVariationPath::zero(*f.grid);
    sol.Kminus = FiniteVariationPath::zero(*f.grid);
    int state = 0;
    for (int i = 0; i <= N; ++i) {
        sol.Y.right[i] = f.y_right[i][state];
        sol.Y.left[i] = f.y_left[i][state];
        sol.Kplus.jump[i] = f.dkp_jump[i][state];
        sol.Kminus.jump[i] = f.dkm_jump[i][state];
        if (i < N) {
            sol.Z[i] = f.z[i][state];
            sol.Kplus.cont[i] = f.dkp_cont[i][state];
            sol.Kminus.cont[i] = f.dkm_cont[i][state];
            state += up_moves[i] ? 1 : 0;
        }
    }
    return sol;
}

Solution extract_mc_track(const SolveField& f, int path) {
    const int N = f.grid->steps();
    Solution sol;
    sol.Y = RcllPath::constant(*f.grid, 0.0);
    sol.Z.assign(N, 0.0);
    sol.Kplus = FiniteVariationPath::zero(*f.grid);
    sol.Kminus = FiniteVariationPath::zero(*f.grid);
    for (int i = 0; i <= N; ++i) {
        sol.Y.right[i] = f.y_right[i][path];
        sol.Y.left[i] = f.y_left[i][path];
        sol.Kplus.jump[i] = f.dkp_jump[i][path];
        sol.Kminus.jump[i] = f.dkm_jump[i][path];
        if (i < N) {
            sol.Z[i] = f.z[i][path];
            sol.Kplus.cont[i] = f.dkp_cont[i][path];
            sol.Kminus.cont[i] = f.dkm_cont[i][path];
        }
    }
    return sol;
}

int SolveReport::max_picard_iters() const {
    int m = 0;
    for (const auto& s : segments) m = std::max(m, static_cast<int>(s.gaps.size()));
    return m;
}

// ------------------------------------------------------- internal problem

namespace {

using HSlice = std::function<double(double)>;

// Everything the backward sweep needs, regime-independent.
struct Problem {
    const TimeGrid* grid = nullptr;
    const BrownianEnsemble* ens = nullptr;

    std::function<double(int, int)> Lr, Ur, Ll, Ul;  // (node, state)
    std::vector<double> xi_vals;                     // per terminal state

    // drift over interval i at frozen (y, z); includes f dt + g dA + dR^c
    std::function<double(int, int, double, double)> drift;
    bool has_fg = false;
    double drift_contraction = 0.0;  // lip * (T + A_T), picard stability gauge

    // jump shift slice at a node: x -> h(t,x,y_right) (+ huge constant for a
    // compensated inactive transform mark); null means pure dR jump
    std::function<HSlice(int, int, double)> h_slice;
    std::vector<double> r_jump;  // per node
};

std::vector<std::vector<double>> weight_rows(const BrownianEnsemble& ens, int N) {
    std::vector<std::vector<double>> w(N + 1);
    if (ens.mode == EnsembleMode::monte_carlo) {
        for (int i = 0; i <= N; ++i) w[i].assign(ens.paths, 1.0 / ens.paths);
        return w;
    }
    w[0] = {1.0};
    for (int i = 0; i < N; ++i) {
        w[i + 1].assign(i + 2, 0.0);
        for (int k = 0; k <= i; ++k) {
            w[i + 1][k] += 0.5 * w[i][k];
            w[i + 1][k + 1] += 0.5 * w[i][k];
        }
    }
    return w;
}

struct Sweeper {
    const Problem& prob;
    const CondExpEngine& engine;
    const SolveOptions& opt;
    SolveField& field;
    double worst_fix_residual = 0.0;
    Counters counters;

    void reflect_at(int node) {
        const int ns = prob.ens->states(node);
        counters.jump_reflections += ns;
        for (int s = 0; s < ns; ++s) {
            HSlice slice = prob.h_slice ? prob.h_slice(node, s, field.y_right[node][s])
                                        : HSlice{};
            JumpReflectResult jr =
                jump_reflect(field.y_right[node][s], slice, prob.r_jump[node],
                             prob.Ll(node, s), prob.Ul(node, s), opt.jump_tol);
            field.y_left[node][s] = jr.y_left;
            field.dkp_jump[node][s] = jr.dkp;
            field.dkm_jump[node][s] = jr.dkm;
            worst_fix_residual = std::max(worst_fix_residual, jr.fix_residual);
        }
    }

    // Solve nodes [a, b-1] given y_left[b]; modes: explicit args (no f/g
    // dependence handled), picard freeze, or per-step implicit.
    SegmentRecord solve_segment(int a, int b, bool implicit_steps) {
        SegmentRecord rec;
        rec.left_node = a;
        rec.right_node = b;

        std::vector<std::vector<double>> y_prev, z_prev;
        y_prev.assign(b, {});
        z_prev.assign(b, {});
        for (int i = a; i < b; ++i) {
            y_prev[i].assign(prob.ens->states(i), 0.0);
            z_prev[i].assign(prob.ens->states(i), 0.0);
        }

        const int max_sweeps = (prob.has_fg && !implicit_steps) ? opt.max_iter : 1;
        std::vector<double> ey, zz;
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            double gap = 0.0;
            ++counters.picard_sweeps;
            for (int i = b - 1; i >= a; --i) {
                engine.step(i, field.y_left[i + 1], ey, zz);
                ++counters.condexp_steps;
                const int ns = prob.ens->states(i);
                for (int s = 0; s < ns; ++s) {
                    const double L = prob.Lr(i, s), U = prob.Ur(i, s);
                    double arg;
                    if (!prob.has_fg) {
                        arg = ey[s] + prob.drift(i, s, ey[s], zz[s]);
                    } else if (implicit_steps) {
                        arg = implicit_arg(i, s, ey[s], zz[s], L, U);
                    } else {
                        arg = ey[s] + prob.drift(i, s, y_prev[i][s], z_prev[i][s]);
                    }
                    ProjectionResult pr = skorokhod_project(arg, L, U);
                    gap = std::max(gap, std::abs(pr.value - y_prev[i][s]));
                    field.y_right[i][s] = pr.value;
                    field.dkp_cont[i][s] = pr.dkp;
                    field.dkm_cont[i][s] = pr.dkm;
                    field.z[i][s] = zz[s];
                }
                if (i > 0)
                    reflect_at(i);
                else
                    field.y_left[0] = field.y_right[0];
            }
            if (prob.has_fg && !implicit_steps) {
                rec.gaps.push_back(gap);
                for (int i = a; i < b; ++i) {
                    y_prev[i] = field.y_right[i];
                    z_prev[i] = field.z[i];
                }
                if (gap <= opt.tol) return rec;
            } else {
                return rec;
            }
        }
        throw PropertyViolation("picard iteration did not converge; last gap " +
                                std::to_string(rec.gaps.back()));
    }

    // per-step implicit: find y with y = clip(ey + drift(y, z), L, U)
    double implicit_arg(int i, int s, double ey, double z, double L, double U) {
        auto image = [&](double y) { return ey + prob.drift(i, s, y, z); };
        double lo = L, hi = U;
        auto phi = [&](double y) { return y - clip(image(y), L, U); };
        if (phi(lo) >= 0.0) return image(lo);
        if (phi(hi) <= 0.0) return image(hi);
        for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (phi(mid) <= 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return image(lo);
    }
};

struct SweepResult {
    SolveField field;
    std::vector<SegmentRecord> segments;
    double jump_fix_residual = 0.0;
    Counters counters;
};

// Full backward induction: terminal, reflection at T, then segments split at
// the active jump marks, concatenating right to left.
SweepResult run_sweep(const Problem& prob, const CondExpEngine& engine,
                      const std::vector<int>& active_marks, const SolveOptions& opt,
                      bool implicit_steps) {
    const int N = prob.grid->steps();
    SweepResult out;
    SolveField& f = out.field;
    f.grid = prob.grid;
    f.ens = prob.ens;
    f.y_right.assign(N + 1, {});
    f.y_left.assign(N + 1, {});
    f.dkp_jump.assign(N + 1, {});
    f.dkm_jump.assign(N + 1, {});
    f.z.assign(N, {});
    f.dkp_cont.assign(N, {});
    f.dkm_cont.assign(N, {});
    for (int i = 0; i <= N; ++i) {
        const int ns = prob.ens->states(i);
        f.y_right[i].assign(ns, 0.0);
        f.y_left[i].assign(ns, 0.0);
        f.dkp_jump[i].assign(ns, 0.0);
        f.dkm_jump[i].assign(ns, 0.0);
        if (i < N) {
            f.z[i].assign(ns, 0.0);
            f.dkp_cont[i].assign(ns, 0.0);
            f.dkm_cont[i].assign(ns, 0.0);
        }
    }

    Sweeper sweeper{prob, engine, opt, f, 0.0, Counters{}};
    f.y_right[N] = prob.xi_vals;
    sweeper.reflect_at(N);

    std::vector<int> bounds;  // segment boundaries, descending
    for (int m : active_marks)
        if (m > 0 && m < N) bounds.push_back(m);
    std::sort(bounds.begin(), bounds.end(), std::greater<int>());

    int b = N;
    for (int m : bounds) {
        out.segments.push_back(sweeper.solve_segment(m, b, implicit_steps));
        sweeper.reflect_at(m);
        b = m;
    }
    out.segments.push_back(sweeper.solve_segment(0, b, implicit_steps));
    out.jump_fix_residual = sweeper.worst_fix_residual;
    out.counters = sweeper.counters;
    return out;
}

Problem make_problem(const CoefficientSet& c, const BrownianEnsemble& ens,
                     const GenFn& f, const ScalarFn& g, const JumpFn& h,
                     const std::vector<int>& h_marks, double lip_gauge) {
    Problem p;
    p.grid = c.grid;
    p.ens = &ens;
    const int N = c.grid->steps();

    auto ctx_of = [grid = c.grid, e = &ens](int node, int state) {
        return StepContext{node, grid->nodes[node], e->brownian(node, state)};
    };

    p.xi_vals.assign(ens.states(N), 0.0);
    for (int s = 0; s < ens.states(N); ++s)
        p.xi_vals[s] = c.xi ? c.xi(ctx_of(N, s)) : 0.0;

    // terminal convention L_T = xi = U_T (right values only)
    p.Lr = [&c, ctx_of, N, xi = p.xi_vals](int i, int s) {
        return i == N ? xi[s] : c.L.value(ctx_of(i, s));
    };
    p.Ur = [&c, ctx_of, N, xi = p.xi_vals](int i, int s) {
        return i == N ? xi[s] : c.U.value(ctx_of(i, s));
    };
    p.Ll = [&c, ctx_of](int i, int s) { return c.L.left_value(ctx_of(i, s)); };
    p.Ul = [&c, ctx_of](int i, int s) { return c.U.left_value(ctx_of(i, s)); };

    const FiniteVariationPath A = c.A.grid ? c.A : FiniteVariationPath::zero(*c.grid);
    const FiniteVariationPath R = c.R.grid ? c.R : FiniteVariationPath::zero(*c.grid);

    p.has_fg = static_cast<bool>(f) || static_cast<bool>(g);
    p.drift = [f, g, A, R, ctx_of, grid = c.grid](int i, int s, double y, double z) {
        double d = R.cont[i];
        if (f) d += f(ctx_of(i, s), y, z) * grid->dt(i);
        if (g) d += g(ctx_of(i, s), y) * A.cont[i];
        return d;
    };
    p.drift_contraction = lip_gauge * (c.grid->horizon + A.final_value());

    p.r_jump.assign(N + 1, 0.0);
    for (int i = 0; i <= N; ++i) p.r_jump[i] = R.jump[i];

    if (h) {
        p.h_slice = [h, ctx_of, marks = h_marks](int node, int s, double y_r) -> HSlice {
            if (std::find(marks.begin(), marks.end(), node) == marks.end()) return {};
            return [h, ctx = ctx_of(node, s), y_r](double x) { return h(ctx, x, y_r); };
        };
    }
    return p;
}

Diagnostics compute_diagnostics(const SolveField& f, const Problem& prob) {
    Diagnostics d;
    const int N = prob.grid->steps();
    const auto w = weight_rows(*prob.ens, N);

    for (int i = 0; i <= N; ++i) {
        const int ns = prob.ens->states(i);
        for (int s = 0; s < ns; ++s) {
            if (i < N) {
                const double gap_lo = f.y_right[i][s] - prob.Lr(i, s);
                const double gap_hi = prob.Ur(i, s) - f.y_right[i][s];
                d.barrier_violation = std::max({d.barrier_violation, -gap_lo, -gap_hi});
                if (f.dkp_cont[i][s] > 0) d.lower_residual += w[i][s] * gap_lo * f.dkp_cont[i][s];
                if (f.dkm_cont[i][s] > 0) d.upper_residual += w[i][s] * gap_hi * f.dkm_cont[i][s];
                d.singularity_max =
                    std::max(d.singularity_max, std::min(f.dkp_cont[i][s], f.dkm_cont[i][s]));
                d.kp_total += w[i][s] * f.dkp_cont[i][s];
                d.km_total += w[i][s] * f.dkm_cont[i][s];
            }
            if (i >= 1) {
                const double gl = f.y_left[i][s] - prob.Ll(i, s);
                const double gh = prob.Ul(i, s) - f.y_left[i][s];
                d.barrier_violation = std::max({d.barrier_violation, -gl, -gh});
                if (f.dkp_jump[i][s] > 0) d.lower_residual += w[i][s] * gl * f.dkp_jump[i][s];
                if (f.dkm_jump[i][s] > 0) d.upper_residual += w[i][s] * gh * f.dkm_jump[i][s];
                d.singularity_max =
                    std::max(d.singularity_max, std::min(f.dkp_jump[i][s], f.dkm_jump[i][s]));
                d.kp_total += w[i][s] * f.dkp_jump[i][s];
                d.km_total += w[i][s] * f.dkm_jump[i][s];

                // jump bookkeeping: y_left = y_right + h + dR + dK+ - dK-
                double shift = prob.r_jump[i];
                if (prob.h_slice) {
                    HSlice slice = prob.h_slice(i, s, f.y_right[i][s]);
                    if (slice) shift += slice(f.y_left[i][s]);
                }
                if (std::abs(shift) < 1e250) {  // compensated-huge shifts wash out in float
                    const double recon =
                        f.y_right[i][s] + shift + f.dkp_jump[i][s] - f.dkm_jump[i][s];
                    d.identity_residual =
                        std::max(d.identity_residual, std::abs(f.y_left[i][s] - recon));
                }
            }
        }
    }
    return d;
}

}  // namespace

// ------------------------------------------------------------- regime API

void step_backward(const CondExpEngine& engine, const CoefficientSet& c, int level,
                   const std::vector<double>& next_left, bool implicit,
                   std::vector<double>& y_tilde, std::vector<double>& z) {
    std::vector<double> ey;
    engine.step(level, next_left, ey, z);
    const int ns = engine.states(level);
    const FiniteVariationPath A = c.A.grid ? c.A : FiniteVariationPath::zero(*c.grid);
    const FiniteVariationPath R = c.R.grid ? c.R : FiniteVariationPath::zero(*c.grid);
    y_tilde.resize(ns);
    for (int s = 0; s < ns; ++s) {
        StepContext ctx{level, c.grid->nodes[level], engine.ensemble().brownian(level, s)};
        double y_arg = ey[s];
        const int sweeps = implicit ? 3 : 1;
        double val = ey[s];
        for (int k = 0; k < sweeps; ++k) {
            val = ey[s] + R.cont[level];
            if (c.f) val += c.f(ctx, y_arg, z[s]) * c.grid->dt(level);
            if (c.g) val += c.g(ctx, y_arg) * A.cont[level];
            y_arg = val;
        }
        y_tilde[s] = val;
    }
}

namespace {

SolveReport finish_report(Regime regime, SweepResult&& sw, const Problem& prob) {
    SolveReport rep;
    rep.regime = regime;
    rep.field = std::move(sw.field);
    rep.segments = std::move(sw.segments);
    rep.counters = sw.counters;
    rep.diag = compute_diagnostics(rep.field, prob);
    rep.diag.jump_fix_residual = sw.jump_fix_residual;
    return rep;
}

}  // namespace

SolveReport solve_zero_generator(const CoefficientSet& c, const BrownianEnsemble& ens,
                                 const BackendSpec& spec, const SolveOptions& opt) {
    if (!c.f_zero() || !c.g_zero() || !c.h_zero())
        throw ValidationError("solve_zero_generator: requires f = g = h = 0");
    c.validate();
    CondExpEngine engine(ens, spec);
    Problem prob = make_problem(c, ens, nullptr, nullptr, nullptr, {}, 0.0);
    return finish_report(Regime::zero, run_sweep(prob, engine, {}, opt, false), prob);
}

SolveReport solve_lipschitz_picard(const CoefficientSet& c, const BrownianEnsemble& ens,
                                   const BackendSpec& spec, const SolveOptions& opt) {
    if (!c.h_zero())
        throw ValidationError("solve_lipschitz_picard: requires h = 0 (use concatenated)");
    c.validate();
    CondExpEngine engine(ens, spec);
    Problem prob = make_problem(c, ens, c.f, c.g, nullptr, {}, c.f_lip + c.g_lip);
    return finish_report(Regime::picard, run_sweep(prob, engine, {}, opt, false), prob);
}

SolveReport solve_concatenated(const CoefficientSet& c, const BrownianEnsemble& ens,
                               const BackendSpec& spec, const SolveOptions& opt) {
    c.validate();
    CondExpEngine engine(ens, spec);
    Problem prob = make_problem(c, ens, c.f, c.g, c.h, c.mark_order, c.f_lip + c.g_lip);
    const bool implicit = prob.has_fg && prob.drift_contraction >= 0.9;
    return finish_report(Regime::concatenated,
                         run_sweep(prob, engine, c.mark_order, opt, implicit), prob);
}

SolveReport solve_general(const CoefficientSet& c, const BrownianEnsemble& ens,
                          const BackendSpec& spec, const SolveOptions& opt) {
    c.validate();
    CondExpEngine engine(ens, spec);

    SolveReport rep;
    rep.regime = Regime::general;
    SolveField prev;

    for (int n = 0; n <= opt.ladder_depth; ++n) {
        LadderLevel level = make_ladder_level(c, n);
        Problem prob = make_problem(c, ens, level.f_n, level.g_n, level.h_n,
                                    level.active_jump_times, static_cast<double>(n));
        const bool implicit = prob.has_fg && prob.drift_contraction >= 0.9;
        SweepResult sw = run_sweep(prob, engine, level.active_jump_times, opt, implicit);

        LadderRecord lr;
        lr.level = n;
        lr.implicit = implicit;
        for (const auto& seg : sw.segments)
            lr.sweeps = std::max(lr.sweeps, static_cast<int>(seg.gaps.size()));

        if (n > 0) {
            lr.sup_gap = sw.field.sup_distance(prev);
            const double excess = sw.field.max_signed_excess(prev);
            lr.monotone_ok = excess <= 1e-12;
            if (!lr.monotone_ok)
                throw PropertyViolation("ladder monotonicity violated at level " +
                                        std::to_string(n) + " by " + std::to_string(excess));
        }

        Problem diag_prob = prob;
        Diagnostics diag = compute_diagnostics(sw.field, diag_prob);
        lr.kp_total = diag.kp_total;
        lr.km_total = diag.km_total;
        rep.ladder.push_back(lr);
        if (opt.keep_ladder_fields) rep.ladder_fields.push_back(sw.field);

        rep.counters.condexp_steps += sw.counters.condexp_steps;
        rep.counters.jump_reflections += sw.counters.jump_reflections;
        rep.counters.picard_sweeps += sw.counters.picard_sweeps;
        prev = sw.field;
        rep.field = std::move(sw.field);
        rep.segments = std::move(sw.segments);
        rep.diag = diag;
        rep.diag.jump_fix_residual = sw.jump_fix_residual;

        const bool exhausted =
            n >= static_cast<int>(c.mark_order.size()) && n >= 1 && lr.sup_gap <= opt.ladder_tol;
        if (exhausted) break;
    }
    return rep;
}

// ------------------------------------------------- transformed solve path

SolveReport solve_transformed(const TransformedSet& ts, const TransformContext& ctx,
                              const BrownianEnsemble& ens, const BackendSpec& spec,
                              const SolveOptions& opt) {
    CondExpEngine engine(ens, spec);
    const int N = ctx.grid->steps();

    // transform jump nodes: wherever m or S jumps, the auxiliary problem has
    // jump machinery (its h-bar support)
    std::vector<int> tmarks;
    for (int i = 1; i <= N; ++i)
        if (ctx.m.jump[i] != 0.0 ||
            ctx.data.S.right[i] != ctx.data.S.left[i] ||
            ctx.data.L.right[i] != ctx.data.L.left[i] ||
            ctx.data.U.right[i] != ctx.data.U.left[i])
            tmarks.push_back(i);

    SolveReport rep;
    rep.regime = Regime::general;
    SolveField prev;

    for (int n = 0; n <= opt.ladder_depth; ++n) {
        Problem prob;
        prob.grid = ctx.grid;
        prob.ens = &ens;
        prob.xi_vals.assign(ens.states(N), 0.0);
        prob.Lr = [&ts](int i, int) { return ts.Lbar.right[i]; };
        prob.Ur = [&ts](int i, int) { return ts.Ubar.right[i]; };
        prob.Ll = [&ts](int i, int) { return ts.Lbar.left[i]; };
        prob.Ul = [&ts](int i, int) { return ts.Ubar.left[i]; };
        prob.r_jump.assign(N + 1, 0.0);

        const int level = n;
        if (n >= 1) {
            prob.has_fg = true;
            prob.drift = [&ts, &ctx, level](int i, int, double y, double z) {
                auto fslice = [&](double p, const std::vector<double>& q) {
                    return ts.ftilde(i, p, q[0]);
                };
                // -fbar = etabar/2 - ftilde bounds the maximizer distance
                const double fbound = pos_part(0.5 * ctx.etabar[i] - ts.ftilde(i, y, z)) + 1e-300;
                const double fn = sup_convolution(fslice, level, y, {z}, fbound) -
                                  0.5 * ctx.etabar[i];
                auto gslice = [&](double p) { return ts.gtilde(i, p); };
                const double gn = sup_convolution_scalar(gslice, level, y, 1.0) - 0.5;
                // fbar_n dt + gbar_n dAbar + dRbar_regular
                return fn * ctx.grid->dt(i) + gn * ctx.Abar.cont[i] +
                       ctx.Rbar_regular.cont[i];
            };
        } else {
            prob.has_fg = false;
            prob.drift = [&ctx](int i, int, double, double) {
                return ctx.Rbar_regular.cont[i];  // f_0 = g_0 = 0, R stays
            };
        }
        prob.drift_contraction =
            n * (ctx.grid->horizon + ctx.Abar.final_value());

        // jump shift: active transform marks use the compensated h-tilde;
        // inactive nodes with dm > 0 keep the naked (huge) R-bar jump
        std::vector<int> active;
        for (int k = 0; k < std::min<int>(n, tmarks.size()); ++k) active.push_back(tmarks[k]);
        std::sort(active.begin(), active.end());
        prob.h_slice = [&ts, &ctx, active](int node, int, double y_r) -> HSlice {
            const bool is_active =
                std::find(active.begin(), active.end(), node) != active.end();
            if (is_active)
                return [&ts, node, y_r](double x) { return ts.htilde(node, x, y_r); };
            const double dm = ctx.m.jump[node];
            if (dm > 0.0) {
                const double shift = exp_capped(3.0 * ctx.m_right[node] * ctx.m_right[node] +
                                                std::log(dm));
                return [shift](double) { return shift; };
            }
            return {};
        };

        const bool implicit = prob.has_fg && prob.drift_contraction >= 0.9;
        SweepResult sw = run_sweep(prob, engine, active, opt, implicit);

        LadderRecord lr;
        lr.level = n;
        lr.implicit = implicit;
        if (n > 0) {
            lr.sup_gap = sw.field.sup_distance(prev);
            lr.monotone_ok = sw.field.max_signed_excess(prev) <= 1e-12;
        }
        rep.ladder.push_back(lr);

        rep.counters.condexp_steps += sw.counters.condexp_steps;
        rep.counters.jump_reflections += sw.counters.jump_reflections;
        rep.counters.picard_sweeps += sw.counters.picard_sweeps;
        prev = sw.field;
        rep.field = std::move(sw.field);
        rep.segments = std::move(sw.segments);
        Problem diag_prob = prob;
        rep.diag = compute_diagnostics(rep.field, diag_prob);
        rep.diag.jump_fix_residual = sw.jump_fix_residual;

        if (n >= static_cast<int>(tmarks.size()) && n >= 1 && lr.sup_gap <= opt.ladder_tol)
            break;
    }
    return rep;
}

// --------------------------------------------------------------- front door

namespace {

bool h_admissible(const CoefficientSet& c, const BrownianEnsemble& ens) {
    const int N = c.grid->steps();
    const double tol = 1e-9;
    // barrier box of the normalized problem, sampled across ensemble states
    for (int i = 0; i < N; ++i) {
        for (int s = 0; s < ens.states(i); ++s) {
            StepContext ctx{i, c.grid->nodes[i], ens.brownian(i, s)};
            const double l = c.L.value(ctx), u = c.U.value(ctx);
            if (l < -1 - tol || l > tol || u < -tol || u > 1 + tol) return false;
        }
    }
    // terminal: xi must be 0 in the normalized problem
    for (int s = 0; s < ens.states(N); ++s) {
        StepContext ctx{N, c.grid->horizon, ens.brownian(N, s)};
        if (c.xi && std::abs(c.xi(ctx)) > tol) return false;
    }
    // witness mass bounds of the normalized problem
    if (c.A.grid && c.A.final_value() > 1 + tol) return false;
    double eta_int = 0.0;
    for (int i = 0; i < N; ++i) eta_int += c.eta_at(i) * c.grid->dt(i);
    if (eta_int > 1 + tol) return false;
    return true;
}

}  // namespace

SolveReport solve(const CoefficientSet& c, Regime regime, const BrownianEnsemble& ens,
                  const BackendSpec& spec, const SolveOptions& opt) {
    if (!opt.raw && !h_admissible(c, ens)) {
        bool stochastic_s = false;
        for (double gk : c.gamma) stochastic_s |= (gk != 0.0);
        if (!c.L.table || !c.U.table || stochastic_s)
            throw ValidationError(
                "solve: data violate the normalized admissibility box; pass raw=true, or "
                "supply deterministic "
                "barriers (and gamma = 0) for the transform rescale");
        std::vector<double> flat(c.grid->steps() + 1, 0.0);
        Realization real = realize(c, flat);
        TransformContext tctx = build_m(real);
        TransformedSet ts = forward_transform(real, tctx);
        SolveReport barred = solve_transformed(ts, tctx, ens, spec, opt);

        // invert fieldwise (m and S are deterministic)
        SolveReport rep;
        rep.regime = regime;
        rep.rescaled = true;
        rep.ladder = barred.ladder;
        rep.counters = barred.counters;
        rep.segments = barred.segments;
        rep.field = barred.field;
        const int N = c.grid->steps();
        for (int i = 0; i <= N; ++i) {
            const double mr = tctx.m_right[i], ml = tctx.m_left[i];
            const double emsq = std::exp(mr * -mr);
            const double emsq_l = std::exp(ml * -ml);
            for (size_t s = 0; s < rep.field.y_right[i].size(); ++s) {
                const double ey = barred.field.y_right[i][s] + emsq;
                const double eyl = barred.field.y_left[i][s] + emsq_l;
                if (!(ey > 0) || !(eyl > 0))
                    throw PropertyViolation("rescale: barred solution violated its barrier");
                rep.field.y_right[i][s] =
                    std::log(ey) / mr + real.S.right[i] + mr;
                rep.field.y_left[i][s] =
                    std::log(eyl) / ml + real.S.left[i] + ml;
                if (i < N) {
                    const double scale = mr * ey;
                    rep.field.z[i][s] = barred.field.z[i][s] / scale + real.gamma_at(i);
                    rep.field.dkp_cont[i][s] = barred.field.dkp_cont[i][s] / scale;
                    rep.field.dkm_cont[i][s] = barred.field.dkm_cont[i][s] / scale;
                }
            }
        }
        for (size_t s = 0; s < rep.field.y_left[0].size(); ++s)
            rep.field.y_left[0][s] = rep.field.y_right[0][s];
        // rebuild jump increments from the original-problem jump formulas
        for (int i = 1; i <= N; ++i) {
            for (size_t s = 0; s < rep.field.y_right[i].size(); ++s) {
                StepContext ctx{i, c.grid->nodes[i], ens.brownian(i, static_cast<int>(s))};
                const double hval =
                    c.h ? c.h(ctx, rep.field.y_left[i][s], rep.field.y_right[i][s]) : 0.0;
                const double v = rep.field.y_right[i][s] + hval + (c.R.grid ? c.R.jump[i] : 0.0);
                rep.field.dkp_jump[i][s] = pos_part(real.L.left[i] - v);
                rep.field.dkm_jump[i][s] = pos_part(v - real.U.left[i]);
            }
        }
        Problem prob = make_problem(c, ens, c.f, c.g, c.h, c.mark_order, 0.0);
        rep.diag = compute_diagnostics(rep.field, prob);
        return rep;
    }

    switch (regime) {
        case Regime::zero:
            return solve_zero_generator(c, ens, spec, opt);
        case Regime::picard:
            return solve_lipschitz_picard(c, ens, spec, opt);
        case Regime::concatenated:
            return solve_concatenated(c, ens, spec, opt);
        case Regime::general:
            return solve_general(c, ens, spec, opt);
    }
    throw ValidationError("solve: unknown regime");
}

// -------------------------------------------------------------- dynkin game

namespace {

struct Positions {
    // unit ids laid out per (node, phase, state); -1 where no decision exists
    std::vector<std::vector<int>> right_unit;  // [node][state], nodes 0..N-1
    std::vector<std::vector<int>> left_unit;   // [node][state], nodes 1..N (jumpy only)
    int count = 0;
};

}  // namespace

DynkinResult dynkin_value_bruteforce(const CoefficientSet& c, const BrownianEnsemble& ens,
                                     int max_positions) {
    if (ens.mode != EnsembleMode::tree)
        throw ValidationError("dynkin_value_bruteforce: tree ensembles only");
    if (!c.f_zero() || !c.g_zero() || !c.h_zero())
        throw ValidationError("dynkin_value_bruteforce: zero generators only");
    const int N = c.grid->steps();
    if (N > 6) throw ValidationError("dynkin_value_bruteforce: depth > 6 rejected");

    const FiniteVariationPath R = c.R.grid ? c.R : FiniteVariationPath::zero(*c.grid);
    auto jumpy = [&](int node) {
        return R.jump[node] != 0.0 || c.L.has_jump(node) || c.U.has_jump(node);
    };

    auto ctx_of = [&](int node, int state) {
        return StepContext{node, c.grid->nodes[node], ens.brownian(node, state)};
    };
    std::vector<double> xi_vals(N + 1);
    for (int s = 0; s <= N; ++s) xi_vals[s] = c.xi ? c.xi(ctx_of(N, s)) : 0.0;

    Positions pos;
    pos.right_unit.assign(N + 1, {});
    pos.left_unit.assign(N + 1, {});
    for (int i = 0; i < N; ++i) {
        pos.right_unit[i].assign(i + 1, -1);
        for (int s = 0; s <= i; ++s) pos.right_unit[i][s] = pos.count++;
    }
    for (int i = 1; i <= N; ++i) {
        pos.left_unit[i].assign(i + 1, -1);
        for (int s = 0; s <= i; ++s) {
            bool decision = jumpy(i);
            if (i == N && !decision) {
                // the terminal is a decision point exactly when xi can exit
                // [L_{T-}, U_{T-}]: the convention pins only the right values
                StepContext ctx = ctx_of(N, s);
                decision = xi_vals[s] < c.L.left_value(ctx) || xi_vals[s] > c.U.left_value(ctx);
            }
            if (decision) pos.left_unit[i][s] = pos.count++;
        }
    }
    if (pos.count > max_positions)
        throw ValidationError("dynkin_value_bruteforce: too many stop positions (" +
                              std::to_string(pos.count) + ")");

    // value of the one-player best response against a fixed stop set
    auto dp = [&](uint64_t mask, bool opponent_maximizes) {
        std::vector<double> val = xi_vals;  // right values at level N
        for (int i = N; i >= 1; --i) {
            // left phase at node i
            std::vector<double> left(i + 1);
            for (int s = 0; s <= i; ++s) {
                const double cont = R.jump[i] + val[s];
                const int u = pos.left_unit[i][s];
                if (u < 0) {
                    left[s] = cont;
                } else if ((mask >> u) & 1) {
                    left[s] = opponent_maximizes ? c.U.left_value(ctx_of(i, s))
                                                 : c.L.left_value(ctx_of(i, s));
                } else {
                    left[s] = opponent_maximizes
                                  ? std::max(c.L.left_value(ctx_of(i, s)), cont)
                                  : std::min(c.U.left_value(ctx_of(i, s)), cont);
                }
            }
            // flow + right phase at node i-1
            std::vector<double> right(i);
            for (int s = 0; s < i; ++s) {
                const double cont = R.cont[i - 1] + 0.5 * (left[s] + left[s + 1]);
                const int u = pos.right_unit[i - 1][s];
                if ((mask >> u) & 1) {
                    right[s] = opponent_maximizes ? c.U.value(ctx_of(i - 1, s))
                                                  : c.L.value(ctx_of(i - 1, s));
                } else {
                    right[s] = opponent_maximizes
                                   ? std::max(c.L.value(ctx_of(i - 1, s)), cont)
                                   : std::min(c.U.value(ctx_of(i - 1, s)), cont);
                }
            }
            val.swap(right);
        }
        return val[0];
    };

    DynkinResult res;
    res.positions = pos.count;
    const uint64_t total = 1ULL << pos.count;
    double upper = 1e308, lower = -1e308;
    for (uint64_t mask = 0; mask < total; ++mask) {
        upper = std::min(upper, dp(mask, true));    // minimizer's set, tau optimal
        lower = std::max(lower, dp(mask, false));   // maximizer's set, sigma optimal
    }
    res.upper = upper;
    res.lower = lower;
    return res;
}

std::vector<std::vector<double>> expected_cumulative_k(const SolveField& f, bool plus) {
    const int N = f.grid->steps();
    const auto& cont = plus ? f.dkp_cont : f.dkm_cont;
    const auto& jump = plus ? f.dkp_jump : f.dkm_jump;
    std::vector<std::vector<double>> cum(N + 1);

    if (f.ens->mode == EnsembleMode::monte_carlo) {
        const int M = f.ens->paths;
        cum[0].assign(M, 0.0);
        for (int i = 0; i < N; ++i) {
            cum[i + 1].assign(M, 0.0);
            for (int p = 0; p < M; ++p)
                cum[i + 1][p] = cum[i][p] + cont[i][p] + jump[i + 1][p];
        }
        return cum;
    }

    // conditional expectation given the node, via path counts
    std::vector<double> counts{1.0};
    cum[0] = {jump[0][0]};
    for (int i = 0; i < N; ++i) {
        std::vector<double> next_counts(i + 2, 0.0);
        cum[i + 1].assign(i + 2, 0.0);
        for (int k = 0; k <= i + 1; ++k) {
            double mass = 0.0, weighted = 0.0;
            if (k >= 1) {  // up-move from (i, k-1)
                mass += counts[k - 1];
                weighted += counts[k - 1] * (cum[i][k - 1] + cont[i][k - 1]);
            }
            if (k <= i) {  // down-move from (i, k)
                mass += counts[k];
                weighted += counts[k] * (cum[i][k] + cont[i][k]);
            }
            next_counts[k] = mass;
            cum[i + 1][k] = weighted / mass + jump[i + 1][k];
        }
        counts.swap(next_counts);
    }
    return cum;
}

}  // namespace grbsde
