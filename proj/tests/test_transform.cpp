#include <doctest.h>

#include <cmath>

#include "grbsde/common.hpp"
#include "grbsde/ensemble.hpp"
#include "grbsde/transform.hpp"

using namespace grbsde;

namespace {

// Trivial datum of the worked example: L = -1, U = 1, S = 0, no witnesses.
// m_s = 4(3 + s) follows by direct evaluation.
Realization trivial_realization(const TimeGrid& g, double eta = 0.0) {
    Realization r;
    r.grid = &g;
    const int N = g.steps();
    r.L = RcllPath::constant(g, -1.0);
    r.U = RcllPath::constant(g, 1.0);
    r.S = RcllPath::constant(g, 0.0);
    r.bpath.assign(N + 1, 0.0);
    r.eta.assign(N + 1, eta);
    r.V = FiniteVariationPath::zero(g);
    r.A = FiniteVariationPath::zero(g);
    r.xi = 0.0;
    r.L.right[N] = 0.0;  // terminal convention L_T = xi = U_T
    r.U.right[N] = 0.0;
    return r;
}

// Simpson quadrature oracle for Abar = 2 int e^{-m(s)} dm(s), m(s) = 4(3+s).
double abar_quadrature_oracle() {
    const int n = 20000;
    double acc = 0.0;
    auto integrand = [](double s) { return 2.0 * std::exp(-4.0 * (3.0 + s)) * 4.0; };
    for (int k = 0; k < n; ++k) {
        const double a = static_cast<double>(k) / n, b = static_cast<double>(k + 1) / n;
        acc += (b - a) / 6.0 * (integrand(a) + 4.0 * integrand(0.5 * (a + b)) + integrand(b));
    }
    return acc;
}

// Randomized admissible data inside the double-precision transform budget.
Realization random_admissible(const TimeGrid& g, uint64_t seed) {
    SplitMix64 rng(seed);
    const int N = g.steps();
    Realization r;
    r.grid = &g;
    r.bpath.assign(N + 1, 0.0);
    double b = 0.0;
    for (int i = 1; i <= N; ++i) {
        b += rng.normal() * std::sqrt(g.dt(i - 1));
        r.bpath[i] = b;
    }

    r.L = RcllPath::constant(g, 0.0);
    r.U = RcllPath::constant(g, 0.0);
    double lbase = rng.uniform(-1.0, -0.4), ubase = rng.uniform(0.4, 1.0);
    for (int i = 0; i <= N; ++i) {
        const double wig = 0.1 * std::sin(2.0 * i + static_cast<double>(seed % 7));
        r.L.right[i] = clip(lbase + wig, -1.0, -0.05);
        r.U.right[i] = clip(ubase + wig, 0.05, 1.0);
        r.L.left[i] = i ? r.L.right[i - 1] : r.L.right[0];
        r.U.left[i] = i ? r.U.right[i - 1] : r.U.right[0];
    }

    r.eta.assign(N + 1, 0.0);
    r.cwit.assign(N + 1, 0.0);
    r.beta.assign(N + 1, 0.0);
    r.l_atoms.assign(N + 1, 0.0);
    r.gamma.assign(N + 1, 0.0);
    for (int i = 0; i <= N; ++i) {
        r.eta[i] = rng.uniform(0.0, 0.3);
        r.cwit[i] = rng.uniform(0.0, 0.4);
        r.beta[i] = rng.uniform(0.0, 0.5);
    }
    if (N >= 3) r.l_atoms[N / 2] = rng.uniform(0.0, 0.15);

    r.A = FiniteVariationPath::zero(g);
    for (int i = 0; i < N; ++i) r.A.cont[i] = rng.uniform(0.0, 0.4) * g.dt(i);

    // S: midpoint of the barriers, a finite-variation path
    r.V = FiniteVariationPath::zero(g);
    std::vector<double> mid_r(N + 1), mid_l(N + 1);
    for (int i = 0; i <= N; ++i) {
        mid_r[i] = 0.5 * (r.L.right[i] + r.U.right[i]);
        mid_l[i] = 0.5 * (r.L.left[i] + r.U.left[i]);
    }
    r.S = RcllPath::constant(g, mid_r[0]);
    for (int i = 0; i <= N; ++i) {
        r.S.right[i] = mid_r[i];
        r.S.left[i] = mid_l[i];
    }
    r.S.left[0] = r.S.right[0];
    for (int i = 1; i <= N; ++i) r.V.jump[i] = mid_r[i] - mid_l[i];
    for (int i = 0; i < N; ++i) r.V.cont[i] = mid_l[i + 1] - mid_r[i];

    r.xi = r.S.right[N];
    r.L.right[N] = r.xi;
    r.U.right[N] = r.xi;
    return r;
}

}  // namespace

TEST_CASE("build_m: worked trivial example m = 4(3+s)") {
    TimeGrid g = build_grid(1.0, 4, {});
    Realization r = trivial_realization(g);
    TransformContext ctx = build_m(r);

    CHECK(ctx.m_right[0] == doctest::Approx(12.0).epsilon(1e-14));
    CHECK(ctx.m_right[4] == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(ctx.m_right[2] == doctest::Approx(14.0).epsilon(1e-14));
    for (int i = 0; i <= 4; ++i) CHECK(ctx.m.jump[i] == 0.0);

    const double abar = ctx.abar_total();
    CHECK(abar == doctest::Approx(2.0 * (std::exp(-12.0) - std::exp(-16.0))).epsilon(1e-13));
    CHECK(abar == doctest::Approx(abar_quadrature_oracle()).epsilon(1e-9));
    CHECK(abar <= 1.0);
}

TEST_CASE("build_m: an l atom makes m jump by 4l") {
    TimeGrid g = build_grid(1.0, 4, {0.5});
    Realization r = trivial_realization(g);
    r.l_atoms.assign(g.nodes.size(), 0.0);
    r.l_atoms[2] = 1.0;
    TransformContext ctx = build_m(r);
    CHECK(ctx.m.jump[2] == doctest::Approx(4.0).epsilon(1e-13));
    for (int i = 0; i <= 4; ++i)
        if (i != 2) CHECK(ctx.m.jump[i] == 0.0);
}

TEST_CASE("build_m: m nondecreasing and >= 4 on random data") {
    TimeGrid g = build_grid(1.0, 8, {});
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        TransformContext ctx = build_m(random_admissible(g, seed));
        for (int i = 0; i <= 8; ++i) {
            CHECK(ctx.m_right[i] >= 4.0);
            CHECK(ctx.m_right[i] >= ctx.m_left[i]);
            if (i < 8) CHECK(ctx.m_left[i + 1] >= ctx.m_right[i]);
        }
        CHECK(ctx.abar_total() <= 1.0);
        CHECK(ctx.etabar_total() <= ctx.abar_total());
    }
}

TEST_CASE("forward_transform: L = S collapses the lower barrier to 0") {
    TimeGrid g = build_grid(1.0, 4, {});
    Realization r = trivial_realization(g);
    r.S = r.L;  // S rides the lower barrier
    r.S.right[4] = r.L.right[4];
    r.xi = r.S.right[4];
    TransformContext ctx = build_m(r);
    TransformedSet ts = forward_transform(r, ctx);
    for (int i = 0; i <= 4; ++i) {
        CHECK(ts.Lbar.right[i] == 0.0);  // exact by expression shape
        CHECK(ts.Lbar.left[i] == 0.0);
    }
    CHECK(ts.xibar == 0.0);
}

TEST_CASE("forward_transform: f == 0 gives fbar = -etabar/2") {
    TimeGrid g = build_grid(1.0, 4, {});
    Realization r = trivial_realization(g, 0.5);
    TransformContext ctx = build_m(r);
    TransformedSet ts = forward_transform(r, ctx);
    for (int i = 0; i <= 4; ++i) {
        CHECK(ts.fbar(i, 0.0, 0.0) == doctest::Approx(-0.5 * ctx.etabar[i]).epsilon(1e-13));
        CHECK(ts.ftilde(i, 0.0, 0.0) == 0.0);
    }
}

TEST_CASE("forward_transform: barred barriers stay in the unit box") {
    TimeGrid g = build_grid(1.0, 4, {});
    Realization r = trivial_realization(g);
    TransformContext ctx = build_m(r);
    TransformedSet ts = forward_transform(r, ctx);
    for (int i = 0; i <= 4; ++i) {
        CHECK(ts.Ubar.right[i] >= 0.0);
        CHECK(ts.Ubar.right[i] <= 1.0);
        CHECK(ts.Lbar.right[i] <= 0.0);
        CHECK(ts.Lbar.right[i] >= -1.0);
        // proof-side cross-check: Ubar <= e^{-m^2/2}
        CHECK(ts.Ubar.right[i] <=
              std::exp(-0.5 * ctx.m_right[i] * ctx.m_right[i]) + 1e-300);
    }
}

TEST_CASE("inverse_transform: Ybar = 0 with L = S recovers Y = S") {
    TimeGrid g = build_grid(1.0, 4, {});
    Realization r = trivial_realization(g);
    r.S = r.L;
    r.xi = r.S.right[4];
    TransformContext ctx = build_m(r);

    Solution barred;
    barred.Y = RcllPath::constant(g, 0.0);
    barred.Z.assign(4, 0.0);
    barred.Kplus = FiniteVariationPath::zero(g);
    barred.Kminus = FiniteVariationPath::zero(g);
    Solution orig = inverse_transform(barred, ctx);
    for (int i = 0; i <= 4; ++i)
        CHECK(orig.Y.right[i] == doctest::Approx(r.S.right[i]).epsilon(1e-12));
    for (int i = 0; i < 4; ++i) CHECK(orig.Z[i] == 0.0);  // Zbar = 0, gamma = 0
}

TEST_CASE("round trip: forward then inverse reproduces (Y, Z)") {
    TimeGrid g = build_grid(1.0, 8, {});
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        Realization r = random_admissible(g, seed);
        TransformContext ctx = build_m(r);
        SplitMix64 rng(seed * 1000 + 5);

        Solution orig;
        orig.Y = RcllPath::constant(g, 0.0);
        orig.Z.assign(8, 0.0);
        orig.Kplus = FiniteVariationPath::zero(g);
        orig.Kminus = FiniteVariationPath::zero(g);
        for (int i = 0; i <= 8; ++i) {
            const double u = rng.uniform(0.0, 1.0);
            orig.Y.right[i] = r.L.right[i] + u * (r.U.right[i] - r.L.right[i]);
            const double ul = rng.uniform(0.0, 1.0);
            orig.Y.left[i] = r.L.left[i] + ul * (r.U.left[i] - r.L.left[i]);
        }
        orig.Y.left[0] = orig.Y.right[0];
        for (int i = 0; i < 8; ++i) orig.Z[i] = rng.uniform(-1.0, 1.0);

        Solution barred = forward_solution(orig, ctx);
        Solution back = inverse_transform(barred, ctx);
        double worst = 0.0;
        for (int i = 0; i <= 8; ++i) {
            worst = std::max(worst, std::abs(back.Y.right[i] - orig.Y.right[i]));
            worst = std::max(worst, std::abs(back.Y.left[i] - orig.Y.left[i]));
        }
        for (int i = 0; i < 8; ++i)
            worst = std::max(worst, std::abs(back.Z[i] - orig.Z[i]));
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("verify_bounds: trivial data pass with nonnegative margins") {
    TimeGrid g = build_grid(1.0, 4, {});
    Realization r = trivial_realization(g, 0.25);
    TransformContext ctx = build_m(r);
    TransformedSet ts = forward_transform(r, ctx);
    auto report = verify_bounds(ts, ctx, 5000, 99);
    CHECK(bounds_pass(report));
    for (const auto& e : report) CHECK(e.worst_margin >= -1e-12);
}

TEST_CASE("verify_bounds: corrupting fbar by +1 breaks the upper bound by 1") {
    TimeGrid g = build_grid(1.0, 4, {});
    Realization r = trivial_realization(g, 0.25);
    TransformContext ctx = build_m(r);
    TransformedSet ts = forward_transform(r, ctx);
    auto fb = ts.fbar;
    ts.fbar = [fb](int i, double y, double z) { return fb(i, y, z) + 1.0; };
    auto report = verify_bounds(ts, ctx, 5000, 99);
    CHECK_FALSE(bounds_pass(report));
    for (const auto& e : report)
        if (e.id == "item1.fbar<=0") CHECK(e.worst_margin == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("verify_bounds: stochastic-quadratic f within its witness passes") {
    TimeGrid g = build_grid(1.0, 8, {});
    Realization r = random_admissible(g, 3);
    r.f = [&r](int i, double, double z) { return -r.cwit_at(i) * z * z; };
    TransformContext ctx = build_m(r);
    TransformedSet ts = forward_transform(r, ctx);
    auto report = verify_bounds(ts, ctx, 20000, 7);
    CHECK(bounds_pass(report));
}

TEST_CASE("realize: builds S from the semimartingale witness and checks the tube") {
    TimeGrid g = build_grid(1.0, 4, {});
    CoefficientSet c;
    c.grid = &g;
    c.L = BarrierModel::tabulated(RcllPath::constant(g, -1.0));
    c.U = BarrierModel::tabulated(RcllPath::constant(g, 1.0));
    c.S0 = 0.0;
    std::vector<double> b(5, 0.0);
    Realization r = realize(c, b);
    CHECK(r.xi == 0.0);
    CHECK(r.S.right[2] == 0.0);
    CHECK(r.L.right[4] == 0.0);  // terminal convention applied
    CHECK(r.U.right[4] == 0.0);

    // a witness escaping the tube is rejected
    CoefficientSet bad = c;
    bad.S0 = 5.0;
    CHECK_THROWS_AS(realize(bad, b), ValidationError);
}
