#include "grbsde/reflection.hpp"

#include <cmath>

#include "grbsde/common.hpp"

namespace grbsde {

ProjectionResult skorokhod_project(double ytilde, double L, double U) {
    if (L > U) throw ValidationError("skorokhod_project: L > U");
    ProjectionResult r;
    r.dkp = pos_part(L - ytilde);
    r.dkm = pos_part(ytilde - U);
    r.value = clip(ytilde, L, U);
    return r;
}

namespace {

constexpr int kScanPoints = 256;

JumpReflectResult finish(double y_t, const std::function<double(double)>& h,
                         double dR, double L, double U, double x_acc) {
    // Recompute everything from the closed forms at the accepted point so the
    // three jump identities stay mutually consistent.
    const double v = y_t + (h ? h(x_acc) : 0.0) + dR;
    JumpReflectResult r;
    r.dkp = pos_part(L - v);
    r.dkm = pos_part(v - U);
    r.y_left = clip(v, L, U);
    r.fix_residual = std::abs(r.y_left - x_acc);
    return r;
}

}  // namespace

JumpReflectResult jump_reflect(double y_t,
                               const std::function<double(double)>& h_of_x,
                               double dR, double L_left, double U_left,
                               double tol) {
    if (L_left > U_left) throw ValidationError("jump_reflect: L_left > U_left");

    if (!h_of_x) {  // h == 0: reduces to projection of y_t + dR
        ProjectionResult p = skorokhod_project(y_t + dR, L_left, U_left);
        return JumpReflectResult{p.value, p.dkp, p.dkm, 0.0};
    }
    if (L_left == U_left) return finish(y_t, h_of_x, dR, L_left, U_left, L_left);

    auto phi = [&](double x) {
        return clip(y_t + h_of_x(x) + dR, L_left, U_left);
    };

    // Descending scan from U: the first bracket where Phi - x changes sign
    // holds the maximal fixed point; refine it by bisection.
    const double span = U_left - L_left;
    double x_prev = U_left;
    const double psi_top = phi(x_prev) - x_prev;  // <= 0 at the top
    if (psi_top >= -tol) return finish(y_t, h_of_x, dR, L_left, U_left, x_prev);

    for (int k = 1; k <= kScanPoints; ++k) {
        // last scan point is L exactly, where Phi(x) - x >= 0 is guaranteed
        const double x = (k == kScanPoints)
                             ? L_left
                             : U_left - span * static_cast<double>(k) / kScanPoints;
        const double psi = phi(x) - x;
        if (psi >= 0.0) {
            double lo = x, hi = x_prev;  // psi(lo) >= 0 >= psi(hi)
            for (int it = 0; it < 200 && hi - lo > tol; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (phi(mid) - mid >= 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            return finish(y_t, h_of_x, dR, L_left, U_left, phi(lo));
        }
        x_prev = x;
    }
    // Phi maps [L,U] into itself and psi(L) >= 0, so the scan cannot fall out.
    throw PropertyViolation("jump_reflect: no fixed point located (h not continuous?)");
}

std::pair<double, double> check_minimality(const Solution& sol,
                                           const RcllPath& L,
                                           const RcllPath& U) {
    RcllPath gap_lo = sol.Y, gap_hi = sol.Y;
    const int N = sol.Y.grid->steps();
    for (int i = 0; i <= N; ++i) {
        gap_lo.right[i] = sol.Y.right[i] - L.right[i];
        gap_lo.left[i] = sol.Y.left[i] - L.left[i];
        gap_hi.right[i] = U.right[i] - sol.Y.right[i];
        gap_hi.left[i] = U.left[i] - sol.Y.left[i];
    }
    return {integrate_against(gap_lo, sol.Kplus), integrate_against(gap_hi, sol.Kminus)};
}

double check_singularity(const Solution& sol) {
    double worst = 0.0;
    const int N = sol.Y.grid->steps();
    for (int i = 0; i <= N; ++i)
        worst = std::max(worst, std::min(sol.Kplus.jump[i], sol.Kminus.jump[i]));
    for (int i = 0; i < N; ++i)
        worst = std::max(worst, std::min(sol.Kplus.cont[i], sol.Kminus.cont[i]));
    return worst;
}

}  // namespace grbsde
