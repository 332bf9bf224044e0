#pragma once

#include <functional>
#include <utility>

#include "grbsde/paths.hpp"

namespace grbsde {

struct ProjectionResult {
    double value;  // L v ytilde ^ U
    double dkp;    // (L - ytilde)^+
    double dkm;    // (ytilde - U)^+
};

// One-step two-sided Skorokhod projection.
ProjectionResult skorokhod_project(double ytilde, double L, double U);

struct JumpReflectResult {
    double y_left;        // maximal fixed point of x -> L v [y_t + h(x) + dR] ^ U
    double dkp, dkm;      // jump sizes of K+/K-
    double fix_residual;  // |Phi(y_left) - y_left| at acceptance
};

// Jump reflection at a node: returns the maximal x in [L_left, U_left] with
// x = L_left v [y_t + h(x) + dR] ^ U_left, plus the K jump sizes. h is the
// slice x -> h(t, x, y_t); pass nullptr for h == 0 (exact closed form).
JumpReflectResult jump_reflect(double y_t,
                               const std::function<double(double)>& h_of_x,
                               double dR, double L_left, double U_left,
                               double tol = 1e-12);

// Skorokhod minimality integrals int (Y_- - L_-) dK+ and int (U_- - Y_-) dK-.
std::pair<double, double> check_minimality(const Solution& sol,
                                           const RcllPath& L,
                                           const RcllPath& U);

// max over supports (node atoms and interval continuous masses) of
// min(dK+, dK-); 0 means the reflecting measures are mutually singular.
double check_singularity(const Solution& sol);

}  // namespace grbsde
