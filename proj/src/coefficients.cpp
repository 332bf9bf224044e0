#include "grbsde/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <tuple>

#include "grbsde/common.hpp"

namespace grbsde {

bool BarrierModel::has_jump(int node) const {
    return std::find(jump_nodes.begin(), jump_nodes.end(), node) != jump_nodes.end();
}

BarrierModel BarrierModel::constant(double v) {
    BarrierModel b;
    b.right = [v](const StepContext&) { return v; };
    return b;
}

BarrierModel BarrierModel::tabulated(RcllPath path) {
    BarrierModel b;
    auto shared = std::make_shared<RcllPath>(std::move(path));
    b.right = [shared](const StepContext& c) { return shared->right[c.node]; };
    b.left = [shared](const StepContext& c) { return shared->left[c.node]; };
    for (int i = 1; i <= shared->grid->steps(); ++i)
        if (shared->right[i] != shared->left[i]) b.jump_nodes.push_back(i);
    b.table = *shared;
    return b;
}

void CoefficientSet::validate() const {
    if (!grid) throw ValidationError("CoefficientSet: no grid");
    const int N = grid->steps();
    auto check_len = [&](const std::vector<double>& v, const char* what) {
        if (!v.empty() && static_cast<int>(v.size()) != N + 1)
            throw ValidationError(std::string("CoefficientSet: ") + what +
                                  " must have one value per node");
    };
    check_len(eta, "eta");
    check_len(cwit, "C");
    check_len(beta, "beta");
    check_len(l_atoms, "l");
    check_len(gamma, "gamma");
    for (double v : eta)
        if (v < 0) throw ValidationError("CoefficientSet: eta must be nonnegative");
    for (double v : cwit)
        if (v < 0) throw ValidationError("CoefficientSet: C must be nonnegative");
    for (double v : beta)
        if (v < 0) throw ValidationError("CoefficientSet: beta must be nonnegative");
    for (double v : l_atoms)
        if (v < 0) throw ValidationError("CoefficientSet: l must be nonnegative");

    if (A.grid) {
        if (!A.is_nondecreasing())
            throw ValidationError("CoefficientSet: A must be nondecreasing");
        if (!A.is_continuous())
            throw ValidationError("CoefficientSet: A must be continuous");
    }
    for (int m : mark_order)
        if (!grid->is_marked(m))
            throw ValidationError("CoefficientSet: mark enumeration references unmarked node");
    if (!h_zero()) {
        for (int m : grid->jump_marks)
            if (std::find(mark_order.begin(), mark_order.end(), m) == mark_order.end())
                throw ValidationError("CoefficientSet: grid mark missing from enumeration");
    }
}

bool CoefficientSet::h_box_admissible(double tol) const {
    if (!L.table || !U.table) return false;
    const int N = grid->steps();
    for (int i = 0; i <= N; ++i) {
        const bool terminal = (i == N);
        const double lr = L.table->right[i], ur = U.table->right[i];
        if (!terminal && (lr < -1.0 - tol || lr > tol || ur < -tol || ur > 1.0 + tol))
            return false;
        if (L.table->left[i] < -1.0 - tol || U.table->left[i] > 1.0 + tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------- generators

namespace {

double param(const Params& p, const std::string& key, double dflt) {
    auto it = p.find(key);
    return it == p.end() ? dflt : it->second;
}

}  // namespace

std::vector<GeneratorInfo> generator_catalog() {
    std::vector<GeneratorInfo> cat = {
        {"f", "zero", "(none)"},
        {"f", "constant", "value"},
        {"f", "clipped_linear", "a (slope), b (offset); f = -a*clip(y,-1,1) - b"},
        {"f", "quadratic_z", "C; f = -C*z^2"},
        {"g", "zero", "(none)"},
        {"g", "constant", "value"},
        {"g", "clipped_linear", "a, b; g = -a*clip(y,-1,1) - b"},
        {"h", "zero", "(none)"},
        {"h", "constant_at_marks", "c; h = -c at marks"},
        {"h", "tanh_pull", "c; h = -c*(0.5 + 0.5*tanh(y)) at marks"},
        {"h", "linear_in_x", "q; h = -q*x at marks"},
        {"barrier", "constant", "value"},
        {"barrier", "brownian_offset", "offset, lo, hi; clip(B_t + offset, lo, hi)"},
        {"barrier", "pinch", "tstar, wide; +-wide collapsing to 0 at t*-"},
        {"barrier", "band", "w0, w1; +-(w0 + w1*t)"},
        {"xi", "zero", "(none)"},
        {"xi", "constant", "value"},
        {"xi", "brownian", "scale; xi = scale*B_T"},
        {"xi", "min_brownian_zero", "scale; xi = scale*min(B_T, 0)"},
    };
    std::sort(cat.begin(), cat.end(), [](const GeneratorInfo& a, const GeneratorInfo& b) {
        return std::tie(a.family, a.name) < std::tie(b.family, b.name);
    });
    return cat;
}

GenFn make_f_generator(const std::string& name, const Params& p) {
    if (name == "zero") return nullptr;
    if (name == "constant") {
        const double v = param(p, "value", -0.5);
        return [v](const StepContext&, double, double) { return v; };
    }
    if (name == "clipped_linear") {
        const double a = param(p, "a", 0.1), b = param(p, "b", 0.1);
        return [a, b](const StepContext&, double y, double) {
            return -a * clip(y, -1.0, 1.0) - b;
        };
    }
    if (name == "quadratic_z") {
        const double C = param(p, "C", 0.5);
        return [C](const StepContext&, double, double z) { return -C * z * z; };
    }
    throw ValidationError("unknown f generator: " + name);
}

ScalarFn make_g_generator(const std::string& name, const Params& p) {
    if (name == "zero") return nullptr;
    if (name == "constant") {
        const double v = param(p, "value", -0.5);
        return [v](const StepContext&, double) { return v; };
    }
    if (name == "clipped_linear") {
        const double a = param(p, "a", 0.1), b = param(p, "b", 0.1);
        return [a, b](const StepContext&, double y) { return -a * clip(y, -1.0, 1.0) - b; };
    }
    throw ValidationError("unknown g generator: " + name);
}

JumpFn make_h_generator(const std::string& name, const Params& p, const TimeGrid& grid,
                        const std::vector<int>& marks) {
    auto at_mark = [marks](int node) {
        return std::find(marks.begin(), marks.end(), node) != marks.end();
    };
    if (name == "zero") return nullptr;
    if (name == "constant_at_marks") {
        const double c = param(p, "c", 0.2);
        return [c, at_mark](const StepContext& ctx, double, double) {
            return at_mark(ctx.node) ? -c : 0.0;
        };
    }
    if (name == "tanh_pull") {
        const double c = param(p, "c", 0.2);
        return [c, at_mark](const StepContext& ctx, double, double y) {
            return at_mark(ctx.node) ? -c * (0.5 + 0.5 * std::tanh(y)) : 0.0;
        };
    }
    if (name == "linear_in_x") {
        const double q = param(p, "q", 0.1);
        return [q, at_mark](const StepContext& ctx, double x, double) {
            return at_mark(ctx.node) ? -q * x : 0.0;
        };
    }
    (void)grid;
    throw ValidationError("unknown h generator: " + name);
}

BarrierModel make_barrier_generator(const std::string& name, const Params& p,
                                    const TimeGrid& grid, bool is_upper) {
    if (name == "constant") {
        const double v = param(p, "value", is_upper ? 1.0 : -1.0);
        RcllPath path = RcllPath::constant(grid, v);
        return BarrierModel::tabulated(std::move(path));
    }
    if (name == "brownian_offset") {
        const double off = param(p, "offset", is_upper ? 0.5 : -0.5);
        const double lo = param(p, "lo", -1.0), hi = param(p, "hi", 1.0);
        BarrierModel b;
        b.right = [off, lo, hi](const StepContext& c) { return clip(c.b + off, lo, hi); };
        return b;
    }
    if (name == "pinch") {
        const double tstar = param(p, "tstar", 0.5);
        const double wide = param(p, "wide", 1.0);
        const int pin = grid.node_at(tstar);
        if (pin < 0) throw ValidationError("pinch barrier: t* must be a grid node");
        RcllPath path = RcllPath::constant(grid, is_upper ? wide : -wide);
        path.left[pin] = 0.0;  // barriers touch at t*-
        return BarrierModel::tabulated(std::move(path));
    }
    if (name == "band") {
        const double w0 = param(p, "w0", 1.0), w1 = param(p, "w1", 0.0);
        RcllPath path = RcllPath::constant(grid, 0.0);
        for (size_t i = 0; i < grid.nodes.size(); ++i) {
            const double w = w0 + w1 * grid.nodes[i];
            path.right[i] = is_upper ? w : -w;
            path.left[i] = path.right[i];
        }
        return BarrierModel::tabulated(std::move(path));
    }
    throw ValidationError("unknown barrier generator: " + name);
}

PathFn make_xi_generator(const std::string& name, const Params& p) {
    if (name == "zero") return nullptr;
    if (name == "constant") {
        const double v = param(p, "value", 0.0);
        return [v](const StepContext&) { return v; };
    }
    if (name == "brownian") {
        const double s = param(p, "scale", 1.0);
        return [s](const StepContext& c) { return s * c.b; };
    }
    if (name == "min_brownian_zero") {
        const double s = param(p, "scale", 1.0);
        return [s](const StepContext& c) { return s * std::min(c.b, 0.0); };
    }
    throw ValidationError("unknown xi generator: " + name);
}

void witness_for_f(const std::string& name, const Params& p, double& eta, double& cw) {
    eta = 0.0;
    cw = 0.0;
    if (name == "zero") return;
    if (name == "constant") {
        eta = std::abs(param(p, "value", -0.5));
        return;
    }
    if (name == "clipped_linear") {
        eta = std::abs(param(p, "a", 0.1)) + std::abs(param(p, "b", 0.1));
        return;
    }
    if (name == "quadratic_z") {
        cw = std::abs(param(p, "C", 0.5));
        return;
    }
    throw ValidationError("unknown f generator: " + name);
}

double witness_for_g(const std::string& name, const Params& p) {
    if (name == "zero") return 0.0;
    if (name == "constant") return std::abs(param(p, "value", -0.5));
    if (name == "clipped_linear")
        return std::abs(param(p, "a", 0.1)) + std::abs(param(p, "b", 0.1));
    throw ValidationError("unknown g generator: " + name);
}

double witness_for_h(const std::string& name, const Params& p) {
    if (name == "zero") return 0.0;
    if (name == "constant_at_marks") return std::abs(param(p, "c", 0.2));
    if (name == "tanh_pull") return std::abs(param(p, "c", 0.2));
    if (name == "linear_in_x") return std::abs(param(p, "q", 0.1));  // |x| <= 1 inside the unit barrier box
    throw ValidationError("unknown h generator: " + name);
}

}  // namespace grbsde
