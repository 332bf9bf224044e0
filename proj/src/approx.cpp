#include "grbsde/approx.hpp"

#include <algorithm>
#include <cmath>

#include "grbsde/common.hpp"

namespace grbsde {

namespace {

constexpr int kGridPerDim = 64;
constexpr double kGolden = 0.6180339887498949;

// Golden-section maximization of a 1-d slice; assumes the scan already
// bracketed the basin, so this only polishes.
template <typename F>
double refine_1d(const F& obj, double lo, double hi) {
    double a = lo, b = hi;
    double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
    double f1 = obj(x1), f2 = obj(x2);
    for (int it = 0; it < 90 && b - a > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = obj(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = obj(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double sup_convolution(const std::function<double(double, const std::vector<double>&)>& f,
                       int n, double y, const std::vector<double>& z, double bound) {
    if (n <= 0) return 0.0;
    const size_t d = z.size();
    if (d > 3) throw ValidationError("sup_convolution: z dimension > 3 not supported");

    const double fyz = f(y, z);
    double radius = std::min(bound, -fyz) / n;
    if (!(radius > 0.0)) return std::min(fyz, 0.0);

    auto penalized = [&](double p, const std::vector<double>& q) {
        double pen = std::abs(p - y);
        for (size_t j = 0; j < d; ++j) pen += std::abs(q[j] - z[j]);
        return f(p, q) - n * pen;
    };

    // dense scan over the product grid
    const int m = kGridPerDim;
    std::vector<int> idx(d + 1, 0);
    std::vector<double> q(d, 0.0);
    double best = fyz;  // p = y, q = z is always feasible
    std::vector<double> best_pt(d + 1, 0.0);
    best_pt[0] = y;
    for (size_t j = 0; j < d; ++j) best_pt[j + 1] = z[j];

    const auto coord = [&](int k) { return -radius + 2.0 * radius * k / (m - 1); };
    bool done = false;
    while (!done) {
        const double p = y + coord(idx[0]);
        for (size_t j = 0; j < d; ++j) q[j] = z[j] + coord(idx[j + 1]);
        const double v = penalized(p, q);
        if (v > best) {
            best = v;
            best_pt[0] = p;
            for (size_t j = 0; j < d; ++j) best_pt[j + 1] = q[j];
        }
        // advance mixed-radix counter
        size_t c = 0;
        while (c <= d) {
            if (++idx[c] < m) break;
            idx[c] = 0;
            ++c;
        }
        done = (c > d);
    }

    // one coordinate-wise golden-section pass around the best grid point
    const double h = 2.0 * radius / (m - 1);
    for (size_t dim = 0; dim <= d; ++dim) {
        auto slice = [&](double x) {
            std::vector<double> qq(best_pt.begin() + 1, best_pt.end());
            double pp = best_pt[0];
            if (dim == 0)
                pp = x;
            else
                qq[dim - 1] = x;
            return penalized(pp, qq);
        };
        const double center = best_pt[dim];
        const double x_star = refine_1d(slice, center - h, center + h);
        if (slice(x_star) > best) {
            best = slice(x_star);
            best_pt[dim] = x_star;
        }
    }
    return std::min(std::max(best, fyz), 0.0);
}

double sup_convolution_scalar(const std::function<double(double)>& g, int n, double y,
                              double bound) {
    auto wrapper = [&](double p, const std::vector<double>&) { return g(p); };
    return sup_convolution(wrapper, n, y, {}, bound);
}

bool mark_active(const std::vector<int>& mark_enumeration, int n, int node) {
    const int limit = std::min<int>(n, static_cast<int>(mark_enumeration.size()));
    for (int i = 0; i < limit; ++i)
        if (mark_enumeration[i] == node) return true;
    return false;
}

double truncate_h(const JumpFn& h, const std::vector<int>& mark_enumeration, int n,
                  const StepContext& ctx, double x, double y) {
    if (!h || n < 1) return 0.0;
    return mark_active(mark_enumeration, n, ctx.node) ? h(ctx, x, y) : 0.0;
}

LadderLevel make_ladder_level(const CoefficientSet& c, int n) {
    LadderLevel level;
    level.n = n;
    if (n >= 1 && c.f) {
        if (c.f_zdep) {
            level.f_n = [&c, n](const StepContext& ctx, double y, double z) {
                auto slice = [&](double p, const std::vector<double>& q) {
                    return c.f(ctx, p, q[0]);
                };
                const double bound = c.eta_at(ctx.node) + c.cwit_at(ctx.node) * z * z;
                return sup_convolution(slice, n, y, {z}, bound);
            };
        } else {
            // z-free f: the q-supremum is attained at q = z exactly
            level.f_n = [&c, n](const StepContext& ctx, double y, double z) {
                auto slice = [&](double p) { return c.f(ctx, p, z); };
                const double bound = c.eta_at(ctx.node) + c.cwit_at(ctx.node) * z * z;
                return sup_convolution_scalar(slice, n, y, bound);
            };
        }
    }
    if (n >= 1 && c.g) {
        level.g_n = [&c, n](const StepContext& ctx, double y) {
            auto slice = [&](double p) { return c.g(ctx, p); };
            const double bound = c.beta.empty() ? 1.0 : c.beta_at(ctx.node);
            return sup_convolution_scalar(slice, n, y, bound);
        };
    }
    for (int k = 0; k < std::min<int>(n, static_cast<int>(c.mark_order.size())); ++k)
        level.active_jump_times.push_back(c.mark_order[k]);
    std::sort(level.active_jump_times.begin(), level.active_jump_times.end());
    if (n >= 1 && c.h && !level.active_jump_times.empty()) level.h_n = c.h;
    return level;
}

std::vector<double> order_jump_times(std::vector<double> marks, double T) {
    std::sort(marks.begin(), marks.end());
    for (size_t i = 1; i < marks.size(); ++i)
        if (marks[i] == marks[i - 1])
            throw ValidationError("order_jump_times: duplicate marks");
    std::vector<double> seq;
    seq.push_back(0.0);
    for (double t : marks) seq.push_back(t);
    seq.push_back(T);
    return seq;
}

std::vector<int> order_jump_nodes(std::vector<int> mark_nodes, int N) {
    std::sort(mark_nodes.begin(), mark_nodes.end());
    for (size_t i = 1; i < mark_nodes.size(); ++i)
        if (mark_nodes[i] == mark_nodes[i - 1])
            throw ValidationError("order_jump_nodes: duplicate marks");
    std::vector<int> seq;
    seq.push_back(0);
    for (int n : mark_nodes) seq.push_back(n);
    seq.push_back(N);
    return seq;
}

}  // namespace grbsde
