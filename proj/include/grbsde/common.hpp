#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace grbsde {

// Bad inputs (malformed scenarios, inconsistent data). CLI exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A solve or harness produced output violating a structural invariant. CLI exit code 2.
struct PropertyViolation : std::runtime_error {
    explicit PropertyViolation(const std::string& msg) : std::runtime_error(msg) {}
};

inline double clip(double x, double lo, double hi) {
    return std::min(std::max(x, lo), hi);
}

inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }
inline double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

// exp with the argument capped so the result stays finite; used where an
// analytically huge but sign-correct value is enough (never on paths where
// the true magnitude matters).
inline double exp_capped(double x) { return std::exp(std::min(x, 690.0)); }

}  // namespace grbsde
