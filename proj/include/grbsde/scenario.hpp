#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "grbsde/coefficients.hpp"
#include "grbsde/solver.hpp"

namespace grbsde {

struct GenSpec {
    std::string name = "zero";
    Params params;
};

// One coefficient block of a scenario file ([coefficients] / [coefficients2]).
struct CoefBlock {
    GenSpec f{"zero", {}}, g{"zero", {}}, h{"zero", {}};
    GenSpec L{"constant", {{"value", -1.0}}};
    GenSpec U{"constant", {{"value", 1.0}}};
    GenSpec xi{"zero", {}};
    double R_slope = 0.0;
    std::vector<std::pair<double, double>> R_jumps;  // (time, size)
    double A_slope = 0.0;
    // negative means "derive from the generator catalog"
    double eta = -1.0, C = -1.0, beta = -1.0, l = -1.0;
};

struct Scenario {
    std::string name = "scenario";
    std::string raw_text;

    double T = 1.0;
    int N = 8;
    std::vector<double> jump_times;

    BackendKind backend = BackendKind::tree;
    int degree = 3;
    int paths = 10000;
    int threads = 1;

    Regime regime = Regime::zero;
    std::vector<std::string> harnesses;  // transform-check | comparison | dynkin-oracle | ladder-study
    uint64_t seed = 42;
    bool raw = false;
    int max_iter = 60;
    double tol = 1e-10;
    int ladder_depth = 6;
    double ladder_tol = 1e-9;

    CoefBlock coef, coef2;
    bool has_coef2 = false;
};

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

CoefficientSet build_coefficient_set(const Scenario& s, const CoefBlock& b,
                                     const TimeGrid& grid);

// Synthesizes the between-barriers semimartingale witness S as the barrier
// midpoint path (valid for any
// tabulated barriers); required by the transform harness.
void attach_midpoint_witness(CoefficientSet& c);

struct RunOverrides {
    std::optional<uint64_t> seed;
    std::optional<bool> raw;
    std::optional<int> threads;
    std::string out_dir;  // empty: env GRBSDE_OUT_DIR, else ./out
};

// Executes a scenario end to end, writing solution.csv, diagnostics.json and
// manifest.json. Returns 0 on pass, 1 on input error, 2 on property violation.
int run_scenario(const Scenario& s, const RunOverrides& ov, std::string* message = nullptr);

std::string list_generators_text();
uint64_t fnv1a_hash(const std::string& text);

}  // namespace grbsde
