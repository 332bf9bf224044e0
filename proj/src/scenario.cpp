#include "grbsde/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "grbsde/common.hpp"
#include "grbsde/comparison.hpp"
#include "grbsde/transform.hpp"

namespace grbsde {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
    return out;
}

double parse_num(const std::string& s, const std::string& what) {
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("scenario: bad number for " + what + ": '" + s + "'");
    }
}

// generator spec: "name key=value key=value"
GenSpec parse_genspec(const std::string& s) {
    GenSpec g;
    std::stringstream ss(s);
    std::string tok;
    bool first = true;
    while (ss >> tok) {
        if (first) {
            g.name = tok;
            first = false;
            continue;
        }
        auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw ValidationError("scenario: generator parameter needs key=value: " + tok);
        g.params[tok.substr(0, eq)] = parse_num(tok.substr(eq + 1), tok);
    }
    if (first) throw ValidationError("scenario: empty generator spec");
    return g;
}

std::vector<std::pair<double, double>> parse_jump_list(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    for (const std::string& item : split(s, ',')) {
        if (item.empty()) continue;
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ValidationError("scenario: jump list needs time:size entries");
        out.emplace_back(parse_num(item.substr(0, colon), "jump time"),
                         parse_num(item.substr(colon + 1), "jump size"));
    }
    return out;
}

void apply_coef_key(CoefBlock& b, const std::string& key, const std::string& val) {
    if (key == "f") b.f = parse_genspec(val);
    else if (key == "g") b.g = parse_genspec(val);
    else if (key == "h") b.h = parse_genspec(val);
    else if (key == "L") b.L = parse_genspec(val);
    else if (key == "U") b.U = parse_genspec(val);
    else if (key == "xi") b.xi = parse_genspec(val);
    else if (key == "R_slope") b.R_slope = parse_num(val, key);
    else if (key == "R_jumps") b.R_jumps = parse_jump_list(val);
    else if (key == "A_slope") b.A_slope = parse_num(val, key);
    else if (key == "eta") b.eta = parse_num(val, key);
    else if (key == "C") b.C = parse_num(val, key);
    else if (key == "beta") b.beta = parse_num(val, key);
    else if (key == "l") b.l = parse_num(val, key);
    else throw ValidationError("scenario: unknown coefficient key '" + key + "'");
}

}  // namespace

uint64_t fnv1a_hash(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Scenario parse_scenario_text(const std::string& text) {
    Scenario s;
    s.raw_text = text;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            if (section == "coefficients2") s.has_coef2 = true;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("scenario: expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (section.empty()) {
            if (key == "name") s.name = val;
            else throw ValidationError("scenario: unknown top-level key '" + key + "'");
        } else if (section == "grid") {
            if (key == "T") s.T = parse_num(val, key);
            else if (key == "N") s.N = static_cast<int>(parse_num(val, key));
            else if (key == "jumps") {
                for (const std::string& t : split(val, ','))
                    if (!t.empty()) s.jump_times.push_back(parse_num(t, "jump time"));
            } else throw ValidationError("scenario: unknown grid key '" + key + "'");
        } else if (section == "backend") {
            if (key == "kind") {
                if (val == "tree") s.backend = BackendKind::tree;
                else if (val == "lsmc") s.backend = BackendKind::lsmc;
                else throw ValidationError("scenario: backend kind must be tree|lsmc");
            } else if (key == "degree") s.degree = static_cast<int>(parse_num(val, key));
            else if (key == "paths") s.paths = static_cast<int>(parse_num(val, key));
            else if (key == "threads") s.threads = static_cast<int>(parse_num(val, key));
            else throw ValidationError("scenario: unknown backend key '" + key + "'");
        } else if (section == "run") {
            if (key == "regime") {
                if (val == "zero") s.regime = Regime::zero;
                else if (val == "picard") s.regime = Regime::picard;
                else if (val == "concatenated") s.regime = Regime::concatenated;
                else if (val == "general") s.regime = Regime::general;
                else throw ValidationError("scenario: unknown regime '" + val + "'");
            } else if (key == "harness") {
                for (const std::string& h : split(val, ','))
                    if (!h.empty()) s.harnesses.push_back(h);
            } else if (key == "seed") s.seed = static_cast<uint64_t>(parse_num(val, key));
            else if (key == "raw") s.raw = (val == "true" || val == "1");
            else if (key == "max_iter") s.max_iter = static_cast<int>(parse_num(val, key));
            else if (key == "tol") s.tol = parse_num(val, key);
            else if (key == "ladder_depth") s.ladder_depth = static_cast<int>(parse_num(val, key));
            else if (key == "ladder_tol") s.ladder_tol = parse_num(val, key);
            else throw ValidationError("scenario: unknown run key '" + key + "'");
        } else if (section == "coefficients") {
            apply_coef_key(s.coef, key, val);
        } else if (section == "coefficients2") {
            apply_coef_key(s.coef2, key, val);
        } else {
            throw ValidationError("scenario: unknown section [" + section + "]");
        }
    }
    return s;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("scenario: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

CoefficientSet build_coefficient_set(const Scenario&, const CoefBlock& b,
                                     const TimeGrid& grid) {
    CoefficientSet c;
    c.grid = &grid;
    const int N = grid.steps();

    c.f = make_f_generator(b.f.name, b.f.params);
    c.g = make_g_generator(b.g.name, b.g.params);
    c.h = make_h_generator(b.h.name, b.h.params, grid, grid.jump_marks);
    c.L = make_barrier_generator(b.L.name, b.L.params, grid, false);
    c.U = make_barrier_generator(b.U.name, b.U.params, grid, true);
    c.xi = make_xi_generator(b.xi.name, b.xi.params);

    c.f_zdep = (b.f.name == "quadratic_z");
    if (b.f.name == "clipped_linear")
        c.f_lip = std::abs(b.f.params.count("a") ? b.f.params.at("a") : 0.1);
    if (b.g.name == "clipped_linear")
        c.g_lip = std::abs(b.g.params.count("a") ? b.g.params.at("a") : 0.1);

    double eta_w, c_w;
    witness_for_f(b.f.name, b.f.params, eta_w, c_w);
    const double beta_w = witness_for_g(b.g.name, b.g.params);
    const double l_w = witness_for_h(b.h.name, b.h.params);
    c.eta.assign(N + 1, b.eta >= 0 ? b.eta : eta_w);
    c.cwit.assign(N + 1, b.C >= 0 ? b.C : c_w);
    c.beta.assign(N + 1, b.beta >= 0 ? b.beta : beta_w);
    c.l_atoms.assign(N + 1, 0.0);
    for (int m : grid.jump_marks) c.l_atoms[m] = (b.l >= 0 ? b.l : l_w);

    c.A = FiniteVariationPath::zero(grid);
    for (int i = 0; i < N; ++i) c.A.cont[i] = b.A_slope * grid.dt(i);
    c.R = FiniteVariationPath::zero(grid);
    for (int i = 0; i < N; ++i) c.R.cont[i] = b.R_slope * grid.dt(i);
    for (const auto& [t, size] : b.R_jumps) {
        const int node = grid.node_at(t);
        if (node <= 0)
            throw ValidationError("scenario: R jump time must coincide with a grid node");
        c.R.jump[node] += size;
    }

    if (!c.h_zero()) c.mark_order = grid.jump_marks;
    c.validate();
    return c;
}

void attach_midpoint_witness(CoefficientSet& c) {
    if (!c.L.table || !c.U.table)
        throw ValidationError("midpoint witness needs tabulated barriers");
    const TimeGrid& grid = *c.grid;
    const int N = grid.steps();
    c.has_semimartingale = true;
    c.S0 = 0.5 * (c.L.table->right[0] + c.U.table->right[0]);
    c.V = FiniteVariationPath::zero(grid);
    c.gamma.clear();
    std::vector<double> mid_r(N + 1), mid_l(N + 1);
    for (int i = 0; i <= N; ++i) {
        mid_r[i] = 0.5 * (c.L.table->right[i] + c.U.table->right[i]);
        mid_l[i] = 0.5 * (c.L.table->left[i] + c.U.table->left[i]);
    }
    for (int i = 1; i <= N; ++i) c.V.jump[i] = mid_r[i] - mid_l[i];
    for (int i = 0; i < N; ++i) c.V.cont[i] = mid_l[i + 1] - mid_r[i];
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + p.string());
    out << content;
}

nlohmann::json diag_json(const Diagnostics& d) {
    return nlohmann::json{{"lower_residual", d.lower_residual},
                          {"upper_residual", d.upper_residual},
                          {"singularity_max", d.singularity_max},
                          {"barrier_violation", d.barrier_violation},
                          {"identity_residual", d.identity_residual},
                          {"jump_fix_residual", d.jump_fix_residual},
                          {"kplus_total", d.kp_total},
                          {"kminus_total", d.km_total}};
}

std::string solution_csv(const SolveField& f, const TimeGrid& grid) {
    const int N = grid.steps();
    const auto kp = expected_cumulative_k(f, true);
    const auto km = expected_cumulative_k(f, false);
    std::string csv = "t,state,Y,Z,Kplus_cum,Kminus_cum,left_Y_at_marks\n";
    for (int i = 0; i <= N; ++i) {
        for (size_t s = 0; s < f.y_right[i].size(); ++s) {
            csv += fmt17(grid.nodes[i]);
            csv += ',';
            csv += std::to_string(s);
            csv += ',';
            csv += fmt17(f.y_right[i][s]);
            csv += ',';
            if (i < N) csv += fmt17(f.z[i][s]);
            csv += ',';
            csv += fmt17(kp[i][s]);
            csv += ',';
            csv += fmt17(km[i][s]);
            csv += ',';
            if (grid.is_marked(i)) csv += fmt17(f.y_left[i][s]);
            csv += '\n';
        }
    }
    return csv;
}

// structural post-solve checks shared by every run; throws PropertyViolation
void enforce_invariants(const SolveReport& rep, const TimeGrid& grid) {
    if (rep.diag.singularity_max != 0.0)
        throw PropertyViolation("mutual singularity violated: " +
                                std::to_string(rep.diag.singularity_max));
    if (rep.diag.barrier_violation > 1e-12)
        throw PropertyViolation("barrier sandwich violated: " +
                                std::to_string(rep.diag.barrier_violation));
    if (rep.diag.identity_residual > 1e-10)
        throw PropertyViolation("jump identity violated: " +
                                std::to_string(rep.diag.identity_residual));
    double max_dt = 0.0;
    for (int i = 0; i < grid.steps(); ++i) max_dt = std::max(max_dt, grid.dt(i));
    const double bound =
        10.0 * max_dt * (rep.diag.kp_total + rep.diag.km_total) + 1e-12;
    if (rep.diag.lower_residual > bound || rep.diag.upper_residual > bound)
        throw PropertyViolation("Skorokhod minimality residual above budget");
}

}  // namespace

std::string list_generators_text() {
    std::string out;
    for (const GeneratorInfo& g : generator_catalog())
        out += g.family + "  " + g.name + "  (" + g.params + ")\n";
    return out;
}

int run_scenario(const Scenario& s_in, const RunOverrides& ov, std::string* message) {
    auto fail = [message](const std::string& msg, int code) {
        if (message) *message = msg;
        return code;
    };
    try {
        Scenario s = s_in;
        if (ov.seed) s.seed = *ov.seed;
        if (ov.raw) s.raw = *ov.raw;
        if (ov.threads) s.threads = *ov.threads;

        std::string out_dir = ov.out_dir;
        if (out_dir.empty()) {
            const char* env = std::getenv("GRBSDE_OUT_DIR");
            out_dir = env ? env : "out";
        }
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path dir(out_dir);

        TimeGrid grid = build_grid(s.T, s.N, s.jump_times);
        const EnsembleMode mode =
            s.backend == BackendKind::tree ? EnsembleMode::tree : EnsembleMode::monte_carlo;
        BrownianEnsemble ens = simulate_ensemble(grid, mode, s.paths, s.seed, s.threads);
        BackendSpec spec{s.backend, s.degree, s.paths, s.seed, s.threads};
        SolveOptions opt;
        opt.raw = s.raw;
        opt.max_iter = s.max_iter;
        opt.tol = s.tol;
        opt.ladder_depth = s.ladder_depth;
        opt.ladder_tol = s.ladder_tol;

        CoefficientSet c = build_coefficient_set(s, s.coef, grid);

        nlohmann::json diag;
        const auto want = [&](const std::string& h) {
            return std::find(s.harnesses.begin(), s.harnesses.end(), h) != s.harnesses.end();
        };

        // harness combinations validated up front
        if (want("dynkin-oracle")) {
            if (s.backend != BackendKind::tree || !c.f_zero() || !c.g_zero() || !c.h_zero())
                throw ValidationError("dynkin-oracle needs the tree backend and zero generators");
        }

        // property violations are raised only after the outputs are written,
        // so failed runs still leave their diagnostics on disk
        std::vector<std::string> violations;

        SolveReport rep;
        if (want("comparison")) {
            if (!s.has_coef2)
                throw ValidationError("comparison harness needs a [coefficients2] block");
            CoefficientSet c2 = build_coefficient_set(s, s.coef2, grid);
            ComparisonCase cmp{&c, &c2, s.regime};
            ComparisonReport crep = check_comparison(cmp, ens, spec, opt);
            nlohmann::json hyp = nlohmann::json::array();
            for (const auto& h : crep.hypotheses)
                hyp.push_back({{"id", h.id}, {"margin", h.margin}, {"node", h.node}});
            diag["comparison"] = {{"hypotheses", hyp},
                                  {"hypotheses_ok", crep.hypotheses_ok},
                                  {"worst_y_violation", crep.worst_y_violation},
                                  {"violation_fraction", crep.violation_fraction},
                                  {"worst_measure_violation", crep.worst_measure_violation}};
            rep = std::move(crep.sol1);
            if (!crep.hypotheses_ok)
                violations.push_back("comparison hypotheses not satisfied");
            const double noise = s.backend == BackendKind::tree ? 1e-10 : 0.0;
            const bool y_ok = s.backend == BackendKind::tree
                                  ? crep.worst_y_violation <= noise
                                  : crep.violation_fraction < 0.01;
            if (!y_ok) violations.push_back("comparison conclusion Y1 <= Y2 violated");
        } else {
            rep = solve(c, s.regime, ens, spec, opt);
        }

        diag["skorokhod"] = diag_json(rep.diag);
        diag["counters"] = {{"condexp_steps", rep.counters.condexp_steps},
                            {"jump_reflections", rep.counters.jump_reflections},
                            {"picard_sweeps", rep.counters.picard_sweeps}};
        if (!rep.segments.empty()) {
            nlohmann::json segs = nlohmann::json::array();
            for (const auto& seg : rep.segments)
                segs.push_back({{"left", seg.left_node},
                                {"right", seg.right_node},
                                {"gaps", seg.gaps}});
            diag["picard"] = segs;
        }
        if (!rep.ladder.empty() || want("ladder-study")) {
            nlohmann::json lad = nlohmann::json::array();
            for (const auto& lr : rep.ladder)
                lad.push_back({{"n", lr.level},
                               {"sup_gap", lr.sup_gap},
                               {"monotone", lr.monotone_ok},
                               {"kplus_total", lr.kp_total},
                               {"kminus_total", lr.km_total},
                               {"implicit", lr.implicit},
                               {"sweeps", lr.sweeps}});
            diag["ladder"] = lad;
        }

        if (want("dynkin-oracle")) {
            DynkinResult dr = dynkin_value_bruteforce(c, ens);
            diag["dynkin"] = {{"lower", dr.lower},
                              {"upper", dr.upper},
                              {"solver_y0", rep.y0()},
                              {"positions", dr.positions}};
            if (std::abs(dr.upper - dr.lower) > 1e-12 ||
                std::abs(rep.y0() - dr.upper) > 1e-12)
                violations.push_back("dynkin oracle disagrees with the solver");
        }

        if (want("transform-check")) {
            CoefficientSet cc = build_coefficient_set(s, s.coef, grid);
            attach_midpoint_witness(cc);
            std::vector<double> flat(grid.steps() + 1, 0.0);
            Realization real = realize(cc, flat);
            TransformContext tctx = build_m(real);
            TransformedSet ts = forward_transform(real, tctx);
            auto report = verify_bounds(ts, tctx, 20000, s.seed);
            nlohmann::json jb = nlohmann::json::array();
            for (const auto& e : report)
                jb.push_back({{"id", e.id},
                              {"worst_margin", e.worst_margin},
                              {"s", e.arg_s},
                              {"y", e.arg_y},
                              {"z", e.arg_z}});
            diag["bound_report"] = jb;
            if (!bounds_pass(report))
                violations.push_back("transformed-data bounds violated");
        }

        try {
            enforce_invariants(rep, grid);
        } catch (const PropertyViolation& e) {
            violations.push_back(e.what());
        }
        if (!violations.empty()) diag["violations"] = violations;

        write_text(dir / "solution.csv", solution_csv(rep.field, grid));
        write_text(dir / "diagnostics.json", diag.dump(2) + "\n");

        size_t rows = 0;
        for (int i = 0; i <= grid.steps(); ++i) rows += rep.field.y_right[i].size();
        char hashbuf[32];
        std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                      static_cast<unsigned long long>(fnv1a_hash(s_in.raw_text)));
        nlohmann::json manifest = {
            {"name", s.name},
            {"version", "0.1.0"},
            {"seed", s.seed},
            {"config_hash", hashbuf},
            {"backend", s.backend == BackendKind::tree ? "tree" : "lsmc"},
            {"grid", {{"T", s.T}, {"N", grid.steps()}}},
            {"rows", rows},
            {"regime", static_cast<int>(s.regime)},
            {"rescaled", rep.rescaled}};
        write_text(dir / "manifest.json", manifest.dump(2) + "\n");

        if (!violations.empty()) {
            std::string joined;
            for (const auto& v : violations) joined += (joined.empty() ? "" : "; ") + v;
            throw PropertyViolation(joined);
        }
        if (message) *message = "ok";
        return 0;
    } catch (const ValidationError& e) {
        return fail(std::string("input error: ") + e.what(), 1);
    } catch (const PropertyViolation& e) {
        return fail(std::string("property violation: ") + e.what(), 2);
    }
}

}  // namespace grbsde
