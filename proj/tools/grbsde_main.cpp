#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "grbsde/common.hpp"
#include "grbsde/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"grbsde: doubly reflected generalized BSDE lab"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir;
    uint64_t seed = 0;
    bool seed_set = false, raw = false;
    int threads = 0;

    CLI::App* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("--scenario", scenario_path, "scenario file path")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    run->add_flag("--raw", raw, "accept barriers outside the admissible box unrescaled");
    run->add_option("--threads", threads, "worker count (must not change results)");

    CLI::App* listgen = app.add_subcommand("list-generators", "print the generator catalog");
    CLI::App* version = app.add_subcommand("version", "print version");

    CLI11_PARSE(app, argc, argv);

    if (listgen->parsed()) {
        std::cout << grbsde::list_generators_text();
        return 0;
    }
    if (version->parsed()) {
        std::cout << "grbsde 0.1.0\n";
        return 0;
    }

    try {
        grbsde::Scenario s = grbsde::parse_scenario_file(scenario_path);
        grbsde::RunOverrides ov;
        if (seed_set) ov.seed = seed;
        if (raw) ov.raw = true;
        if (threads > 0) ov.threads = threads;
        ov.out_dir = out_dir;
        std::string msg;
        const int code = grbsde::run_scenario(s, ov, &msg);
        if (code != 0) std::cerr << msg << "\n";
        return code;
    } catch (const grbsde::ValidationError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
