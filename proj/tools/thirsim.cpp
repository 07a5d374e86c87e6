// thirsim: Monte-Carlo experiment driver for the TH-IR multiuser detection
// library. Subcommands:
//   ber          BER-vs-SNR sweep over channel realizations
//   complexity   collision-complexity records (Y, Y~ per realization)
//   oracle-check brute-force equivalence suites against the reference
//                implementations

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "thir/experiment_io.hpp"
#include "thir/harness.hpp"
#include "thir/oracle_suite.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

thir::ExperimentSpec load_spec(const CommonArgs& args) {
    thir::ExperimentSpec spec = args.config_path.empty()
                                    ? thir::ExperimentSpec::desk_default()
                                    : thir::load_experiment_config(args.config_path);
    if (args.seed_set) spec.sys.rng_seed = args.seed;
    if (args.threads > 0) spec.threads = args.threads;
    if (!args.out_path.empty()) spec.out_path = args.out_path;
    if (!args.format.empty()) spec.format = args.format;
    return spec;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path,
                    "experiment config file (key = value lines)");
    cmd->add_option("--seed", args.seed, "rng seed override")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads");
    cmd->add_option("--out", args.out_path, "output file path");
    cmd->add_option("--format", args.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chip-sampled TH-IR UWB multiuser detection simulator"};
    app.require_subcommand(1);

    CommonArgs ber_args;
    CLI::App* ber_cmd = app.add_subcommand("ber", "Monte-Carlo BER sweep");
    add_common(ber_cmd, ber_args);

    CommonArgs cx_args;
    CLI::App* cx_cmd =
        app.add_subcommand("complexity", "collision-complexity measurement");
    add_common(cx_cmd, cx_args);

    int oracle_trials = 200;
    std::uint64_t oracle_seed = 7;
    CLI::App* oracle_cmd = app.add_subcommand(
        "oracle-check", "run the brute-force equivalence suites");
    oracle_cmd->add_option("--trials", oracle_trials, "instances per suite");
    oracle_cmd->add_option("--seed", oracle_seed, "rng seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ber_cmd->parsed()) {
            const auto spec = load_spec(ber_args);
            const auto table = thir::run_ber(spec);
            for (const auto& [name, count] : table.excluded) {
                std::cerr << "warning: " << count << " realization(s) excluded for "
                          << name << " (enumeration capacity exceeded)\n";
            }
            if (spec.out_path.empty()) {
                if (spec.format == "json") {
                    thir::write_ber_json(table, std::cout);
                } else {
                    thir::write_ber_csv(table, std::cout);
                }
            } else {
                thir::emit_results(table, spec.format, spec.out_path);
                std::cerr << "wrote " << spec.out_path << "\n";
            }
        } else if (cx_cmd->parsed()) {
            const auto spec = load_spec(cx_args);
            const auto table = thir::run_complexity(spec);
            if (spec.out_path.empty()) {
                if (spec.format == "json") {
                    thir::write_complexity_json(table, std::cout);
                } else {
                    thir::write_complexity_csv(table, std::cout);
                }
            } else {
                thir::emit_results(table, spec.format, spec.out_path);
                std::cerr << "wrote " << spec.out_path << "\n";
            }
        } else if (oracle_cmd->parsed()) {
            const auto results = thir::oracle::run_all(oracle_trials, oracle_seed);
            bool all_pass = true;
            for (const auto& r : results) {
                std::printf("%-28s %s  trials=%d  worst=%.3g  tol=%.3g%s%s\n",
                            r.name.c_str(), r.pass ? "PASS" : "FAIL", r.trials,
                            r.worst, r.tolerance, r.detail.empty() ? "" : "  ",
                            r.detail.c_str());
                all_pass = all_pass && r.pass;
            }
            return all_pass ? 0 : 1;
        }
    } catch (const thir::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const thir::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
