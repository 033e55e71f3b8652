#include "ocsarc/ocsarc.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitFailure = 2;

int report(ocs_status status) {
    std::fprintf(stderr, "error (%s): %s\n", ocs_status_name(status), ocs_last_error());
    return status == OCS_ERR_CONFIG || status == OCS_ERR_INVALID_INPUT ? kExitInvalid : kExitFailure;
}

void print_warning(const char* message, void*) { std::fprintf(stderr, "warning: %s\n", message); }

int cmd_validate(const std::string& path) {
    ocs_diagnostics* diags = nullptr;
    ocs_status st = ocs_config_validate(path.c_str(), &diags);
    if (st != OCS_OK) return report(st);
    size_t n = ocs_diagnostics_count(diags);
    for (size_t i = 0; i < n; ++i) {
        std::printf("%s: %s\n", ocs_diagnostics_field(diags, i), ocs_diagnostics_message(diags, i));
    }
    ocs_diagnostics_destroy(diags);
    if (n == 0) {
        std::printf("ok\n");
        return kExitOk;
    }
    return kExitInvalid;
}

struct RunArgs {
    std::string config;
    std::string out;
    uint64_t replicates = 0;
    uint64_t seed = 0;
    uint64_t threads = 0;
    bool trajectories = false;
};

int cmd_run(const RunArgs& args, bool has_seed) {
    ocs_run_options opts;
    ocs_run_options_init(&opts);
    if (!args.out.empty()) opts.out_dir = args.out.c_str();
    opts.replicates = args.replicates;
    opts.seed = args.seed;
    opts.has_seed = has_seed ? 1 : 0;
    opts.threads = args.threads;
    opts.write_trajectories = args.trajectories ? 1 : 0;
    opts.on_warning = print_warning;

    char out_dir[4096];
    ocs_status st = ocs_experiment_run(args.config.c_str(), &opts, out_dir, sizeof out_dir);
    if (st != OCS_OK) return report(st);
    std::printf("wrote %s/summary.csv and %s/manifest.json\n", out_dir, out_dir);
    return kExitOk;
}

int cmd_oracle_check(size_t streams, size_t max_len, uint64_t seed) {
    size_t steps = 0;
    size_t mismatches = 0;
    ocs_status st = ocs_oracle_check(streams, max_len, seed, &steps, &mismatches);
    if (st != OCS_OK) return report(st);
    std::printf("streams=%zu steps=%zu mismatches=%zu\n", streams, steps, mismatches);
    std::printf("%s\n", mismatches == 0 ? "PASS" : "FAIL");
    return mismatches == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online conformal selection with irrevocable decisions"};
    app.set_version_flag("--version", std::string(ocs_version()));
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment from a JSON config");
    run->add_option("config", run_args.config, "Config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", run_args.out, "Output directory (overrides output_dir)");
    run->add_option("--replicates", run_args.replicates, "Number of replicates")->check(CLI::PositiveNumber);
    auto* seed_opt = run->add_option("--seed", run_args.seed, "Base seed; replicate i uses seed + i");
    run->add_option("--threads", run_args.threads, "Worker threads (0 = all cores)");
    run->add_flag("--trajectories", run_args.trajectories, "Write per-replicate trajectory CSVs");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", validate_path, "Config file")->required();

    size_t streams = 1000;
    size_t max_len = 300;
    uint64_t oracle_seed = 1;
    auto* oracle = app.add_subcommand("oracle-check",
                                      "Compare incremental online BH against brute-force recomputation");
    oracle->add_option("--streams", streams, "Number of random streams");
    oracle->add_option("--max-len", max_len, "Maximum stream length");
    oracle->add_option("--seed", oracle_seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*run) return cmd_run(run_args, seed_opt->count() > 0);
    if (*validate) return cmd_validate(validate_path);
    if (*oracle) return cmd_oracle_check(streams, max_len, oracle_seed);
    return kExitInvalid;
}
