#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace kspec::cli;

int main(int argc, char** argv) {
    CLI::App app{"kspec: Toeplitz spectra, Hamilton flows and Weyl-law checks"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "Random seed (overrides seed)");
        sub->add_option("--threads", threads, "Worker threads (overrides threads)")->check(CLI::PositiveNumber);
    };
    auto* va = app.add_subcommand("verify-algebra", "Randomized symplectic and Fock-space invariant suites");
    auto* rw = app.add_subcommand("run-weyl", "Spectra, smoothed sums and two-term counts along a k ladder");
    auto* fp = app.add_subcommand("flow-probe", "Lifted Hamilton flow, period search and holonomy fit");
    for (auto* s : {va, rw, fp}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    RunContext ctx;
    try {
        ctx.config_bytes = read_file(config_path);
        ctx.cfg = parse_config(ctx.config_bytes);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << "\n";
        return exit_config;
    }
    if (!out_dir.empty()) ctx.cfg.output_dir = out_dir;
    if (seed) ctx.cfg.seed = *seed;
    if (threads) ctx.cfg.threads = *threads;

    try {
        if (*va) {
            ctx.command = "verify-algebra";
            return cmd_verify_algebra(ctx, std::cout);
        }
        if (*rw) {
            ctx.command = "run-weyl";
            return cmd_run_weyl(ctx, std::cout);
        }
        ctx.command = "flow-probe";
        return cmd_flow_probe(ctx, std::cout);
    } catch (const StageError& e) {
        std::cerr << "error in stage " << e.what() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
}
