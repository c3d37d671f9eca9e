#include <CLI11.hpp>

#include "fracflow/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fracflow: nonlocal-in-time gradient flow solver and certificate checker"};
    app.require_subcommand(1);

    fracflow::cli::Options opt;

    const auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("-c,--config", opt.config_path, "key=value configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        if (needs_out) sub->add_option("-o,--out", opt.out_dir, "output directory override");
        sub->add_flag("-q,--quiet", opt.quiet, "suppress progress lines");
    };

    auto* run = app.add_subcommand("run", "solve the configured problem and write the trajectory");
    add_common(run, true);

    auto* verify = app.add_subcommand("verify", "solve (or load) a trajectory and emit certificates");
    add_common(verify, true);
    verify->add_option("--traj", opt.traj_path, "check a stored trajectory.csv instead of solving")
        ->check(CLI::ExistingFile);

    auto* conv = app.add_subcommand("convergence", "error decay across dyadic grid refinements");
    add_common(conv, true);
    conv->add_option("-l,--levels", opt.levels, "number of refinement levels")
        ->check(CLI::Range(2, 12));

    auto* kernels = app.add_subcommand("kernels", "tabulate kernel weights and identity defects");
    add_common(kernels, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // CLI11 returns 0 for --help; anything else is a usage error.
        return code == 0 ? fracflow::cli::exit_ok : fracflow::cli::exit_config_error;
    }

    if (run->parsed()) return fracflow::cli::cmd_run(opt);
    if (verify->parsed()) return fracflow::cli::cmd_verify(opt);
    if (conv->parsed()) return fracflow::cli::cmd_convergence(opt);
    return fracflow::cli::cmd_kernels(opt);
}
