#pragma once

#include <string>

namespace fracflow::cli {

// Exit codes: 0 success, 1 failed certificates, 2 config errors, 3 solver
// failures.
inline constexpr int exit_ok = 0;
inline constexpr int exit_cert_failed = 1;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_solver_error = 3;

struct Options {
    std::string config_path;
    std::string out_dir;    // overrides output.dir from the config when set
    std::string traj_path;  // verify a stored trajectory instead of solving
    int levels = 3;         // refinement levels for the convergence study
    bool quiet = false;
};

int cmd_run(const Options& opt);
int cmd_verify(const Options& opt);
int cmd_convergence(const Options& opt);
int cmd_kernels(const Options& opt);

}  // namespace fracflow::cli
