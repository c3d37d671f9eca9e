#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace fracflow {

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& field_, const std::string& what_)
        : std::runtime_error(what_), field(field_) {}
    std::string field;
};

// Flat key = value run description. '#' starts a comment, keys are dotted
// lowercase, every key is typed and validated, unknown keys are rejected.
struct RunConfig {
    std::string problem = "scalar_linear";  // scalar_linear | cdp | quadratic | abs | indicator_zero

    std::string kernel_kind = "riemann_liouville";  // riemann_liouville | classical
    double kernel_alpha = 0.5;

    double T = 1.0;
    std::size_t N = 256;
    double nu = 0.0;
    double residual_tol = 1e-8;
    double prox_tol = 1e-10;

    double energy_coefficient = 1.0;  // quadratic weight
    std::size_t energy_dim = 1;       // state dimension for coordinate problems

    std::size_t space_d = 64;  // interior nodes (cdp)
    double space_p = 2.0;      // Dirichlet energy exponent (cdp)

    double domain_a0 = 0.0, domain_b0 = 1.0;
    double domain_amp_a = 0.0, domain_amp_b = 0.0;
    double domain_omega = 0.0, domain_phase = 0.0;

    std::string u0_profile = "constant";  // constant | sin | bump | zero
    double u0_value = 1.0;

    std::string f_profile = "zero";  // zero | constant | sin_x | sin_xt
    double f_amplitude = 0.0;

    std::uint64_t seed = 1;
    std::size_t verify_histories = 5;
    double verify_base_tol = 0.05;

    std::string output_dir = "out";

    std::string raw_text;  // exact bytes the config was parsed from
    std::string hash;      // fnv1a fingerprint of raw_text
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::filesystem::path& path);

}  // namespace fracflow
