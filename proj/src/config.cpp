#include "fracflow/config.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "fracflow/io.hpp"

namespace fracflow {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& value) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(field, field + ": expected a number, got '" + value + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& field, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(field, field + ": expected a nonnegative integer, got '" + value + "'");
    return v;
}

void parse_enum(const std::string& field, const std::string& value,
                const std::set<std::string>& allowed, std::string& out) {
    if (!allowed.count(value)) {
        std::string opts;
        for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
        throw ConfigError(field, field + ": '" + value + "' is not one of {" + opts + "}");
    }
    out = value;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    c.raw_text = text;
    c.hash = io::hex64(io::fnv1a(text));

    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(key, "line " + std::to_string(lineno) + ": empty key or value");
        if (!seen.insert(key).second)
            throw ConfigError(key, key + ": duplicate key");

        if (key == "problem")
            parse_enum(key, value, {"scalar_linear", "cdp", "quadratic", "abs", "indicator_zero"},
                       c.problem);
        else if (key == "kernel.kind")
            parse_enum(key, value, {"riemann_liouville", "classical"}, c.kernel_kind);
        else if (key == "kernel.alpha") c.kernel_alpha = parse_double(key, value);
        else if (key == "T") c.T = parse_double(key, value);
        else if (key == "N") c.N = parse_uint(key, value);
        else if (key == "nu") c.nu = parse_double(key, value);
        else if (key == "residual_tol") c.residual_tol = parse_double(key, value);
        else if (key == "prox_tol") c.prox_tol = parse_double(key, value);
        else if (key == "energy.coefficient") c.energy_coefficient = parse_double(key, value);
        else if (key == "energy.dim") c.energy_dim = parse_uint(key, value);
        else if (key == "space.d") c.space_d = parse_uint(key, value);
        else if (key == "space.p") c.space_p = parse_double(key, value);
        else if (key == "domain.a0") c.domain_a0 = parse_double(key, value);
        else if (key == "domain.b0") c.domain_b0 = parse_double(key, value);
        else if (key == "domain.amp_a") c.domain_amp_a = parse_double(key, value);
        else if (key == "domain.amp_b") c.domain_amp_b = parse_double(key, value);
        else if (key == "domain.omega") c.domain_omega = parse_double(key, value);
        else if (key == "domain.phase") c.domain_phase = parse_double(key, value);
        else if (key == "u0.profile")
            parse_enum(key, value, {"constant", "sin", "bump", "zero"}, c.u0_profile);
        else if (key == "u0.value") c.u0_value = parse_double(key, value);
        else if (key == "f.profile")
            parse_enum(key, value, {"zero", "constant", "sin_x", "sin_xt"}, c.f_profile);
        else if (key == "f.amplitude") c.f_amplitude = parse_double(key, value);
        else if (key == "seed") c.seed = parse_uint(key, value);
        else if (key == "verify.histories") c.verify_histories = parse_uint(key, value);
        else if (key == "verify.base_tol") c.verify_base_tol = parse_double(key, value);
        else if (key == "output.dir") c.output_dir = value;
        else throw ConfigError(key, key + ": unknown key");
    }

    if (c.kernel_kind == "riemann_liouville" && !(c.kernel_alpha > 0.0 && c.kernel_alpha < 1.0))
        throw ConfigError("kernel.alpha", "kernel.alpha: must lie in (0, 1)");
    if (!(c.T > 0.0)) throw ConfigError("T", "T: must be positive");
    if (c.N == 0) throw ConfigError("N", "N: must be positive");
    if (!(c.nu >= 0.0)) throw ConfigError("nu", "nu: must be nonnegative");
    if (c.problem == "cdp") {
        if (c.space_d == 0) throw ConfigError("space.d", "space.d: must be positive");
        if (!(c.space_p >= 2.0)) throw ConfigError("space.p", "space.p: must satisfy p >= 2");
    }
    if (c.energy_dim == 0) throw ConfigError("energy.dim", "energy.dim: must be positive");
    return c;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("", e.what());
    }
    return parse_config_text(text);
}

}  // namespace fracflow
