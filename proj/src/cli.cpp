#include "fracflow/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "fracflow/config.hpp"
#include "fracflow/convex.hpp"
#include "fracflow/io.hpp"
#include "fracflow/kernels.hpp"
#include "fracflow/plaplace.hpp"
#include "fracflow/rng.hpp"
#include "fracflow/stepper.hpp"
#include "fracflow/verify.hpp"

namespace fracflow::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void emit_error(int code, const std::string& what, const std::string& field = "") {
    json j;
    j["error"] = what;
    j["exit_code"] = code;
    if (!field.empty()) j["field"] = field;
    std::cerr << j.dump() << "\n";
}

std::size_t thread_cap() {
    if (const char* env = std::getenv("FRACFLOW_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

struct Problem {
    KernelPair pair = KernelPair::classical();
    TimeGrid grid{1.0, 1};
    std::shared_ptr<const Energy> energy;
    std::shared_ptr<const PLaplaceEnergy> pde;  // set for cdp problems
    StateVector u0;
    std::function<StateVector(double)> forcing;
    // Node-time reference solution, when a closed form is available.
    std::function<StateVector(double)> oracle;
    double nu = 0.0;
    double residual_tol = 1e-8;
};

KernelPair make_pair(const RunConfig& c) {
    return c.kernel_kind == "classical" ? KernelPair::classical()
                                        : KernelPair::riemann_liouville(c.kernel_alpha);
}

double kernel_decay(const RunConfig& c, double rate, double t) {
    // Solution factor of the scalar linear mode with the configured kernel.
    if (c.kernel_kind == "classical") return std::exp(-rate * t);
    return mittag_leffler(c.kernel_alpha, -rate * std::pow(t, c.kernel_alpha));
}

Problem build_problem(const RunConfig& c, std::size_t N) {
    Problem p;
    p.pair = make_pair(c);
    p.grid = TimeGrid(c.T, N);
    p.nu = c.nu;
    p.residual_tol = c.residual_tol;

    if (c.problem == "cdp") {
        const SpatialGrid sg(c.space_d);
        const MovingDomain dom(c.domain_a0, c.domain_b0, c.domain_amp_a, c.domain_amp_b,
                               c.domain_omega, c.domain_phase);
        auto pde = std::make_shared<PLaplaceEnergy>(sg, c.space_p, dom, c.prox_tol);
        p.pde = pde;
        p.energy = pde;

        const std::vector<bool> m0 = pde->mask(0.0);
        p.u0.assign(sg.d, 0.0);
        for (std::size_t i = 0; i < sg.d; ++i) {
            if (!m0[i]) continue;
            const double x = sg.node(i);
            if (c.u0_profile == "constant") p.u0[i] = c.u0_value;
            else if (c.u0_profile == "sin") p.u0[i] = c.u0_value * std::sin(std::numbers::pi * x);
            else if (c.u0_profile == "bump") {
                const double a = dom.a(0.0), b = dom.b(0.0);
                const double s = (2.0 * x - (a + b)) / (b - a);
                if (std::abs(s) < 1.0) p.u0[i] = c.u0_value * std::exp(1.0 - 1.0 / (1.0 - s * s));
            }
        }

        if (c.f_profile != "zero") {
            const double amp = c.f_amplitude;
            const std::string prof = c.f_profile;
            const double T = c.T;
            p.forcing = [sg, amp, prof, T](double t) {
                StateVector v(sg.d);
                for (std::size_t i = 0; i < sg.d; ++i) {
                    const double x = sg.node(i);
                    if (prof == "constant") v[i] = amp;
                    else if (prof == "sin_x") v[i] = amp * std::sin(std::numbers::pi * x);
                    else v[i] = amp * std::sin(std::numbers::pi * x) *
                                std::cos(2.0 * std::numbers::pi * t / T);
                }
                return v;
            };
        }

        // Eigenmode decay factor is exact for the semi-discrete system when
        // the run is the p = 2 Dirichlet problem on the full static interval.
        if (c.space_p == 2.0 && dom.is_static() && c.domain_a0 == 0.0 && c.domain_b0 == 1.0 &&
            c.u0_profile == "sin" && c.f_profile == "zero") {
            const double h = sg.h();
            const double lam =
                4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2.0), 2);
            const RunConfig cc = c;
            p.oracle = [cc, sg, lam](double t) {
                StateVector v(sg.d);
                const double decay = kernel_decay(cc, lam, t);
                for (std::size_t i = 0; i < sg.d; ++i)
                    v[i] = cc.u0_value * std::sin(std::numbers::pi * sg.node(i)) * decay;
                return v;
            };
        }
        return p;
    }

    const std::size_t dim = c.problem == "scalar_linear" || c.problem == "abs" ? 1 : c.energy_dim;
    const InnerProduct ip{dim, 1.0};
    if (c.problem == "scalar_linear" || c.problem == "quadratic")
        p.energy = std::make_shared<QuadraticEnergy>(ip, c.energy_coefficient);
    else if (c.problem == "abs")
        p.energy = std::make_shared<AbsValueEnergy>();
    else
        p.energy = std::make_shared<ZeroConstraintEnergy>(ip);

    if (c.u0_profile == "sin" || c.u0_profile == "bump")
        throw ConfigError("u0.profile", "u0.profile: '" + c.u0_profile +
                                            "' needs a spatial problem (problem = cdp)");
    p.u0.assign(dim, c.u0_profile == "zero" ? 0.0 : c.u0_value);

    if (c.f_profile == "sin_x" || c.f_profile == "sin_xt")
        throw ConfigError("f.profile",
                          "f.profile: '" + c.f_profile + "' needs a spatial problem (problem = cdp)");
    if (c.f_profile == "constant") {
        const double amp = c.f_amplitude;
        p.forcing = [dim, amp](double) { return StateVector(dim, amp); };
    }

    if (c.problem == "scalar_linear" && c.f_profile == "zero") {
        const RunConfig cc = c;
        p.oracle = [cc](double t) {
            return StateVector{cc.u0_value * kernel_decay(cc, cc.energy_coefficient, t)};
        };
    }
    return p;
}

fs::path resolve_out_dir(const RunConfig& c, const Options& opt) {
    fs::path dir = opt.out_dir.empty() ? fs::path(c.output_dir) : fs::path(opt.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
    const std::size_t d = traj.u[0].size();
    std::vector<std::string> header = {"t", "residual", "energy"};
    for (std::size_t i = 0; i < d; ++i) header.push_back("u" + std::to_string(i));

    io::CsvWriter csv(path, header);
    const std::size_t N = traj.grid.cells();
    std::vector<double> row(3 + d);
    for (std::size_t n = 0; n <= N; ++n) {
        row[0] = traj.grid.node(n);
        row[1] = n == 0 ? 0.0 : traj.residual[n - 1];
        row[2] = traj.energy[n];
        for (std::size_t i = 0; i < d; ++i) row[3 + i] = traj.u[n][i];
        csv.row(row);
    }
}

void write_space_time_csv(const fs::path& path, const Trajectory& traj, const SpatialGrid& sg) {
    io::CsvWriter csv(path, {"t", "x", "u"});
    for (std::size_t n = 0; n < traj.u.size(); ++n) {
        for (std::size_t i = 0; i < sg.d; ++i) {
            csv.row({traj.grid.node(n), sg.node(i), traj.u[n][i]});
        }
    }
}

json certificate_json(const Certificate& c) {
    json j;
    j["name"] = c.name;
    j["min_slack"] = c.min_slack;
    j["tolerance"] = std::isfinite(c.tolerance) ? json(c.tolerance) : json("unbounded");
    j["pass"] = c.pass;
    return j;
}

void write_slack_csv(const fs::path& path, const TimeGrid& grid, const Certificate& c) {
    io::CsvWriter csv(path, {"t", "slack"});
    for (std::size_t n = 0; n < c.slack.size(); ++n) csv.row({grid.node(n + 1), c.slack[n]});
}

// Random smooth history for the coercivity certificate: a low-frequency sine
// mix pinned to zero at t = 0, amplitude-normalized.
std::vector<StateVector> random_history(Rng& rng, const TimeGrid& grid, std::size_t dim) {
    const std::size_t N = grid.cells();
    const int modes = 6;
    std::vector<std::vector<double>> coeff(dim, std::vector<double>(modes));
    for (auto& row : coeff)
        for (int k = 0; k < modes; ++k) row[k] = rng.normal() / ((k + 1.0) * (k + 1.0));

    std::vector<StateVector> u(N + 1, StateVector(dim, 0.0));
    double peak = 0.0;
    for (std::size_t n = 0; n <= N; ++n) {
        const double s = grid.node(n) / grid.horizon();
        for (std::size_t i = 0; i < dim; ++i) {
            double v = 0.0;
            for (int k = 0; k < modes; ++k)
                v += coeff[i][k] * std::sin((k + 1.0) * std::numbers::pi * s);
            u[n][i] = v;
            peak = std::max(peak, std::abs(v));
        }
    }
    if (peak > 0.0) {
        for (auto& state : u)
            for (double& v : state) v *= 0.5 / peak;
    }
    return u;
}

Trajectory load_trajectory(const fs::path& path, const Problem& p) {
    const io::CsvTable table = io::read_csv(path);
    const std::size_t dim = p.energy->space().dim;
    if (table.header.size() != 3 + dim)
        throw std::runtime_error("trajectory file: expected " + std::to_string(3 + dim) +
                                 " columns, found " + std::to_string(table.header.size()));
    const std::size_t N = table.rows.size() - 1;
    if (N != p.grid.cells())
        throw std::runtime_error("trajectory file: node count does not match the config");

    Trajectory traj;
    traj.grid = p.grid;
    traj.u.resize(N + 1, StateVector(dim));
    for (std::size_t n = 0; n <= N; ++n)
        for (std::size_t i = 0; i < dim; ++i) traj.u[n][i] = table.rows[n][3 + i];

    // Rebuild derived sequences from the states; the defining identity
    // xi_n = f_n - D_n - (nu/tau)(u_n - u_{n-1}) makes tampering visible to
    // the chain-rule certificate rather than to the residual.
    const ConvWeights wk = cell_weights(p.pair, p.grid, KernelSide::k);
    traj.deriv = nonlocal_derivative(wk, traj.u);
    traj.xi.resize(N);
    traj.residual.assign(N, 0.0);
    traj.energy.resize(N + 1);
    traj.energy[0] = p.energy->eval(0.0, traj.u[0]);
    const StateVector zero(dim, 0.0);
    const double tau = p.grid.tau();
    for (std::size_t n = 1; n <= N; ++n) {
        const StateVector f = p.forcing ? p.forcing(p.grid.node(n)) : zero;
        StateVector xi = f;
        axpy(-1.0, traj.deriv[n - 1], xi);
        StateVector du = diff(traj.u[n], traj.u[n - 1]);
        axpy(-p.nu / tau, du, xi);
        traj.xi[n - 1] = std::move(xi);
        traj.energy[n] = p.energy->eval(p.grid.node(n), traj.u[n]);
    }
    return traj;
}

double history_error(const Trajectory& traj, const Problem& p) {
    // Discrete L2(0,T) distance to the oracle states.
    const InnerProduct& ip = p.energy->space();
    double acc = 0.0;
    for (std::size_t n = 1; n <= traj.grid.cells(); ++n) {
        const StateVector d = diff(traj.u[n], p.oracle(traj.grid.node(n)));
        acc += traj.grid.tau() * ip.dot(d, d);
    }
    return std::sqrt(acc);
}

double self_reference_error(const Trajectory& coarse, const Trajectory& fine,
                            const InnerProduct& ip) {
    const std::size_t ratio = fine.grid.cells() / coarse.grid.cells();
    double acc = 0.0;
    for (std::size_t n = 1; n <= coarse.grid.cells(); ++n) {
        const StateVector d = diff(coarse.u[n], fine.u[n * ratio]);
        acc += coarse.grid.tau() * ip.dot(d, d);
    }
    return std::sqrt(acc);
}

}  // namespace

int cmd_run(const Options& opt) {
    RunConfig config;
    try {
        config = parse_config_file(opt.config_path);
    } catch (const ConfigError& e) {
        emit_error(exit_config_error, e.what(), e.field);
        return exit_config_error;
    }

    try {
        const auto started = std::chrono::steady_clock::now();
        const Problem p = build_problem(config, config.N);

        FlowConfig fc;
        fc.pair = p.pair;
        fc.grid = p.grid;
        fc.energy = p.energy;
        fc.u0 = p.u0;
        fc.forcing = p.forcing;
        fc.nu = p.nu;
        fc.residual_tol = p.residual_tol;
        const Trajectory traj = solve_flow(fc);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        const fs::path dir = resolve_out_dir(config, opt);
        write_trajectory_csv(dir / "trajectory.csv", traj);
        if (p.pde) write_space_time_csv(dir / "solution_xt.csv", traj, p.pde->grid());

        json summary;
        summary["problem"] = config.problem;
        summary["config_hash"] = config.hash;
        summary["config_echo"] = config.raw_text;
        summary["N"] = config.N;
        summary["T"] = config.T;
        const double max_residual =
            *std::max_element(traj.residual.begin(), traj.residual.end());
        summary["max_residual"] = max_residual;
        summary["final_energy"] = traj.energy.back();
        summary["wall_time_seconds"] = wall;
        std::ofstream(dir / "summary.json") << summary.dump(2) << "\n";

        if (!opt.quiet) {
            std::cout << "run: N=" << config.N
                      << " max_residual=" << io::format_double(max_residual)
                      << " final_energy=" << io::format_double(traj.energy.back()) << " -> "
                      << dir.string() << "\n";
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        emit_error(exit_config_error, e.what(), e.field);
        return exit_config_error;
    } catch (const std::exception& e) {
        emit_error(exit_solver_error, e.what());
        return exit_solver_error;
    }
}

int cmd_verify(const Options& opt) {
    RunConfig config;
    try {
        config = parse_config_file(opt.config_path);
    } catch (const ConfigError& e) {
        emit_error(exit_config_error, e.what(), e.field);
        return exit_config_error;
    }

    try {
        const Problem p = build_problem(config, config.N);
        Trajectory traj;
        if (!opt.traj_path.empty()) {
            traj = load_trajectory(opt.traj_path, p);
        } else {
            FlowConfig fc;
            fc.pair = p.pair;
            fc.grid = p.grid;
            fc.energy = p.energy;
            fc.u0 = p.u0;
            fc.forcing = p.forcing;
            fc.nu = p.nu;
            fc.residual_tol = p.residual_tol;
            traj = solve_flow(fc);
        }

        const fs::path dir = resolve_out_dir(config, opt);
        const InnerProduct& ip = p.energy->space();
        std::vector<Certificate> certs;

        if (p.energy->autonomous()) {
            certs.push_back(chain_rule_certificate(
                traj, p.pair, *p.energy,
                refinement_tolerance(config.verify_base_tol, 256, config.N)));
        }

        const EnergyBoundReport bounds = energy_certificate(traj, p.pair, ip);
        certs.push_back(bounds.cert);

        {
            Rng rng(config.seed);
            std::vector<double> mins;
            Certificate worst;
            for (std::size_t k = 0; k < config.verify_histories; ++k) {
                const auto hist = random_history(rng, p.grid, ip.dim);
                Certificate c = ab_estimate_certificate(hist, p.pair, p.grid, ip,
                                                        config.verify_base_tol);
                if (k == 0 || c.min_slack < worst.min_slack) worst = std::move(c);
            }
            certs.push_back(std::move(worst));
        }

        json report = json::array();
        if (!p.energy->autonomous()) {
            const TdChainRuleReport td = td_chain_rule_report(traj, p.pair, ip);
            json j = certificate_json(td.cert);
            j["best_c"] = td.best_c;
            j["best_eps"] = td.best_eps;
            report.push_back(j);
            if (!opt.quiet)
                std::cout << td.cert.name << ": " << (td.cert.pass ? "PASS" : "FAIL")
                          << " (best_c=" << io::format_double(td.best_c) << ")\n";
            certs.push_back(td.cert);
        }

        bool all_pass = true;
        for (const Certificate& c : certs) {
            if (c.name != "td_chain_rule") {
                report.push_back(certificate_json(c));
                if (!opt.quiet)
                    std::cout << c.name << ": " << (c.pass ? "PASS" : "FAIL")
                              << " (min_slack=" << io::format_double(c.min_slack)
                              << ", tol=" << io::format_double(c.tolerance) << ")\n";
            }
            if (!c.slack.empty() && c.slack.size() == p.grid.cells())
                write_slack_csv(dir / ("cert_" + c.name + ".csv"), p.grid, c);
            all_pass = all_pass && c.pass;
        }
        std::ofstream(dir / "certificates.json") << report.dump(2) << "\n";
        return all_pass ? exit_ok : exit_cert_failed;
    } catch (const ConfigError& e) {
        emit_error(exit_config_error, e.what(), e.field);
        return exit_config_error;
    } catch (const std::exception& e) {
        emit_error(exit_solver_error, e.what());
        return exit_solver_error;
    }
}

int cmd_convergence(const Options& opt) {
    RunConfig config;
    try {
        config = parse_config_file(opt.config_path);
    } catch (const ConfigError& e) {
        emit_error(exit_config_error, e.what(), e.field);
        return exit_config_error;
    }
    if (opt.levels < 2) {
        emit_error(exit_config_error, "convergence: need at least two levels", "levels");
        return exit_config_error;
    }

    try {
        const std::size_t L = static_cast<std::size_t>(opt.levels);
        std::vector<std::size_t> Ns(L);
        for (std::size_t j = 0; j < L; ++j) Ns[j] = config.N << j;

        std::vector<Trajectory> runs(L);
        const std::size_t workers = std::min<std::size_t>(thread_cap(), L);
        std::vector<std::future<Trajectory>> futures(L);
        for (std::size_t j = 0; j < L; j += workers) {
            const std::size_t end = std::min(L, j + workers);
            for (std::size_t k = j; k < end; ++k) {
                futures[k] = std::async(std::launch::async, [&config, &Ns, k]() {
                    const Problem p = build_problem(config, Ns[k]);
                    FlowConfig fc;
                    fc.pair = p.pair;
                    fc.grid = p.grid;
                    fc.energy = p.energy;
                    fc.u0 = p.u0;
                    fc.forcing = p.forcing;
                    fc.nu = p.nu;
                    fc.residual_tol = p.residual_tol;
                    return solve_flow(fc);
                });
            }
            for (std::size_t k = j; k < end; ++k) runs[k] = futures[k].get();
        }

        const Problem ref = build_problem(config, config.N);
        const bool has_oracle = static_cast<bool>(ref.oracle);
        const std::size_t top = has_oracle ? L : L - 1;
        std::vector<double> errors(top);
        for (std::size_t j = 0; j < top; ++j) {
            errors[j] = has_oracle ? history_error(runs[j], ref)
                                   : self_reference_error(runs[j], runs[L - 1],
                                                          ref.energy->space());
        }

        const fs::path dir = resolve_out_dir(config, opt);
        io::CsvWriter csv(dir / "convergence.csv", {"N", "tau", "error", "order"});
        for (std::size_t j = 0; j < top; ++j) {
            const double tau = config.T / static_cast<double>(Ns[j]);
            std::vector<std::string> cells = {std::to_string(Ns[j]), io::format_double(tau),
                                              io::format_double(errors[j]), ""};
            if (j > 0) cells[3] = io::format_double(std::log2(errors[j - 1] / errors[j]));
            csv.raw_row(cells);
            if (!opt.quiet) {
                std::cout << "N=" << Ns[j] << " error=" << io::format_double(errors[j]);
                if (j > 0)
                    std::cout << " order=" << io::format_double(std::log2(errors[j - 1] / errors[j]));
                std::cout << (has_oracle ? "" : " (vs finest run)") << "\n";
            }
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        emit_error(exit_config_error, e.what(), e.field);
        return exit_config_error;
    } catch (const std::exception& e) {
        emit_error(exit_solver_error, e.what());
        return exit_solver_error;
    }
}

int cmd_kernels(const Options& opt) {
    RunConfig config;
    try {
        config = parse_config_file(opt.config_path);
    } catch (const ConfigError& e) {
        emit_error(exit_config_error, e.what(), e.field);
        return exit_config_error;
    }

    try {
        const KernelPair pair = make_pair(config);
        const TimeGrid grid(config.T, config.N);
        const ConvWeights wk = cell_weights(pair, grid, KernelSide::k);
        const ConvWeights wl = cell_weights(pair, grid, KernelSide::ell);
        const PcIdentityReport rep = check_pc_identity(pair, grid);

        const fs::path dir = resolve_out_dir(config, opt);
        {
            io::CsvWriter csv(dir / "weights_k.csv", {"m", "kappa"});
            for (std::size_t m = 0; m < wk.kappa.size(); ++m)
                csv.row({static_cast<double>(m), wk.kappa[m]});
        }
        {
            io::CsvWriter csv(dir / "weights_ell.csv", {"m", "kappa"});
            for (std::size_t m = 0; m < wl.kappa.size(); ++m)
                csv.row({static_cast<double>(m), wl.kappa[m]});
        }
        {
            io::CsvWriter csv(dir / "identity.csv", {"n", "t", "node_error"});
            for (std::size_t n = 1; n <= grid.cells(); ++n)
                csv.row({static_cast<double>(n), grid.node(n), rep.node_error[n - 1]});
        }

        json j;
        j["kind"] = config.kernel_kind;
        if (config.kernel_kind == "riemann_liouville") j["alpha"] = config.kernel_alpha;
        j["tau"] = grid.tau();
        j["mass_k"] = wk.mass();
        j["mass_ell"] = wl.mass();
        j["identity_max_error"] = rep.max_error;
        j["identity_l1_error"] = rep.l1_error;
        j["config_hash"] = config.hash;
        std::ofstream(dir / "kernels.json") << j.dump(2) << "\n";

        if (!opt.quiet) {
            std::cout << "kernels: mass_k=" << io::format_double(wk.mass())
                      << " mass_ell=" << io::format_double(wl.mass())
                      << " identity_l1_error=" << io::format_double(rep.l1_error) << " -> "
                      << dir.string() << "\n";
        }
        return exit_ok;
    } catch (const std::exception& e) {
        emit_error(exit_solver_error, e.what());
        return exit_solver_error;
    }
}

}  // namespace fracflow::cli
