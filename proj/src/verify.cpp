#include "fracflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fracflow {

Certificate make_certificate(std::string name, std::vector<double> slack, double tolerance) {
    Certificate c;
    c.name = std::move(name);
    c.slack = std::move(slack);
    c.tolerance = tolerance;
    c.min_slack = c.slack.empty() ? 0.0
                                  : *std::min_element(c.slack.begin(), c.slack.end());
    c.pass = c.min_slack >= -tolerance;
    return c;
}

double refinement_tolerance(double base_tol, std::size_t base_N, std::size_t N) {
    return base_tol * static_cast<double>(base_N) / static_cast<double>(N);
}

Certificate chain_rule_certificate(const Trajectory& traj, const KernelPair& pair,
                                   const Energy& energy, double tolerance) {
    const std::size_t N = traj.grid.cells();
    const double tau = traj.grid.tau();
    const InnerProduct& ip = energy.space();
    const ConvWeights wk = cell_weights(pair, traj.grid, KernelSide::k);

    std::vector<double> egap(N);
    for (std::size_t n = 1; n <= N; ++n) egap[n - 1] = traj.energy[n] - traj.energy[0];
    const std::vector<double> rhs = discrete_convolution(wk, egap);

    std::vector<double> slack(N);
    double lhs = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        lhs += tau * ip.dot(traj.deriv[n - 1], traj.xi[n - 1]);
        slack[n - 1] = lhs - rhs[n - 1];
    }
    return make_certificate("chain_rule", std::move(slack), tolerance);
}

Certificate ab_estimate_certificate(std::span<const StateVector> u, const KernelPair& pair,
                                    const TimeGrid& grid, const InnerProduct& space,
                                    double tolerance) {
    if (u.size() != grid.cells() + 1)
        throw std::invalid_argument("ab_estimate_certificate: history length mismatch");
    for (double v : u[0])
        if (v != 0.0)
            throw std::invalid_argument("ab_estimate_certificate: history must start at zero");

    const std::size_t N = grid.cells();
    const ConvWeights wk = cell_weights(pair, grid, KernelSide::k);
    const ConvWeights wl = cell_weights(pair, grid, KernelSide::ell);
    const std::vector<StateVector> D = nonlocal_derivative(wk, u);

    std::vector<double> dsq(N);
    for (std::size_t n = 0; n < N; ++n) dsq[n] = space.dot(D[n], D[n]);
    const std::vector<double> conv = discrete_convolution(wl, dsq);

    std::vector<double> slack(N);
    double lhs = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        const StateVector du = diff(u[n], u[n - 1]);
        lhs += space.dot(D[n - 1], du);
        slack[n - 1] = lhs - 0.5 * conv[n - 1];
    }
    return make_certificate("derivative_coercivity", std::move(slack), tolerance);
}

EnergyBoundReport energy_certificate(const Trajectory& traj, const KernelPair& pair,
                                     const InnerProduct& space) {
    const std::size_t N = traj.grid.cells();
    EnergyBoundReport rep;
    rep.sup_energy = *std::max_element(traj.energy.begin(), traj.energy.end());

    std::vector<double> dsq(N);
    for (std::size_t n = 0; n < N; ++n) dsq[n] = space.dot(traj.deriv[n], traj.deriv[n]);
    const ConvWeights wl = cell_weights(pair, traj.grid, KernelSide::ell);
    const std::vector<double> conv = discrete_convolution(wl, dsq);
    rep.max_weighted_derivative_energy = *std::max_element(conv.begin(), conv.end());

    const bool finite = std::isfinite(rep.sup_energy) &&
                        std::isfinite(rep.max_weighted_derivative_energy);
    rep.cert.name = "bounded_energy";
    rep.cert.slack = conv;
    rep.cert.min_slack = rep.max_weighted_derivative_energy;
    rep.cert.tolerance = std::numeric_limits<double>::infinity();
    rep.cert.pass = finite;
    return rep;
}

TdChainRuleReport td_chain_rule_report(const Trajectory& traj, const KernelPair& pair,
                                       const InnerProduct& space) {
    const std::size_t N = traj.grid.cells();
    const double tau = traj.grid.tau();
    const double T = traj.grid.horizon();
    const ConvWeights wk = cell_weights(pair, traj.grid, KernelSide::k);

    std::vector<double> evals(N);
    for (std::size_t n = 1; n <= N; ++n) evals[n - 1] = traj.energy[n];
    const std::vector<double> kconv = discrete_convolution(wk, evals);

    const double phi0 = traj.energy[0];
    std::vector<double> lhs(N), xi_sq(N), abs_phi(N), kmass(N);
    double acc_lhs = 0.0, acc_xi = 0.0, acc_phi = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        acc_lhs += tau * space.dot(traj.deriv[n - 1], traj.xi[n - 1]);
        acc_xi += tau * space.dot(traj.xi[n - 1], traj.xi[n - 1]);
        acc_phi += tau * std::abs(traj.energy[n]);
        lhs[n - 1] = acc_lhs;
        xi_sq[n - 1] = acc_xi;
        abs_phi[n - 1] = acc_phi;
        kmass[n - 1] = pair.has_antiderivatives()
                           ? pair.k_mass(traj.grid.node(n))
                           : wk.tau * std::accumulate(wk.kappa.begin(), wk.kappa.begin() + n, 0.0);
    }

    TdChainRuleReport rep;
    rep.best_c = std::numeric_limits<double>::infinity();
    for (int e = 1; e <= 9; ++e) {
        const double eps = 0.1 * e;
        double c = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            const double a = kconv[n] - phi0 * kmass[n];
            const double b = eps * xi_sq[n] + (T * (1.0 + std::abs(phi0)) + abs_phi[n]) / eps;
            c = std::max(c, std::max(0.0, (a - lhs[n]) / b));
        }
        rep.constants.emplace_back(eps, c);
        if (c < rep.best_c) {
            rep.best_c = c;
            rep.best_eps = eps;
        }
    }

    rep.cert.name = "td_chain_rule";
    rep.cert.slack = {rep.best_c};
    rep.cert.min_slack = rep.best_c;
    rep.cert.tolerance = std::numeric_limits<double>::infinity();
    rep.cert.pass = std::isfinite(rep.best_c);
    return rep;
}

}  // namespace fracflow
