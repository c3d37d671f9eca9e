#include "fracflow/stepper.hpp"

#include <cmath>
#include <utility>

namespace fracflow {

Trajectory solve_flow(const FlowConfig& config) {
    if (!config.energy) throw std::invalid_argument("solve_flow: energy is required");
    if (!(config.nu >= 0.0)) throw std::invalid_argument("solve_flow: nu must be nonnegative");
    const InnerProduct& ip = config.energy->space();
    if (config.u0.size() != ip.dim)
        throw std::invalid_argument("solve_flow: initial state dimension mismatch");
    if (!std::isfinite(config.energy->eval(0.0, config.u0)))
        throw std::invalid_argument("solve_flow: initial state must have finite energy");

    const TimeGrid& grid = config.grid;
    const std::size_t N = grid.cells();
    const double tau = grid.tau();
    const ConvWeights wk = cell_weights(config.pair, grid, KernelSide::k);
    const double mu = wk.kappa[0] + config.nu / tau;

    Trajectory traj;
    traj.grid = grid;
    traj.u.reserve(N + 1);
    traj.u.push_back(config.u0);
    traj.xi.reserve(N);
    traj.deriv.reserve(N);
    traj.residual.reserve(N);
    traj.energy.reserve(N + 1);
    traj.energy.push_back(config.energy->eval(0.0, config.u0));

    std::vector<StateVector> incr;  // u_j - u_{j-1}
    incr.reserve(N);

    const StateVector zero(ip.dim, 0.0);
    for (std::size_t n = 1; n <= N; ++n) {
        const double t = grid.node(n);
        const StateVector f = config.forcing ? config.forcing(t) : zero;
        if (f.size() != ip.dim) {
            throw FlowStepError(n, "solve_flow: forcing dimension mismatch", std::move(traj));
        }

        StateVector history(ip.dim, 0.0);
        for (std::size_t j = 1; j < n; ++j) axpy(wk.kappa[n - j], incr[j - 1], history);

        StateVector r = f;
        axpy(mu, traj.u.back(), r);
        axpy(-1.0, history, r);

        ProxResult step;
        try {
            step = config.energy->prox(t, 1.0 / mu, scaled(r, 1.0 / mu));
        } catch (const std::exception& e) {
            throw FlowStepError(n, std::string("solve_flow: prox failed: ") + e.what(),
                                std::move(traj));
        }

        StateVector du = diff(step.w, traj.u.back());
        StateVector D = history;
        axpy(wk.kappa[0], du, D);

        // Equation residual D_n + (nu/tau)(u_n - u_{n-1}) + xi_n - f_n.
        StateVector res = D;
        axpy(config.nu / tau, du, res);
        axpy(1.0, step.xi, res);
        axpy(-1.0, f, res);
        const double rnorm = ip.norm(res);

        traj.energy.push_back(config.energy->eval(t, step.w));
        traj.u.push_back(std::move(step.w));
        traj.xi.push_back(std::move(step.xi));
        traj.deriv.push_back(std::move(D));
        traj.residual.push_back(rnorm);
        incr.push_back(std::move(du));

        if (rnorm > config.residual_tol) {
            throw FlowStepError(n, "solve_flow: residual exceeded tolerance", std::move(traj));
        }
    }
    return traj;
}

std::vector<StateVector> nonlocal_derivative(const ConvWeights& weights,
                                             std::span<const StateVector> u) {
    if (u.size() < 2) throw std::invalid_argument("nonlocal_derivative: need at least two states");
    const std::size_t N = u.size() - 1;
    if (weights.kappa.size() < N)
        throw std::invalid_argument("nonlocal_derivative: not enough weights");

    std::vector<StateVector> D(N);
    for (std::size_t n = 1; n <= N; ++n) {
        StateVector acc(u[0].size(), 0.0);
        for (std::size_t j = 1; j <= n; ++j) {
            StateVector du = diff(u[j], u[j - 1]);
            axpy(weights.kappa[n - j], du, acc);
        }
        D[n - 1] = std::move(acc);
    }
    return D;
}

DependenceReport continuous_dependence_check(const Trajectory& a, const Trajectory& b,
                                             const std::vector<StateVector>& fa,
                                             const std::vector<StateVector>& fb,
                                             const KernelPair& pair,
                                             const InnerProduct& space,
                                             double slack) {
    if (a.u.size() != b.u.size())
        throw std::invalid_argument("continuous_dependence_check: grids differ");
    const std::size_t N = a.u.size() - 1;
    if (fa.size() != N || fb.size() != N)
        throw std::invalid_argument("continuous_dependence_check: need N forcing samples");
    const double tau = a.grid.tau();
    const double T = a.grid.horizon();

    DependenceReport rep;
    const double LT = pair.ell_mass(T);
    rep.c_T = std::max(4.0 * LT * LT, 2.0 * T);

    for (std::size_t n = 1; n <= N; ++n) {
        const StateVector d = diff(a.u[n], b.u[n]);
        rep.lhs += tau * space.dot(d, d);
    }
    const StateVector d0 = diff(a.u[0], b.u[0]);
    double fint = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        const StateVector df = diff(fa[n], fb[n]);
        fint += tau * space.dot(df, df);
    }
    rep.rhs = rep.c_T * (space.dot(d0, d0) + fint);
    rep.ok = rep.lhs <= rep.rhs * (1.0 + slack) + 1e-14;
    return rep;
}

}  // namespace fracflow
