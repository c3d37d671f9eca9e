#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fracflow/convex.hpp"
#include "fracflow/kernels.hpp"
#include "fracflow/stepper.hpp"

namespace fracflow {

// Pointwise slack array of a discrete inequality; the inequality holds when
// every entry stays above -tolerance.
struct Certificate {
    std::string name;
    std::vector<double> slack;
    double min_slack = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

Certificate make_certificate(std::string name, std::vector<double> slack, double tolerance);

// Tolerances shrink proportionally with the step so a certificate cannot be
// rescued by refinement noise: tol(N) = base_tol * base_N / N.
double refinement_tolerance(double base_tol, std::size_t base_N, std::size_t N);

// Chain-rule lower bound along a trajectory:
//   slack_n = tau sum_{m<=n} <D_m, xi_m> - [k * (phi(u) - phi(u_0))](t_n) >= 0
// for autonomous convex energies (exact up to inner-solver tolerance).
Certificate chain_rule_certificate(const Trajectory& traj, const KernelPair& pair,
                                   const Energy& energy, double tolerance);

// Coercivity of the nonlocal derivative against plain increments, for any
// history with u_0 = 0:
//   slack_n = sum_{m<=n} <D_m, u_m - u_{m-1}> - (1/2)(ell * ||D||^2)(t_n).
Certificate ab_estimate_certificate(std::span<const StateVector> u, const KernelPair& pair,
                                    const TimeGrid& grid, const InnerProduct& space,
                                    double tolerance);

// Boundedness figures of a trajectory: the running max of the energy and of
// the ell-weighted squared nonlocal derivative. Passes iff both are finite.
struct EnergyBoundReport {
    double sup_energy = 0.0;
    double max_weighted_derivative_energy = 0.0;
    Certificate cert;
};

EnergyBoundReport energy_certificate(const Trajectory& traj, const KernelPair& pair,
                                     const InnerProduct& space);

// Smallest constant C(eps) closing the time-dependent chain-rule inequality
//   tau sum <D_m, xi_m> >= [k * phi&(u)](t_n) - phi^0(u_0) K(t_n)
//       - eps C tau sum ||xi||^2 - (C/eps)(T (1 + |phi^0(u_0)|) + tau sum |phi|)
// over an eps grid; autonomous energies yield C = 0.
struct TdChainRuleReport {
    std::vector<std::pair<double, double>> constants;  // (eps, C(eps))
    double best_c = 0.0;
    double best_eps = 0.0;
    Certificate cert;
};

TdChainRuleReport td_chain_rule_report(const Trajectory& traj, const KernelPair& pair,
                                       const InnerProduct& space);

}  // namespace fracflow
