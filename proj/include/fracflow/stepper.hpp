#pragma once

#include <functional>
#include <memory>

#include "fracflow/convex.hpp"
#include "fracflow/grid.hpp"
#include "fracflow/kernels.hpp"

namespace fracflow {

// One implicit prox step per node: with weights kappa of the first kernel and
// mu = kappa_0 + nu/tau, the update solves mu u_n + dphi^{t_n}(u_n) = r_n (as
// an inclusion) for
//   r_n = f_n + mu u_{n-1} - sum_{j<n} kappa_{n-j}(u_j - u_{j-1}),
// realized as u_n = prox(t_n, 1/mu, r_n/mu).
struct FlowConfig {
    KernelPair pair = KernelPair::classical();
    TimeGrid grid{1.0, 1};
    std::shared_ptr<const Energy> energy;
    StateVector u0;
    std::function<StateVector(double)> forcing;  // null means zero
    double nu = 0.0;                             // optional viscosity, >= 0
    double residual_tol = 1e-8;
};

struct Trajectory {
    TimeGrid grid{1.0, 1};
    std::vector<StateVector> u;      // N+1 states
    std::vector<StateVector> xi;     // N subgradients, xi[n-1] at t_n
    std::vector<StateVector> deriv;  // N nonlocal derivative values D_n
    std::vector<double> energy;      // N+1 energy values phi^{t_n}(u_n)
    std::vector<double> residual;    // N equation residuals
};

struct FlowStepError : std::runtime_error {
    FlowStepError(std::size_t step_, std::string what_, Trajectory partial_)
        : std::runtime_error(std::move(what_)), step(step_), partial(std::move(partial_)) {}
    std::size_t step;
    Trajectory partial;
};

Trajectory solve_flow(const FlowConfig& config);

// D_n = sum_{j=1}^{n} kappa_{n-j} (u_j - u_{j-1}) for n = 1..N.
std::vector<StateVector> nonlocal_derivative(const ConvWeights& weights,
                                             std::span<const StateVector> u);

// Squared-distance stability bound: time-integrated ||u_a - u_b||^2 against
// c_T (||u_a(0) - u_b(0)||^2 + time-integrated ||f_a - f_b||^2) with
// c_T = max(4 L(T)^2, 2 T), L the cumulative mass of the second kernel.
struct DependenceReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double c_T = 0.0;
    bool ok = false;
};

DependenceReport continuous_dependence_check(const Trajectory& a, const Trajectory& b,
                                             const std::vector<StateVector>& fa,
                                             const std::vector<StateVector>& fb,
                                             const KernelPair& pair,
                                             const InnerProduct& space,
                                             double slack = 0.1);

}  // namespace fracflow
