#pragma once

#include <cstddef>
#include <functional>
#include <memory>

#include "fracflow/convex.hpp"
#include "fracflow/grid.hpp"
#include "fracflow/stepper.hpp"

namespace fracflow {

// Sinusoidally moving open interval (a(t), b(t)) inside the unit interval,
//   a(t) = a0 + amp_a sin(omega t),  b(t) = b0 + amp_b sin(omega t + phase),
// together with the node-anchored deformation map between time slices.
class MovingDomain {
public:
    MovingDomain(double a0, double b0, double amp_a = 0.0, double amp_b = 0.0,
                 double omega = 0.0, double phase = 0.0);

    double a(double t) const;
    double b(double t) const;
    bool is_static() const { return amp_a_ == 0.0 && amp_b_ == 0.0; }

    // Monotone map of the unit interval sending the reference endpoints
    // (a0, b0) to (a(t), b(t)); the identity for static domains and whenever
    // the slice coincides with the reference interval (t = 0 with zero phase).
    double forward(double t, double y) const;
    // Inverse by bisection; |forward(t, inverse(t, x)) - x| <= 1e-12.
    double inverse(double t, double x) const;

private:
    struct Hermite {
        double x[4], y[4], m[4];
        int n = 0;
        double operator()(double v) const;
    };
    Hermite map_at(double t) const;

    double a0_, b0_, amp_a_, amp_b_, omega_, phase_;
};

// Interior nodes x_i = i h, i = 1..d, h = 1/(d+1), of the unit interval.
struct SpatialGrid {
    std::size_t d;

    explicit SpatialGrid(std::size_t d_) : d(d_) {
        if (d == 0) throw std::invalid_argument("SpatialGrid: need at least one node");
    }
    double h() const { return 1.0 / static_cast<double>(d + 1); }
    double node(std::size_t i) const { return h() * static_cast<double>(i + 1); }
};

// Dirichlet p-energy (1/p) int |grad w|^p over the moving interval, +infinity
// for states not vanishing outside it. The prox solves the strongly convex
// inner problem by damped Newton with a tridiagonal Jacobian; for p = 2 the
// first Newton step is the exact linear solve.
class PLaplaceEnergy final : public Energy {
public:
    PLaplaceEnergy(SpatialGrid grid, double p, MovingDomain domain,
                   double prox_tol = 1e-10);

    const InnerProduct& space() const override { return space_; }
    double eval(double t, const StateVector& w) const override;
    ProxResult prox(double t, double lambda, const StateVector& z) const override;
    bool autonomous() const override { return domain_.is_static(); }
    bool nonnegative() const override { return true; }
    bool has_shift_map() const override { return true; }
    // Pullback along the domain deformation: piecewise-linear resample of w at
    // forward(s, inverse(t, x_i)), zeroed outside the slice at t.
    StateVector shift_map(double t, double s, const StateVector& w) const override;

    const SpatialGrid& grid() const { return grid_; }
    const MovingDomain& domain() const { return domain_; }
    double exponent() const { return p_; }
    // Strict interior test a(t) < x_i < b(t), per node.
    std::vector<bool> mask(double t) const;

private:
    SpatialGrid grid_;
    double p_;
    MovingDomain domain_;
    double prox_tol_;
    InnerProduct space_;
};

// Newton failed to reach the gradient tolerance in the prox subproblem.
struct InnerSolveError : std::runtime_error {
    InnerSolveError(double gradient_norm_, int iterations_)
        : std::runtime_error("PLaplaceEnergy: inner minimization did not converge"),
          gradient_norm(gradient_norm_), iterations(iterations_) {}
    double gradient_norm;
    int iterations;
};

struct CdpConfig {
    KernelPair pair = KernelPair::classical();
    TimeGrid grid{1.0, 1};
    SpatialGrid space{1};
    MovingDomain domain{0.0, 1.0};
    double p = 2.0;
    StateVector u0;                                  // node values, zero outside the slice at 0
    std::function<double(double, double)> forcing;   // f(t, x), null means zero
    double nu = 0.0;
    double residual_tol = 1e-8;
    double prox_tol = 1e-10;
};

struct CdpReport {
    Trajectory traj;
    std::shared_ptr<const PLaplaceEnergy> energy;
    double sup_energy = 0.0;
    double max_weighted_derivative_energy = 0.0;  // max_n (ell * ||D||^2)(t_n)
};

// Full constrained-domain run: solve the flow, enforce the zero extension and
// report the two boundedness figures the solution must keep under refinement.
CdpReport run_cdp(const CdpConfig& config);

}  // namespace fracflow
