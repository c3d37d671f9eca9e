#pragma once

#include <functional>
#include <vector>

#include "fracflow/grid.hpp"

namespace fracflow {

enum class KernelKind { riemann_liouville, classical, tabulated };
enum class KernelSide { k, ell };

// Nonincreasing kernel pair (k, ell) whose convolution is identically one.
// riemann_liouville: k(t) = t^{-alpha}/Gamma(1-alpha), ell(t) = t^{alpha-1}/Gamma(alpha).
// classical: k is a unit point mass at zero, ell == 1 (first-order limit).
// tabulated: user-supplied callables, optionally with exact antiderivatives.
class KernelPair {
public:
    static KernelPair riemann_liouville(double alpha);
    static KernelPair classical();
    static KernelPair tabulated(std::function<double(double)> k,
                                std::function<double(double)> ell,
                                std::function<double(double)> k_mass = {},
                                std::function<double(double)> ell_mass = {});

    KernelKind kind() const { return kind_; }

    // Order parameter; only meaningful for the riemann_liouville kind.
    double alpha() const;

    bool has_antiderivatives() const;

    // Cumulative masses K(t) = int_0^t k, L(t) = int_0^t ell.
    double k_mass(double t) const;
    double ell_mass(double t) const;

    // Pointwise kernel values; singular at zero for the fractional kind.
    double k_value(double t) const;
    double ell_value(double t) const;

private:
    KernelPair() = default;

    KernelKind kind_ = KernelKind::classical;
    double alpha_ = 1.0;
    std::function<double(double)> k_, ell_, k_mass_, ell_mass_;
};

// Cell-average convolution weights kappa_m ~ (1/tau) int_{t_m}^{t_{m+1}} kernel.
// Computed from exact antiderivatives when available; otherwise by per-cell
// numeric quadrature (graded near the origin), flagged in from_quadrature.
struct ConvWeights {
    std::vector<double> kappa;
    double tau = 0.0;
    bool from_quadrature = false;

    // tau * sum kappa; telescopes to the cumulative kernel mass at T.
    double mass() const {
        double s = 0.0;
        for (double v : kappa) s += v;
        return tau * s;
    }
};

ConvWeights cell_weights(const KernelPair& pair, const TimeGrid& grid, KernelSide side);

// Defect of the discrete convolution identity (k * ell)(t_n) = 1.
// node_error[n-1] = |tau sum_{j=0}^{n-1} kappa_j(k) kappa_{n-1-j}(ell) - 1|.
// For self-similar kernels the node errors depend only on the node index, so
// the refinement-sensitive figure of merit is the integrated l1_error.
struct PcIdentityReport {
    std::vector<double> node_error;
    double max_error = 0.0;
    double l1_error = 0.0;
};

PcIdentityReport check_pc_identity(const KernelPair& pair, const TimeGrid& grid);

// Node samples of the resolvent kernel r solving lambda*r + (ell * r) = 1.
// r(0) = 1/lambda exactly; output is nonnegative and nonincreasing.
std::vector<double> resolvent_kernel(const KernelPair& pair, double lambda,
                                     const TimeGrid& grid);

// Discrete convolution at the nodes: out[n-1] = tau sum_{j=1}^{n} kappa_{n-j} v[j-1]
// for n = 1..N, where v holds node samples v_1..v_N (the value at t_0 never
// enters; cells carry their right-node sample).
std::vector<double> discrete_convolution(const ConvWeights& weights,
                                         std::span<const double> v);

// E_alpha(z) for alpha in (0, 1], z <= 0. Power series while cancellation is
// harmless, completely monotone spectral integral for large |z|.
double mittag_leffler(double alpha, double z);

}  // namespace fracflow
