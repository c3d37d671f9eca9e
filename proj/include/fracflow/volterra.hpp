#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fracflow/grid.hpp"
#include "fracflow/kernels.hpp"

namespace fracflow {

// Linear second-kind equation w(t) = g1(t) + int_0^t g2 w + (g3 * w)(t) on a
// uniform grid. g1 holds node samples of dimension dim; g2 node samples; g3
// cell averages of the convolution kernel (signs unrestricted).
struct VolterraProblem {
    TimeGrid grid;
    std::size_t dim = 1;
    std::vector<StateVector> g1;  // size N+1
    std::vector<double> g2;       // size N+1
    std::vector<double> g3;       // size N

    void validate() const;
};

enum class VolterraMethod { march, fixed_point };

struct FixedPointOptions {
    double beta = 1.0;            // initial weight rate, doubled until contractive
    double factor_cap = 0.9;      // escalate beta until the factor drops below this
    double increment_tol = 1e-12; // weighted sup-norm stopping threshold
    int max_iterations = 200;
};

struct VolterraSolution {
    std::vector<StateVector> w;  // size N+1
    int iterations = 0;          // 0 for the direct march
    double beta = 0.0;           // weight rate actually used (fixed point only)
    double contraction_factor = 0.0;
};

// Direct march hits a nearly singular step coefficient 1 - tau g2 - tau kappa_0.
struct SingularStepError : std::runtime_error {
    SingularStepError(std::size_t node_, double coefficient_)
        : std::runtime_error("solve_volterra: step coefficient vanished; refine the grid"),
          node(node_), coefficient(coefficient_) {}
    std::size_t node;
    double coefficient;
};

// Picard iteration stopped contracting (or never did at any tested weight).
struct ContractionError : std::runtime_error {
    explicit ContractionError(double factor_)
        : std::runtime_error("solve_volterra: fixed point is not a contraction on this grid"),
          factor(factor_) {}
    double factor;
};

VolterraSolution solve_volterra(const VolterraProblem& problem, VolterraMethod method,
                                const FixedPointOptions& options = {});

// Majorant for f <= g1 + int g2 f + g3 * f with nonnegative g2, g3: the march
// solution of the equality, which dominates every sequence satisfying the
// discrete inequality.
std::vector<double> gronwall_bound(const VolterraProblem& problem);

// True when f_n <= bound_n + tol at every node.
bool check_dominated(std::span<const double> f, std::span<const double> bound, double tol);

}  // namespace fracflow
