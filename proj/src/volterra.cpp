#include "fracflow/volterra.hpp"

#include <algorithm>
#include <cmath>

namespace fracflow {

void VolterraProblem::validate() const {
    const std::size_t N = grid.cells();
    if (dim == 0) throw std::invalid_argument("VolterraProblem: dimension must be positive");
    if (g1.size() != N + 1) throw std::invalid_argument("VolterraProblem: g1 needs N+1 node samples");
    if (g2.size() != N + 1) throw std::invalid_argument("VolterraProblem: g2 needs N+1 node samples");
    if (g3.size() != N) throw std::invalid_argument("VolterraProblem: g3 needs N cell averages");
    for (const auto& v : g1)
        if (v.size() != dim) throw std::invalid_argument("VolterraProblem: g1 sample dimension mismatch");
}

namespace {

std::vector<StateVector> march(const VolterraProblem& p) {
    const std::size_t N = p.grid.cells();
    const double tau = p.grid.tau();
    std::vector<StateVector> w(N + 1);
    w[0] = p.g1[0];

    double scale = 1.0;
    for (double v : p.g2) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, std::abs(p.g3[0]));

    for (std::size_t n = 1; n <= N; ++n) {
        const double coeff = 1.0 - tau * p.g2[n] - tau * p.g3[0];
        if (std::abs(coeff) < 1e-12 * scale) throw SingularStepError(n, coeff);
        StateVector rhs = p.g1[n];
        for (std::size_t j = 1; j < n; ++j) {
            axpy(tau * (p.g2[j] + p.g3[n - j]), w[j], rhs);
        }
        w[n] = scaled(rhs, 1.0 / coeff);
    }
    return w;
}

// Exact contraction factor of the discrete Picard map in the weighted sup
// norm max_n ||w_n|| e^{-beta t_n}.
double picard_factor(const VolterraProblem& p, double beta) {
    const std::size_t N = p.grid.cells();
    const double tau = p.grid.tau();
    double worst = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        double s = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            s += (std::abs(p.g2[j]) + std::abs(p.g3[n - j])) *
                 std::exp(-beta * tau * static_cast<double>(n - j));
        }
        worst = std::max(worst, tau * s);
    }
    return worst;
}

VolterraSolution fixed_point(const VolterraProblem& p, const FixedPointOptions& opt) {
    const std::size_t N = p.grid.cells();
    const double tau = p.grid.tau();

    double beta = opt.beta;
    double factor = picard_factor(p, beta);
    while (factor > opt.factor_cap) {
        if (beta > 1e12) throw ContractionError(factor);
        beta *= 2.0;
        factor = picard_factor(p, beta);
    }

    std::vector<StateVector> w = p.g1;
    std::vector<StateVector> next(N + 1);
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        next[0] = p.g1[0];
        for (std::size_t n = 1; n <= N; ++n) {
            StateVector rhs = p.g1[n];
            for (std::size_t j = 1; j <= n; ++j) {
                axpy(tau * (p.g2[j] + p.g3[n - j]), w[j], rhs);
            }
            next[n] = std::move(rhs);
        }
        double inc = 0.0;
        for (std::size_t n = 0; n <= N; ++n) {
            double d = 0.0;
            for (std::size_t i = 0; i < p.dim; ++i) d = std::max(d, std::abs(next[n][i] - w[n][i]));
            inc = std::max(inc, d * std::exp(-beta * p.grid.node(n)));
        }
        w.swap(next);
        if (inc <= opt.increment_tol) break;
    }
    if (it == opt.max_iterations) throw ContractionError(factor);

    VolterraSolution s;
    s.w = std::move(w);
    s.iterations = it + 1;
    s.beta = beta;
    s.contraction_factor = factor;
    return s;
}

}  // namespace

VolterraSolution solve_volterra(const VolterraProblem& problem, VolterraMethod method,
                                const FixedPointOptions& options) {
    problem.validate();
    if (method == VolterraMethod::march) {
        VolterraSolution s;
        s.w = march(problem);
        return s;
    }
    return fixed_point(problem, options);
}

std::vector<double> gronwall_bound(const VolterraProblem& problem) {
    problem.validate();
    if (problem.dim != 1)
        throw std::invalid_argument("gronwall_bound: majorants are scalar");
    for (double v : problem.g2)
        if (v < 0.0) throw std::invalid_argument("gronwall_bound: g2 must be nonnegative");
    for (double v : problem.g3)
        if (v < 0.0) throw std::invalid_argument("gronwall_bound: g3 must be nonnegative");

    const auto w = march(problem);
    std::vector<double> G(w.size());
    for (std::size_t n = 0; n < w.size(); ++n) G[n] = w[n][0];
    return G;
}

bool check_dominated(std::span<const double> f, std::span<const double> bound, double tol) {
    if (f.size() != bound.size())
        throw std::invalid_argument("check_dominated: length mismatch");
    for (std::size_t n = 0; n < f.size(); ++n)
        if (f[n] > bound[n] + tol) return false;
    return true;
}

}  // namespace fracflow
