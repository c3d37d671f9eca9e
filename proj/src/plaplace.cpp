#include "fracflow/plaplace.hpp"

#include <algorithm>
#include <cmath>

namespace fracflow {

namespace {

// In-place Thomas solve of a tridiagonal system; lower/upper have size n-1.
void tridiag_solve(std::vector<double>& lower, std::vector<double>& diag,
                   std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i - 1] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

double signed_power(double g, double p) {
    if (g == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(g), p - 1.0), g);
}

}  // namespace

MovingDomain::MovingDomain(double a0, double b0, double amp_a, double amp_b,
                           double omega, double phase)
    : a0_(a0), b0_(b0), amp_a_(amp_a), amp_b_(amp_b), omega_(omega), phase_(phase) {
    const double alo = a0 - std::abs(amp_a), ahi = a0 + std::abs(amp_a);
    const double blo = b0 - std::abs(amp_b), bhi = b0 + std::abs(amp_b);
    if (!(alo >= 0.0) || !(bhi <= 1.0) || !(ahi < blo))
        throw std::invalid_argument("MovingDomain: endpoint ranges must stay ordered inside [0, 1]");
}

double MovingDomain::a(double t) const { return a0_ + amp_a_ * std::sin(omega_ * t); }
double MovingDomain::b(double t) const { return b0_ + amp_b_ * std::sin(omega_ * t + phase_); }

double MovingDomain::Hermite::operator()(double v) const {
    int i = n - 2;
    for (int j = 0; j < n - 1; ++j) {
        if (v <= x[j + 1]) { i = j; break; }
    }
    const double hseg = x[i + 1] - x[i];
    const double s = (v - x[i]) / hseg;
    const double s2 = s * s, s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * y[i] + (s3 - 2.0 * s2 + s) * hseg * m[i] +
           (-2.0 * s3 + 3.0 * s2) * y[i + 1] + (s3 - s2) * hseg * m[i + 1];
}

MovingDomain::Hermite MovingDomain::map_at(double t) const {
    const double ax[4] = {0.0, a0_, b0_, 1.0};
    const double ay[4] = {0.0, a(t), b(t), 1.0};

    Hermite hm;
    for (int i = 0; i < 4; ++i) {
        // Drop duplicated anchors (full-interval domains collapse endpoints).
        if (hm.n > 0 && ax[i] <= hm.x[hm.n - 1]) continue;
        hm.x[hm.n] = ax[i];
        hm.y[hm.n] = ay[i];
        ++hm.n;
    }

    // Fritsch-Carlson slopes keep the interpolant strictly monotone on
    // strictly increasing data.
    double sec[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < hm.n - 1; ++i) sec[i] = (hm.y[i + 1] - hm.y[i]) / (hm.x[i + 1] - hm.x[i]);
    hm.m[0] = sec[0];
    hm.m[hm.n - 1] = sec[hm.n - 2];
    for (int i = 1; i < hm.n - 1; ++i) {
        const double w1 = 2.0 * (hm.x[i + 1] - hm.x[i]) + (hm.x[i] - hm.x[i - 1]);
        const double w2 = (hm.x[i + 1] - hm.x[i]) + 2.0 * (hm.x[i] - hm.x[i - 1]);
        hm.m[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
    }
    return hm;
}

double MovingDomain::forward(double t, double y) const {
    if (y <= 0.0) return y;
    if (y >= 1.0) return y == 1.0 ? 1.0 : y;
    if (is_static()) return y;
    return map_at(t)(y);
}

double MovingDomain::inverse(double t, double x) const {
    if (x <= 0.0 || x >= 1.0 || is_static()) return x;
    const Hermite hm = map_at(t);
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (hm(mid) < x) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

PLaplaceEnergy::PLaplaceEnergy(SpatialGrid grid, double p, MovingDomain domain,
                               double prox_tol)
    : grid_(grid), p_(p), domain_(domain), prox_tol_(prox_tol),
      space_{grid.d, grid.h()} {
    if (!(p >= 2.0)) throw std::invalid_argument("PLaplaceEnergy: exponent must satisfy p >= 2");
    if (!(prox_tol > 0.0)) throw std::invalid_argument("PLaplaceEnergy: tolerance must be positive");
}

std::vector<bool> PLaplaceEnergy::mask(double t) const {
    const double at = domain_.a(t), bt = domain_.b(t);
    std::vector<bool> m(grid_.d);
    for (std::size_t i = 0; i < grid_.d; ++i) {
        const double x = grid_.node(i);
        m[i] = x > at && x < bt;
    }
    return m;
}

double PLaplaceEnergy::eval(double t, const StateVector& w) const {
    if (w.size() != grid_.d) throw std::invalid_argument("PLaplaceEnergy: dimension mismatch");
    const std::vector<bool> m = mask(t);
    for (std::size_t i = 0; i < grid_.d; ++i)
        if (!m[i] && w[i] != 0.0) return infinity;

    const double h = grid_.h();
    double acc = 0.0;
    // Edges (x_i, x_{i+1}), i = 0..d, with boundary values pinned to zero;
    // an edge contributes when either endpoint lies inside the slice.
    for (std::size_t e = 0; e <= grid_.d; ++e) {
        const bool left_in = e > 0 && m[e - 1];
        const bool right_in = e < grid_.d && m[e];
        if (!left_in && !right_in) continue;
        const double wl = e > 0 ? w[e - 1] : 0.0;
        const double wr = e < grid_.d ? w[e] : 0.0;
        acc += std::pow(std::abs((wr - wl) / h), p_);
    }
    return h / p_ * acc;
}

ProxResult PLaplaceEnergy::prox(double t, double lambda, const StateVector& z) const {
    require_lambda(lambda);
    if (z.size() != grid_.d) throw std::invalid_argument("PLaplaceEnergy: dimension mismatch");
    const std::vector<bool> m = mask(t);

    std::size_t lo = grid_.d, hi = 0;
    for (std::size_t i = 0; i < grid_.d; ++i) {
        if (m[i]) { lo = std::min(lo, i); hi = std::max(hi, i); }
    }
    ProxResult out;
    out.w.assign(grid_.d, 0.0);
    if (lo > hi) {  // empty slice: constraint forces the origin
        out.xi = scaled(z, 1.0 / lambda);
        return out;
    }

    const std::size_t nf = hi - lo + 1;  // free nodes are contiguous
    const double h = grid_.h();
    std::vector<double> v(nf), zf(nf);
    for (std::size_t i = 0; i < nf; ++i) { v[i] = z[lo + i]; zf[i] = z[lo + i]; }

    // grad[i] = (v_i - z_i)/lambda + (flux_{left edge} - flux_{right edge})/h.
    std::vector<double> g(nf + 1), flux(nf + 1), grad(nf);
    const auto edge_gradients = [&](const std::vector<double>& vv) {
        for (std::size_t e = 0; e <= nf; ++e) {
            const double wl = e > 0 ? vv[e - 1] : 0.0;
            const double wr = e < nf ? vv[e] : 0.0;
            g[e] = (wr - wl) / h;
        }
    };
    const auto objective = [&](const std::vector<double>& vv) {
        double q = 0.0, en = 0.0;
        for (std::size_t i = 0; i < nf; ++i) q += (vv[i] - zf[i]) * (vv[i] - zf[i]);
        for (std::size_t e = 0; e <= nf; ++e) {
            const double wl = e > 0 ? vv[e - 1] : 0.0;
            const double wr = e < nf ? vv[e] : 0.0;
            en += std::pow(std::abs((wr - wl) / h), p_);
        }
        return 0.5 / lambda * h * q + h / p_ * en;
    };

    const double jac_eps = 1e-8;  // regularizes the Jacobian only, never the gradient
    std::vector<double> lower(nf > 1 ? nf - 1 : 0), diag(nf), upper(nf > 1 ? nf - 1 : 0);
    std::vector<double> step(nf), trial(nf);

    const int max_iterations = 500;
    int stalled = 0;
    double gnorm = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        edge_gradients(v);
        for (std::size_t e = 0; e <= nf; ++e) flux[e] = signed_power(g[e], p_);
        gnorm = 0.0;
        for (std::size_t i = 0; i < nf; ++i) {
            grad[i] = (v[i] - zf[i]) / lambda + (flux[i] - flux[i + 1]) / h;
            gnorm += grad[i] * grad[i];
        }
        gnorm = std::sqrt(h * gnorm);
        if (gnorm <= prox_tol_) break;
        if (it == max_iterations - 1) throw InnerSolveError(gnorm, it);

        const bool use_newton = stalled < 50;
        if (use_newton) {
            for (std::size_t e = 0; e <= nf; ++e)
                flux[e] = (p_ - 1.0) * std::pow(g[e] * g[e] + jac_eps * jac_eps, 0.5 * (p_ - 2.0));
            for (std::size_t i = 0; i < nf; ++i) {
                diag[i] = 1.0 / lambda + (flux[i] + flux[i + 1]) / (h * h);
                step[i] = -grad[i];
            }
            for (std::size_t i = 0; i + 1 < nf; ++i) lower[i] = upper[i] = -flux[i + 1] / (h * h);
            tridiag_solve(lower, diag, upper, step);
        } else {
            for (std::size_t i = 0; i < nf; ++i) step[i] = -lambda * grad[i];
        }

        double slope = 0.0;  // <grad, step>_H, negative along descent directions
        for (std::size_t i = 0; i < nf; ++i) slope += grad[i] * step[i];
        slope *= h;
        if (slope >= 0.0) {  // Jacobian step failed to descend; fall back
            for (std::size_t i = 0; i < nf; ++i) step[i] = -lambda * grad[i];
            slope = 0.0;
            for (std::size_t i = 0; i < nf; ++i) slope += grad[i] * step[i];
            slope *= h;
        }

        const double f0 = objective(v);
        if (-slope <= 1e-12 * (1.0 + std::abs(f0))) {
            // The predicted decrease is below the objective's rounding floor,
            // so a line search can only dither; the subproblem is strongly
            // convex and the step is O(lambda * grad), take it whole.
            for (std::size_t i = 0; i < nf; ++i) v[i] += step[i];
            stalled = 0;
            continue;
        }
        double scale = 1.0;
        bool moved = false;
        while (scale > 1e-14) {
            for (std::size_t i = 0; i < nf; ++i) trial[i] = v[i] + scale * step[i];
            if (objective(trial) <= f0 + 1e-4 * scale * slope) {
                v.swap(trial);
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        stalled = (moved && scale == 1.0) ? 0 : stalled + 1;
        if (!moved) throw InnerSolveError(gnorm, it);
    }

    for (std::size_t i = 0; i < nf; ++i) out.w[lo + i] = v[i];
    out.xi = diff(z, out.w);
    for (double& x : out.xi) x /= lambda;
    return out;
}

StateVector PLaplaceEnergy::shift_map(double t, double s, const StateVector& w) const {
    if (w.size() != grid_.d) throw std::invalid_argument("PLaplaceEnergy: dimension mismatch");
    const std::vector<bool> mt = mask(t);
    StateVector out(grid_.d, 0.0);

    const bool same_slice = domain_.a(t) == domain_.a(s) && domain_.b(t) == domain_.b(s);
    const double h = grid_.h();
    const auto interp = [&](double x) {
        // Piecewise-linear in the node values with zero boundary extension.
        if (x <= 0.0 || x >= 1.0) return 0.0;
        const double pos = x / h;
        const std::size_t left = static_cast<std::size_t>(pos);  // 0 means boundary node
        const double frac = pos - static_cast<double>(left);
        const double wl = left == 0 ? 0.0 : w[left - 1];
        const double wr = left >= grid_.d ? 0.0 : w[left];
        return wl + frac * (wr - wl);
    };

    for (std::size_t i = 0; i < grid_.d; ++i) {
        if (!mt[i]) continue;
        if (same_slice) {
            out[i] = w[i];
        } else {
            const double y = domain_.inverse(t, grid_.node(i));
            out[i] = interp(domain_.forward(s, y));
        }
    }
    return out;
}

CdpReport run_cdp(const CdpConfig& config) {
    auto energy = std::make_shared<PLaplaceEnergy>(config.space, config.p, config.domain,
                                                   config.prox_tol);
    const std::size_t d = config.space.d;
    if (config.u0.size() != d) throw std::invalid_argument("run_cdp: initial state dimension mismatch");

    FlowConfig fc;
    fc.pair = config.pair;
    fc.grid = config.grid;
    fc.energy = energy;
    fc.u0 = config.u0;
    fc.nu = config.nu;
    fc.residual_tol = config.residual_tol;
    if (config.forcing) {
        const SpatialGrid& sg = config.space;
        auto f = config.forcing;
        fc.forcing = [f, sg](double t) {
            StateVector v(sg.d);
            for (std::size_t i = 0; i < sg.d; ++i) v[i] = f(t, sg.node(i));
            return v;
        };
    }

    CdpReport rep;
    rep.traj = solve_flow(fc);
    rep.energy = energy;

    const std::size_t N = config.grid.cells();
    for (std::size_t n = 1; n <= N; ++n) {
        const std::vector<bool> m = energy->mask(config.grid.node(n));
        for (std::size_t i = 0; i < d; ++i) {
            if (!m[i] && rep.traj.u[n][i] != 0.0)
                throw std::logic_error("run_cdp: state leaked outside the moving slice");
        }
    }

    rep.sup_energy = *std::max_element(rep.traj.energy.begin(), rep.traj.energy.end());
    std::vector<double> dsq(N);
    for (std::size_t n = 0; n < N; ++n)
        dsq[n] = energy->space().dot(rep.traj.deriv[n], rep.traj.deriv[n]);
    const ConvWeights wl = cell_weights(config.pair, config.grid, KernelSide::ell);
    const std::vector<double> conv = discrete_convolution(wl, dsq);
    rep.max_weighted_derivative_energy = *std::max_element(conv.begin(), conv.end());
    return rep;
}

}  // namespace fracflow
