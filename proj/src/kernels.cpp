#include "fracflow/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fracflow {

namespace {

double require_alpha(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("KernelPair: alpha must lie in (0, 1)");
    return alpha;
}

// Adaptive Simpson on [a, b]; used only for tabulated kernels without
// antiderivatives.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double split = left + right;
    if (depth <= 0 || std::abs(split - whole) < 15.0 * tol) {
        return split + (split - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate_cell(const std::function<double(double)>& f, double a, double b) {
    if (a > 0.0) {
        const double m = 0.5 * (a + b);
        return adaptive_simpson(f, a, b, f(a), f(m), f(b), 1e-12, 40);
    }
    // First cell: the integrand may blow up at zero. Sum dyadic subcells
    // (b/2^{j+1}, b/2^j] inward until the contribution is negligible.
    double total = 0.0;
    double hi = b;
    for (int j = 0; j < 2000; ++j) {
        const double lo = 0.5 * hi;
        const double m = 0.5 * (lo + hi);
        const double piece = adaptive_simpson(f, lo, hi, f(lo), f(m), f(hi), 1e-14, 30);
        total += piece;
        if (std::abs(piece) < 1e-15 * std::max(1.0, std::abs(total)) && j > 8) break;
        hi = lo;
    }
    return total;
}

}  // namespace

KernelPair KernelPair::riemann_liouville(double alpha) {
    KernelPair p;
    p.kind_ = KernelKind::riemann_liouville;
    p.alpha_ = require_alpha(alpha);
    return p;
}

KernelPair KernelPair::classical() {
    KernelPair p;
    p.kind_ = KernelKind::classical;
    p.alpha_ = 1.0;
    return p;
}

KernelPair KernelPair::tabulated(std::function<double(double)> k,
                                 std::function<double(double)> ell,
                                 std::function<double(double)> k_mass,
                                 std::function<double(double)> ell_mass) {
    if (!k || !ell) throw std::invalid_argument("KernelPair: tabulated kind needs both kernels");
    if (static_cast<bool>(k_mass) != static_cast<bool>(ell_mass))
        throw std::invalid_argument("KernelPair: supply antiderivatives for both kernels or neither");
    KernelPair p;
    p.kind_ = KernelKind::tabulated;
    p.k_ = std::move(k);
    p.ell_ = std::move(ell);
    p.k_mass_ = std::move(k_mass);
    p.ell_mass_ = std::move(ell_mass);
    return p;
}

double KernelPair::alpha() const {
    if (kind_ != KernelKind::riemann_liouville)
        throw std::logic_error("KernelPair: alpha is defined for the riemann_liouville kind only");
    return alpha_;
}

bool KernelPair::has_antiderivatives() const {
    return kind_ != KernelKind::tabulated || static_cast<bool>(k_mass_);
}

double KernelPair::k_mass(double t) const {
    if (t < 0.0) throw std::invalid_argument("KernelPair: negative time");
    switch (kind_) {
        case KernelKind::riemann_liouville:
            return std::pow(t, 1.0 - alpha_) / std::tgamma(2.0 - alpha_);
        case KernelKind::classical:
            return t > 0.0 ? 1.0 : 0.0;
        case KernelKind::tabulated:
            if (!k_mass_) throw std::logic_error("KernelPair: no antiderivative tabulated");
            return k_mass_(t);
    }
    return 0.0;
}

double KernelPair::ell_mass(double t) const {
    if (t < 0.0) throw std::invalid_argument("KernelPair: negative time");
    switch (kind_) {
        case KernelKind::riemann_liouville:
            return std::pow(t, alpha_) / std::tgamma(1.0 + alpha_);
        case KernelKind::classical:
            return t;
        case KernelKind::tabulated:
            if (!ell_mass_) throw std::logic_error("KernelPair: no antiderivative tabulated");
            return ell_mass_(t);
    }
    return 0.0;
}

double KernelPair::k_value(double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("KernelPair: kernel values need t > 0");
    switch (kind_) {
        case KernelKind::riemann_liouville:
            return std::pow(t, -alpha_) / std::tgamma(1.0 - alpha_);
        case KernelKind::classical:
            throw std::logic_error("KernelPair: classical first kernel is a point mass");
        case KernelKind::tabulated:
            return k_(t);
    }
    return 0.0;
}

double KernelPair::ell_value(double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("KernelPair: kernel values need t > 0");
    switch (kind_) {
        case KernelKind::riemann_liouville:
            return std::pow(t, alpha_ - 1.0) / std::tgamma(alpha_);
        case KernelKind::classical:
            return 1.0;
        case KernelKind::tabulated:
            return ell_(t);
    }
    return 0.0;
}

ConvWeights cell_weights(const KernelPair& pair, const TimeGrid& grid, KernelSide side) {
    const std::size_t N = grid.cells();
    const double tau = grid.tau();
    ConvWeights w;
    w.tau = tau;
    w.kappa.resize(N);

    if (pair.kind() == KernelKind::classical && side == KernelSide::k) {
        // Point mass at zero: the whole unit mass sits in the first cell.
        w.kappa[0] = 1.0 / tau;
        std::fill(w.kappa.begin() + 1, w.kappa.end(), 0.0);
        return w;
    }

    if (pair.has_antiderivatives()) {
        for (std::size_t m = 0; m < N; ++m) {
            const double lo = grid.node(m), hi = grid.node(m + 1);
            const double dM = side == KernelSide::k ? pair.k_mass(hi) - pair.k_mass(lo)
                                                    : pair.ell_mass(hi) - pair.ell_mass(lo);
            w.kappa[m] = dM / tau;
        }
        return w;
    }

    const auto f = [&](double t) {
        return side == KernelSide::k ? pair.k_value(t) : pair.ell_value(t);
    };
    for (std::size_t m = 0; m < N; ++m) {
        w.kappa[m] = integrate_cell(f, grid.node(m), grid.node(m + 1)) / tau;
    }
    w.from_quadrature = true;
    return w;
}

PcIdentityReport check_pc_identity(const KernelPair& pair, const TimeGrid& grid) {
    const ConvWeights wk = cell_weights(pair, grid, KernelSide::k);
    const ConvWeights wl = cell_weights(pair, grid, KernelSide::ell);
    const std::size_t N = grid.cells();
    const double tau = grid.tau();

    PcIdentityReport rep;
    rep.node_error.resize(N);
    for (std::size_t n = 1; n <= N; ++n) {
        double conv = 0.0;
        for (std::size_t j = 0; j < n; ++j) conv += wk.kappa[j] * wl.kappa[n - 1 - j];
        rep.node_error[n - 1] = std::abs(tau * conv - 1.0);
    }
    rep.max_error = *std::max_element(rep.node_error.begin(), rep.node_error.end());
    for (double e : rep.node_error) rep.l1_error += e;
    rep.l1_error *= tau;
    return rep;
}

std::vector<double> resolvent_kernel(const KernelPair& pair, double lambda,
                                     const TimeGrid& grid) {
    if (!(lambda > 0.0)) throw std::invalid_argument("resolvent_kernel: lambda must be positive");
    const ConvWeights wl = cell_weights(pair, grid, KernelSide::ell);
    const std::size_t N = grid.cells();
    const double tau = grid.tau();

    std::vector<double> r(N + 1);
    r[0] = 1.0 / lambda;
    // lambda r_n + tau sum_{j=1}^{n} kappa_{n-j} r_j = 1; the unknown carries
    // the first cell weight of ell.
    for (std::size_t n = 1; n <= N; ++n) {
        double hist = 0.0;
        for (std::size_t j = 1; j < n; ++j) hist += wl.kappa[n - j] * r[j];
        r[n] = (1.0 - tau * hist) / (lambda + tau * wl.kappa[0]);
    }
    return r;
}

std::vector<double> discrete_convolution(const ConvWeights& weights,
                                         std::span<const double> v) {
    const std::size_t N = v.size();
    if (weights.kappa.size() < N)
        throw std::invalid_argument("discrete_convolution: not enough weights");
    std::vector<double> out(N, 0.0);
    for (std::size_t n = 1; n <= N; ++n) {
        double s = 0.0;
        for (std::size_t j = 1; j <= n; ++j) s += weights.kappa[n - j] * v[j - 1];
        out[n - 1] = weights.tau * s;
    }
    return out;
}

double mittag_leffler(double alpha, double z) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("mittag_leffler: alpha must lie in (0, 1]");
    if (z > 0.0)
        throw std::invalid_argument("mittag_leffler: argument must be nonpositive");
    if (z == 0.0) return 1.0;
    if (alpha == 1.0) return std::exp(z);

    const double x = -z;
    const double t = std::pow(x, 1.0 / alpha);
    if (t <= 5.0) {
        // Alternating series; the largest term is ~e^{x^{1/alpha}} <= e^5, so
        // cancellation costs at most ~3 digits.
        double sum = 1.0, term = 1.0;
        for (int m = 1; m <= 10000; ++m) {
            // term_m = (-x)^m / Gamma(alpha m + 1), built multiplicatively in
            // log space to dodge overflow of numerator and denominator alone.
            term = -term * x *
                   std::exp(std::lgamma(alpha * (m - 1) + 1.0) - std::lgamma(alpha * m + 1.0));
            sum += term;
            if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
        }
        return sum;
    }

    // Completely monotone spectral form, v = e^u:
    //   E_alpha(-x) = sin(pi alpha)/(pi alpha)
    //       * int e^u exp(-t e^{u/alpha}) / (e^{2u} + 2 e^u c + 1) du,
    // c = cos(pi alpha). Integrand decays like e^u on the left and
    // double-exponentially on the right; trapezoid converges spectrally within
    // the pole-free strip. The integrand has poles at u = +-i pi (1-alpha),
    // which pinch the real axis as alpha -> 1.
    const double c = std::cos(std::numbers::pi * alpha);
    const double s = std::sin(std::numbers::pi * alpha);
    const double du = std::min(0.004, 0.02 * alpha);

    if (alpha <= 0.75) {
        // Poles sit at distance >= pi/4 from the real axis: integrate there.
        double acc = 0.0;
        for (double u = -40.0; u <= 6.0; u += du) {
            const double v = std::exp(u);
            const double e = -t * std::exp(u / alpha);
            if (e < -700.0) break;
            acc += v * std::exp(e) / (v * v + 2.0 * v * c + 1.0);
        }
        return s / (std::numbers::pi * alpha) * acc * du;
    }

    // Shift the contour to Im u = 3 alpha pi / 8, which clears the upper pole
    // by pi(11 alpha/8 - 1) >= 0.09 while keeping the right tail decaying
    // (cos(3 pi/8) > 0). The crossed pole contributes the residue term
    // (1/alpha) exp(-t e^{i pi (1-alpha)/alpha}), which tends to e^{-t}/alpha
    // in the first-order limit.
    const double sigma = 3.0 * alpha * std::numbers::pi / 8.0;
    std::complex<double> acc{0.0, 0.0};
    for (double u = -40.0; u <= 6.0; u += du) {
        const std::complex<double> zz{u, sigma};
        const std::complex<double> v = std::exp(zz);
        const std::complex<double> e = -t * std::exp(zz / alpha);
        if (e.real() < -700.0) break;
        acc += v * std::exp(e) / (v * v + 2.0 * v * c + 1.0);
    }
    const std::complex<double> base = s / (std::numbers::pi * alpha) * acc * du;
    const std::complex<double> pole =
        1.0 / alpha *
        std::exp(-t * std::exp(std::complex<double>{0.0, std::numbers::pi * (1.0 - alpha) / alpha}));
    return (base + pole).real();
}

}  // namespace fracflow
