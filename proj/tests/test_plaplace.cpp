#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracflow/plaplace.hpp"
#include "fracflow/rng.hpp"

using namespace fracflow;

namespace {

constexpr double pi = std::numbers::pi;

StateVector sine_profile(const SpatialGrid& sg) {
    StateVector u(sg.d);
    for (std::size_t i = 0; i < sg.d; ++i) u[i] = std::sin(pi * sg.node(i));
    return u;
}

// Dense Gaussian elimination with partial pivoting; independent oracle for
// the tridiagonal prox solve.
StateVector dense_solve(std::vector<std::vector<double>> A, StateVector b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
        std::swap(A[k], A[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = A[i][k] / A[k][k];
            for (std::size_t j = k; j < n; ++j) A[i][j] -= m * A[k][j];
            b[i] -= m * b[k];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * b[j];
        b[i] = s / A[i][i];
    }
    return b;
}

}  // namespace

TEST_CASE("spatial grid places interior nodes") {
    SpatialGrid sg(4);
    CHECK(sg.h() == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(sg.node(0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(sg.node(3) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK_THROWS_AS(SpatialGrid(0), std::invalid_argument);
}

TEST_CASE("moving domain validates endpoint ranges") {
    CHECK_NOTHROW(MovingDomain(0.0, 1.0));
    CHECK_NOTHROW(MovingDomain(0.2, 0.8, 0.1, 0.1, 2.0, 0.5));
    CHECK_THROWS_AS(MovingDomain(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MovingDomain(0.0, 1.1), std::invalid_argument);
    CHECK_THROWS_AS(MovingDomain(0.1, 0.9, 0.3, 0.3), std::invalid_argument);  // ranges overlap
    CHECK_THROWS_AS(MovingDomain(0.5, 0.5), std::invalid_argument);
}

TEST_CASE("deformation map: identity cases, monotonicity, inverse") {
    MovingDomain still(0.25, 0.75);
    MovingDomain moving(0.2, 0.8, 0.1, 0.05, 2.0 * pi, 0.0);

    for (double y : {0.0, 0.1, 0.3, 0.5, 0.77, 1.0}) {
        CHECK(still.forward(0.7, y) == y);      // static: identity at every t
        CHECK(moving.forward(0.0, y) == doctest::Approx(y).epsilon(1e-13));  // zero phase
    }

    const double t = 0.37;
    CHECK(moving.forward(t, 0.2) == doctest::Approx(moving.a(t)).epsilon(1e-13));
    CHECK(moving.forward(t, 0.8) == doctest::Approx(moving.b(t)).epsilon(1e-13));
    CHECK(moving.forward(t, 0.0) == 0.0);
    CHECK(moving.forward(t, 1.0) == 1.0);

    // Strict monotonicity sampled on a fine lattice.
    double prev = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double cur = moving.forward(t, k / 200.0);
        CHECK(cur > prev);
        prev = cur;
    }

    for (double x : {0.05, 0.33, 0.5, 0.81, 0.99}) {
        CHECK(std::abs(moving.forward(t, moving.inverse(t, x)) - x) <= 1e-10);
        CHECK(std::abs(moving.inverse(t, moving.forward(t, x)) - x) <= 1e-10);
    }

    // Endpoints move as configured.
    CHECK(moving.a(0.25) == doctest::Approx(0.3).epsilon(1e-13));   // sin(pi/2) = 1
    CHECK(moving.b(0.25) == doctest::Approx(0.85).epsilon(1e-13));
}

TEST_CASE("interior mask is strict and the energy enforces the constraint") {
    SpatialGrid sg(4);  // nodes 0.2 0.4 0.6 0.8
    MovingDomain dom(0.2, 0.7);
    PLaplaceEnergy phi(sg, 2.0, dom);

    auto m = phi.mask(0.0);
    CHECK(!m[0]);  // node exactly on the boundary is outside
    CHECK(m[1]);
    CHECK(m[2]);
    CHECK(!m[3]);

    StateVector ok{0.0, 1.0, 1.0, 0.0};
    CHECK(std::isfinite(phi.eval(0.0, ok)));
    StateVector leak{0.1, 1.0, 1.0, 0.0};
    CHECK(phi.eval(0.0, leak) == std::numeric_limits<double>::infinity());
    StateVector tiny{0.0, 1.0, 1.0, 1e-300};
    CHECK(phi.eval(0.0, tiny) == std::numeric_limits<double>::infinity());

    CHECK_THROWS_AS(PLaplaceEnergy(sg, 1.5, dom), std::invalid_argument);
    CHECK_THROWS_AS(PLaplaceEnergy(sg, 2.0, dom, 0.0), std::invalid_argument);
}

TEST_CASE("sine profile energy matches the discrete eigenvalue identity") {
    // For p = 2 on the full interval the discrete energy of sin(pi x) is
    // exactly lambda_h / 4 with lambda_h = (4/h^2) sin^2(pi h / 2), which
    // approaches pi^2/4 under spatial refinement.
    for (std::size_t d : {16, 64}) {
        SpatialGrid sg(d);
        PLaplaceEnergy phi(sg, 2.0, MovingDomain(0.0, 1.0));
        const double h = sg.h();
        const double lambda_h = 4.0 / (h * h) * std::pow(std::sin(pi * h / 2.0), 2);
        const double val = phi.eval(0.0, sine_profile(sg));
        CHECK(val == doctest::Approx(lambda_h / 4.0).epsilon(1e-12));
        // Leading discretization error is pi^4 h^2 / 48 ~ 2.03 h^2.
        CHECK(std::abs(val - pi * pi / 4.0) < 2.1 / static_cast<double>((d + 1) * (d + 1)));
    }
}

TEST_CASE("p = 2 prox agrees with a dense linear solve") {
    SpatialGrid sg(64);
    PLaplaceEnergy phi(sg, 2.0, MovingDomain(0.0, 1.0));
    const double h = sg.h();
    const double lambda = 0.37;

    Rng rng(1234);
    StateVector z(sg.d);
    for (double& v : z) v = rng.normal();

    // Optimality system (v - z)/lambda + L v = 0 with the Dirichlet
    // second-difference matrix L.
    std::vector<std::vector<double>> A(sg.d, std::vector<double>(sg.d, 0.0));
    for (std::size_t i = 0; i < sg.d; ++i) {
        A[i][i] = 1.0 / lambda + 2.0 / (h * h);
        if (i > 0) A[i][i - 1] = -1.0 / (h * h);
        if (i + 1 < sg.d) A[i][i + 1] = -1.0 / (h * h);
    }
    auto oracle = dense_solve(A, scaled(z, 1.0 / lambda));

    auto [w, xi] = phi.prox(0.0, lambda, z);
    for (std::size_t i = 0; i < sg.d; ++i) {
        CHECK(w[i] == doctest::Approx(oracle[i]).epsilon(1e-10));
        CHECK(xi[i] == doctest::Approx((z[i] - w[i]) / lambda).epsilon(1e-12));
    }
}

TEST_CASE("p = 3 prox satisfies first-order optimality against perturbations") {
    SpatialGrid sg(24);
    MovingDomain dom(0.2, 0.9);
    PLaplaceEnergy phi(sg, 3.0, dom, 1e-11);
    const double lambda = 0.2;

    Rng rng(77);
    StateVector z(sg.d);
    for (double& v : z) v = 0.5 * rng.normal();

    auto [w, xi] = phi.prox(0.0, lambda, z);
    CHECK(std::isfinite(phi.eval(0.0, w)));  // constraint respected

    const auto& ip = phi.space();
    const auto objective = [&](const StateVector& v) {
        const StateVector d = diff(v, z);
        return 0.5 / lambda * ip.dot(d, d) + phi.eval(0.0, v);
    };
    const double f0 = objective(w);
    const auto m = phi.mask(0.0);
    for (int trial = 0; trial < 50; ++trial) {
        StateVector v = w;
        for (std::size_t i = 0; i < sg.d; ++i)
            if (m[i]) v[i] += 1e-4 * rng.normal();
        CHECK(objective(v) >= f0 - 1e-11);
    }
}

TEST_CASE("prox handles the empty slice by collapsing to zero") {
    SpatialGrid sg(3);  // nodes 0.25 0.5 0.75
    PLaplaceEnergy phi(sg, 2.0, MovingDomain(0.26, 0.45));
    auto m = phi.mask(0.0);
    CHECK(!m[0]);
    CHECK(!m[1]);
    CHECK(!m[2]);
    auto [w, xi] = phi.prox(0.0, 0.5, {1.0, 2.0, 3.0});
    for (double v : w) CHECK(v == 0.0);
    CHECK(xi[1] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(phi.eval(0.0, w) == 0.0);
}

TEST_CASE("inner solve reports failure when the tolerance is unreachable") {
    SpatialGrid sg(16);
    PLaplaceEnergy phi(sg, 3.0, MovingDomain(0.0, 1.0), 1e-30);
    StateVector z(sg.d, 1.0);
    CHECK_THROWS_AS(phi.prox(0.0, 1.0, z), InnerSolveError);
    try {
        phi.prox(0.0, 1.0, z);
    } catch (const InnerSolveError& e) {
        CHECK(e.gradient_norm > 0.0);
        CHECK(e.iterations > 0);
    }
}

TEST_CASE("slice transport: exact when slices coincide, consistent roundtrip") {
    SpatialGrid sg(128);
    MovingDomain still(0.1, 0.9);
    PLaplaceEnergy stat(sg, 2.0, still);
    StateVector w(sg.d, 0.0);
    auto ms = stat.mask(0.0);
    for (std::size_t i = 0; i < sg.d; ++i)
        if (ms[i]) w[i] = std::sin(pi * sg.node(i));
    auto moved = stat.shift_map(0.8, 0.1, w);
    for (std::size_t i = 0; i < sg.d; ++i) CHECK(moved[i] == w[i]);

    MovingDomain dom(0.2, 0.8, 0.1, 0.05, 2.0 * pi, 0.0);
    PLaplaceEnergy phi(sg, 2.0, dom);
    const double s = 0.1, t = 0.35;
    StateVector v(sg.d, 0.0);
    auto msrc = phi.mask(s);
    for (std::size_t i = 0; i < sg.d; ++i) {
        const double x = sg.node(i);
        if (msrc[i]) v[i] = std::sin(pi * (x - dom.a(s)) / (dom.b(s) - dom.a(s)));
    }

    auto fwd = phi.shift_map(t, s, v);
    CHECK(std::isfinite(phi.eval(t, fwd)));  // lands inside the slice at t
    auto same = phi.shift_map(s, s, v);
    for (std::size_t i = 0; i < sg.d; ++i) CHECK(same[i] == v[i]);

    auto back = phi.shift_map(s, t, fwd);
    double worst = 0.0;
    for (std::size_t i = 0; i < sg.d; ++i) {
        const double x = sg.node(i);
        // Compare away from the endpoints, where the mask truncation bites.
        if (x > dom.a(s) + 0.05 && x < dom.b(s) - 0.05)
            worst = std::max(worst, std::abs(back[i] - v[i]));
    }
    CHECK(worst < 5e-3);  // two piecewise-linear resamples: O(h^2) each
}

TEST_CASE("dimension checks throw") {
    SpatialGrid sg(8);
    PLaplaceEnergy phi(sg, 2.0, MovingDomain(0.0, 1.0));
    StateVector bad(7, 0.0);
    CHECK_THROWS_AS(phi.eval(0.0, bad), std::invalid_argument);
    CHECK_THROWS_AS(phi.prox(0.0, 1.0, bad), std::invalid_argument);
    CHECK_THROWS_AS(phi.shift_map(0.1, 0.0, bad), std::invalid_argument);
    StateVector z(8, 1.0);
    CHECK_THROWS_AS(phi.prox(0.0, 0.0, z), std::invalid_argument);
}

TEST_CASE("diffusion eigenmode decays at the semi-discrete rate") {
    // p = 2, full static interval, sine initial data: the exact semi-discrete
    // solution is sin(pi x) E_alpha(-lambda_h t^alpha).
    CdpConfig cfg;
    cfg.pair = KernelPair::riemann_liouville(0.5);
    cfg.grid = TimeGrid(1.0, 256);
    cfg.space = SpatialGrid(32);
    cfg.domain = MovingDomain(0.0, 1.0);
    cfg.p = 2.0;
    cfg.u0 = sine_profile(cfg.space);

    auto rep = run_cdp(cfg);
    const double h = cfg.space.h();
    const double lambda_h = 4.0 / (h * h) * std::pow(std::sin(pi * h / 2.0), 2);
    const double decay = mittag_leffler(0.5, -lambda_h);  // t = T = 1

    double err2 = 0.0;
    for (std::size_t i = 0; i < cfg.space.d; ++i) {
        const double exact = std::sin(pi * cfg.space.node(i)) * decay;
        const double diff = rep.traj.u.back()[i] - exact;
        err2 += h * diff * diff;
    }
    CHECK(std::sqrt(err2) < 1e-3);

    CHECK(rep.sup_energy == doctest::Approx(rep.traj.energy.front()).epsilon(1e-12));
    CHECK(rep.max_weighted_derivative_energy > 0.0);
    CHECK(std::isfinite(rep.max_weighted_derivative_energy));
}

TEST_CASE("moving-domain run keeps the state inside the slice") {
    CdpConfig cfg;
    cfg.pair = KernelPair::riemann_liouville(0.5);
    cfg.grid = TimeGrid(1.0, 64);
    cfg.space = SpatialGrid(48);
    cfg.domain = MovingDomain(0.2, 0.8, 0.1, 0.05, 2.0 * pi, 0.5);
    cfg.p = 3.0;
    cfg.prox_tol = 1e-9;
    cfg.forcing = [](double t, double x) { return std::sin(2.0 * pi * t) + x; };

    PLaplaceEnergy phi(cfg.space, cfg.p, cfg.domain);
    cfg.u0.assign(cfg.space.d, 0.0);
    auto m0 = phi.mask(0.0);
    for (std::size_t i = 0; i < cfg.space.d; ++i) {
        const double x = cfg.space.node(i);
        if (m0[i]) cfg.u0[i] = (x - cfg.domain.a(0.0)) * (cfg.domain.b(0.0) - x);
    }

    auto rep = run_cdp(cfg);
    REQUIRE(rep.traj.u.size() == 65);
    for (std::size_t n = 1; n <= 64; ++n) {
        auto m = phi.mask(cfg.grid.node(n));
        for (std::size_t i = 0; i < cfg.space.d; ++i)
            if (!m[i]) CHECK(rep.traj.u[n][i] == 0.0);
    }
    for (double r : rep.traj.residual) CHECK(r <= cfg.residual_tol);
    CHECK(rep.sup_energy > 0.0);

    CdpConfig bad = cfg;
    bad.u0.assign(cfg.space.d - 1, 0.0);
    CHECK_THROWS_AS(run_cdp(bad), std::invalid_argument);
}
