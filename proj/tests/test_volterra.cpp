#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fracflow/volterra.hpp"

using namespace fracflow;

namespace {

VolterraProblem scalar_problem(TimeGrid grid, double g1_const, double g2_const,
                               std::vector<double> g3) {
    VolterraProblem p{grid, 1, {}, {}, std::move(g3)};
    p.g1.assign(grid.cells() + 1, StateVector{g1_const});
    p.g2.assign(grid.cells() + 1, g2_const);
    if (p.g3.empty()) p.g3.assign(grid.cells(), 0.0);
    return p;
}

}  // namespace

TEST_CASE("problem validation rejects malformed inputs") {
    TimeGrid g(1.0, 4);
    auto p = scalar_problem(g, 1.0, 0.0, {});
    CHECK_NOTHROW(p.validate());

    auto bad = p;
    bad.g1.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.g2.push_back(0.0);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.g3.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.dim = 2;  // g1 samples stay scalar
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.dim = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("march reproduces the geometric closed form for constant data") {
    // w = 1 + int_0^t w has discrete solution w_n = (1 - tau)^{-n} exactly.
    TimeGrid g(1.0, 1024);
    auto p = scalar_problem(g, 1.0, 1.0, {});
    auto s = solve_volterra(p, VolterraMethod::march);
    const double tau = g.tau();
    for (std::size_t n : {std::size_t{1}, std::size_t{37}, std::size_t{1024}}) {
        const double exact = std::pow(1.0 - tau, -static_cast<double>(n));
        CHECK(s.w[n][0] == doctest::Approx(exact).epsilon(1e-12));
    }

    // Against the continuum solution e^t the scheme is first order with
    // leading error e * tau / 2 at the endpoint.
    double worst = 0.0;
    for (std::size_t n = 0; n <= g.cells(); ++n)
        worst = std::max(worst, std::abs(s.w[n][0] - std::exp(g.node(n))));
    CHECK(worst < 1.4e-3);
    CHECK(worst > 1.2e-3);

    TimeGrid g2(1.0, 2048);
    auto s2 = solve_volterra(scalar_problem(g2, 1.0, 1.0, {}), VolterraMethod::march);
    double worst2 = 0.0;
    for (std::size_t n = 0; n <= g2.cells(); ++n)
        worst2 = std::max(worst2, std::abs(s2.w[n][0] - std::exp(g2.node(n))));
    CHECK(worst2 / worst == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("memory relaxation converges to the fractional decay profile") {
    // w = 1 - (ell * w) discretizes u' of order 1/2 relaxation; at t = 1 the
    // limit is the frozen high-precision value of the decay function.
    const double exact = 0.427583576155807;
    auto pair = KernelPair::riemann_liouville(0.5);
    TimeGrid g(1.0, 1024);
    auto wl = cell_weights(pair, g, KernelSide::ell);
    std::vector<double> g3(wl.kappa);
    for (double& v : g3) v = -v;
    auto p = scalar_problem(g, 1.0, 0.0, std::move(g3));
    auto s = solve_volterra(p, VolterraMethod::march);
    CHECK(std::abs(s.w.back()[0] - exact) < 1e-3);

    // Same recursion as the resolvent at unit shift: r + ell * r = 1.
    auto r = resolvent_kernel(pair, 1.0, g);
    for (std::size_t n = 1; n <= g.cells(); ++n)
        CHECK(s.w[n][0] == doctest::Approx(r[n]).epsilon(1e-13));
}

TEST_CASE("march and fixed point solve the same implicit system") {
    TimeGrid g(1.0, 256);
    auto pair = KernelPair::classical();
    auto wl = cell_weights(pair, g, KernelSide::ell);
    std::vector<double> g3(wl.kappa);
    for (double& v : g3) v *= -0.3;

    VolterraProblem p{g, 2, {}, {}, std::move(g3)};
    p.g1.resize(g.cells() + 1);
    p.g2.resize(g.cells() + 1);
    for (std::size_t n = 0; n <= g.cells(); ++n) {
        const double t = g.node(n);
        p.g1[n] = {std::cos(t), 1.0 + t};
        p.g2[n] = -0.5 + 0.2 * std::sin(3.0 * t);
    }

    auto sm = solve_volterra(p, VolterraMethod::march);
    auto sf = solve_volterra(p, VolterraMethod::fixed_point);
    CHECK(sf.iterations > 1);
    CHECK(sf.contraction_factor <= 0.9);
    double gap = 0.0;
    for (std::size_t n = 0; n <= g.cells(); ++n)
        for (std::size_t i = 0; i < 2; ++i)
            gap = std::max(gap, std::abs(sm.w[n][i] - sf.w[n][i]));
    CHECK(gap < 1e-8);
}

TEST_CASE("march refuses a vanishing step coefficient") {
    TimeGrid g(1.0, 8);
    auto p = scalar_problem(g, 1.0, 8.0, {});  // 1 - tau g2 = 0 exactly
    CHECK_THROWS_AS(solve_volterra(p, VolterraMethod::march), SingularStepError);
    try {
        solve_volterra(p, VolterraMethod::march);
    } catch (const SingularStepError& e) {
        CHECK(e.node == 1);
        CHECK(std::abs(e.coefficient) < 1e-12);
    }
}

TEST_CASE("fixed point refuses coarse grids with a singular memory weight") {
    // tau * kappa_0 for the order-1/2 kernel does not vanish as beta grows, so
    // no weight makes the map contractive here.
    auto pair = KernelPair::riemann_liouville(0.5);
    TimeGrid g(1.0, 4);
    auto wl = cell_weights(pair, g, KernelSide::ell);
    auto p = scalar_problem(g, 1.0, 3.0, wl.kappa);
    CHECK_THROWS_AS(solve_volterra(p, VolterraMethod::fixed_point), ContractionError);
    try {
        solve_volterra(p, VolterraMethod::fixed_point);
    } catch (const ContractionError& e) {
        CHECK(e.factor > 0.9);
    }
}

TEST_CASE("growth majorant matches the frozen expanding closed form") {
    // w = 1 + (ell * w) for the order-1/2 kernel grows to the frozen value of
    // the expanding relaxation profile at t = 1.
    const double exact = 5.0089800807622835;
    auto pair = KernelPair::riemann_liouville(0.5);
    TimeGrid g(1.0, 2048);
    auto wl = cell_weights(pair, g, KernelSide::ell);
    auto p = scalar_problem(g, 1.0, 0.0, wl.kappa);
    auto bound = gronwall_bound(p);
    REQUIRE(bound.size() == g.cells() + 1);
    CHECK(std::abs(bound.back() - exact) < 2e-2);
    for (std::size_t n = 0; n + 1 < bound.size(); ++n) CHECK(bound[n] <= bound[n + 1]);
}

TEST_CASE("majorant dominates every admissible sequence") {
    auto pair = KernelPair::riemann_liouville(0.5);
    TimeGrid g(1.0, 128);
    auto wl = cell_weights(pair, g, KernelSide::ell);
    auto p = scalar_problem(g, 1.0, 0.25, wl.kappa);
    auto bound = gronwall_bound(p);

    // Half the equality solution satisfies the inequality with slack.
    std::vector<double> half(bound);
    for (double& v : half) v *= 0.5;
    CHECK(check_dominated(half, bound, 0.0));
    CHECK(check_dominated(bound, bound, 1e-12));

    std::vector<double> above(bound);
    above[64] += 0.1;
    CHECK(!check_dominated(above, bound, 1e-12));
    CHECK(check_dominated(above, bound, 0.2));

    std::vector<double> wrong_len(bound.begin(), bound.end() - 1);
    CHECK_THROWS_AS(check_dominated(wrong_len, bound, 0.0), std::invalid_argument);
}

TEST_CASE("majorant is monotone in the data") {
    auto pair = KernelPair::riemann_liouville(0.3);
    TimeGrid g(1.0, 64);
    auto wl = cell_weights(pair, g, KernelSide::ell);

    auto lo = gronwall_bound(scalar_problem(g, 1.0, 0.0, wl.kappa));
    auto hi = gronwall_bound(scalar_problem(g, 1.1, 0.0, wl.kappa));
    auto hi2 = gronwall_bound(scalar_problem(g, 1.0, 0.2, wl.kappa));
    CHECK(check_dominated(lo, hi, 0.0));
    CHECK(check_dominated(lo, hi2, 0.0));

    CHECK_THROWS_AS(gronwall_bound(scalar_problem(g, 1.0, -0.1, wl.kappa)),
                    std::invalid_argument);
    std::vector<double> neg(wl.kappa);
    neg[3] = -neg[3];
    CHECK_THROWS_AS(gronwall_bound(scalar_problem(g, 1.0, 0.0, std::move(neg))),
                    std::invalid_argument);
    VolterraProblem vec{g, 2, {}, {}, wl.kappa};
    vec.g1.assign(g.cells() + 1, StateVector{1.0, 1.0});
    vec.g2.assign(g.cells() + 1, 0.0);
    CHECK_THROWS_AS(gronwall_bound(vec), std::invalid_argument);
}
