#include <cmath>
#include <vector>

#include "doctest.h"
#include "subpa/equilibrium.hpp"
#include "subpa/errors.hpp"

using namespace subpa;

namespace {

ModelParams graph(double p, double kappa) {
    return ModelParams::graph(p, WeightFunction::power(kappa));
}
ModelParams urn(double p, double kappa) {
    return ModelParams::urn(p, WeightFunction::power(kappa));
}

// Independent oracle: for constant weights w == 1 the series is geometric,
//   F(s) = (p0/q0) * r/(1-r) with r = q0/(s+q0), which collapses to p0/s.
double constant_weight_F(double p0, double q0, double s) {
    const double r = q0 / (s + q0);
    return p0 / q0 * r / (1.0 - r);
}

// Independent oracle: the stretched-exponential product form
//   q(k) = (s / w(k)) * prod_{j=1..k} w(j) / (s + w(j))
// for the p = 1 graph model (p0 = q0 = 1).
double product_form(double s, double kappa, int k) {
    double prod = 1.0;
    for (int j = 1; j <= k; ++j) {
        const double w = std::pow(double(j), kappa);
        prod *= w / (s + w);
    }
    return s / std::pow(double(k), kappa) * prod;
}

}  // namespace

TEST_CASE("fixed-point series matches the geometric closed form") {
    CHECK(fixed_point_function(graph(1.0, 0.0), 1.0, 1e-14) ==
          doctest::Approx(constant_weight_F(1.0, 1.0, 1.0)).epsilon(1e-12));
    CHECK(fixed_point_function(graph(1.0, 0.0), 2.0, 1e-14) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fixed_point_function(urn(0.5, 0.0), 0.5, 1e-14) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fixed_point_function(urn(0.3, 0.0), 0.7, 1e-14) ==
          doctest::Approx(constant_weight_F(0.3, 0.7, 0.7)).epsilon(1e-12));
}

TEST_CASE("fixed-point series rejects bad arguments") {
    CHECK_THROWS_AS(fixed_point_function(graph(1.0, 0.0), 0.0), ConfigError);
    CHECK_THROWS_AS(fixed_point_function(graph(1.0, 0.0), -1.0), ConfigError);
    CHECK_THROWS_AS(fixed_point_function(graph(1.0, 0.0), 1.0, 0.0),
                    ConfigError);
}

TEST_CASE("F is strictly decreasing on a grid") {
    for (const ModelParams& m : {graph(0.7, 0.5), urn(0.3, -0.5)}) {
        double prev = fixed_point_function(m, 0.05, 1e-13);
        for (double s : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0}) {
            const double f = fixed_point_function(m, s, 1e-13);
            CHECK(f < prev);
            prev = f;
        }
    }
}

TEST_CASE("growth rate closed forms") {
    // Uniform attachment: s* = 1 and the proportions are geometric.
    CHECK(solve_growth_rate(graph(1.0, 0.0), 1e-12) ==
          doctest::Approx(1.0).epsilon(1e-11));
    // Constant weights give F(s) = p0/s, so s* = p0 in both schemes.
    CHECK(solve_growth_rate(urn(0.3, 0.0), 1e-12) ==
          doctest::Approx(0.3).epsilon(1e-10));
    CHECK(solve_growth_rate(graph(0.5, 0.0), 1e-12) ==
          doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("geometric proportions for uniform attachment") {
    const ModelParams m = graph(1.0, 0.0);
    const EquilibriumSolution sol = limit_proportions(m, 1.0, 30);
    REQUIRE(sol.truncation == 30);
    for (int k = 1; k <= 30; ++k)
        CHECK(std::abs(sol.a[std::size_t(k - 1)] - std::pow(2.0, -k)) <=
              1e-12);
}

TEST_CASE("urn closed form a_k = p^2 (1-p)^{k-1}") {
    const ModelParams m = urn(0.5, 0.0);
    const EquilibriumSolution sol = limit_proportions(m, 0.5, 25);
    for (int k = 1; k <= 25; ++k)
        CHECK(sol.a[std::size_t(k - 1)] ==
              doctest::Approx(0.25 * std::pow(0.5, k - 1)).epsilon(1e-12));
}

TEST_CASE("proportions match the product form for kappa = 1/2") {
    const ModelParams m = graph(1.0, 0.5);
    const double s = solve_growth_rate(m, 1e-12);
    const EquilibriumSolution sol = limit_proportions(m, s, 40);
    for (int k = 1; k <= 40; ++k)
        CHECK(sol.a[std::size_t(k - 1)] ==
              doctest::Approx(product_form(s, 0.5, k)).epsilon(1e-10));
}

TEST_CASE("recursion exactness to relative 1e-13") {
    const ModelParams m = graph(0.7, 0.5);
    const double s = solve_growth_rate(m, 1e-12);
    const EquilibriumSolution sol = limit_proportions(m, s, 200);
    for (int k = 2; k <= sol.truncation; ++k) {
        const double lhs = sol.a[std::size_t(k - 1)] *
                           (s + m.q0 * m.weight(k));
        const double rhs = m.q0 * m.weight(k - 1) * sol.a[std::size_t(k - 2)];
        CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(lhs, rhs));
    }
}

TEST_CASE("scale consistency: sum w(k) a_k = s* within the tail") {
    for (const ModelParams& m :
         {graph(1.0, 0.0), graph(0.3, 0.5), urn(0.7, -0.5)}) {
        const double s = solve_growth_rate(m, 1e-12);
        const int K = choose_truncation(m, s, 1e-16);
        const EquilibriumSolution sol = limit_proportions(m, s, K);
        double weighted = 0.0;
        for (int k = sol.truncation; k >= 1; --k)
            weighted += m.weight(k) * sol.a[std::size_t(k - 1)];
        CHECK(weighted ==
              doctest::Approx(s).epsilon(1e-9));
        // Same identity in root form.
        CHECK(fixed_point_function(m, s, 1e-13) ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("mass identities at the fixed point") {
    SUBCASE("uniform attachment sums exactly") {
        const ModelParams m = graph(1.0, 0.0);
        EquilibriumSolution sol = limit_proportions(m, 1.0, 80);
        sol.residuals = mass_identity_residuals(sol, m);
        CHECK(sol.residuals.mass <= 1e-10);
        CHECK(sol.residuals.size <= 1e-9);
        CHECK(sol.residuals.pass);
    }
    SUBCASE("urn p = 0.5: mass 0.5, size 1.0") {
        const ModelParams m = urn(0.5, 0.0);
        EquilibriumSolution sol = limit_proportions(m, 0.5, 80);
        double mass = 0.0, size = 0.0;
        for (int k = sol.truncation; k >= 1; --k) {
            mass += sol.a[std::size_t(k - 1)];
            size += k * sol.a[std::size_t(k - 1)];
        }
        CHECK(mass == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(size == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("degenerate K = 1 truncation reports plain residuals") {
        const ModelParams m = graph(1.0, 0.0);
        EquilibriumSolution sol = limit_proportions(m, 1.0, 1);
        const MassResiduals res = mass_identity_residuals(sol, m);
        CHECK(res.mass == doctest::Approx(std::abs(sol.a[0] - 1.0)));
        CHECK(res.size == doctest::Approx(std::abs(sol.a[0] - 2.0)));
    }
}

TEST_CASE("truncation choice reaches the underflow floor") {
    const ModelParams m = graph(1.0, 0.0);
    const int K = choose_truncation(m, 1.0, 1e-14);
    // 2^-k / 2^-1 < 1e-14 at k = 48.
    CHECK(K == 48);
}

TEST_CASE("bracketing failure raises a model error") {
    // A custom weight violating the probe cannot reach F = 1 from above;
    // constant zero-ish weights make F blow up instead, so use a tiny p0
    // with huge weights: F stays above 1 for any s reachable by doubling.
    const ModelParams m = ModelParams::urn(
        0.9999, WeightFunction::custom([](int) { return 1e-300; }));
    CHECK_THROWS_AS(solve_growth_rate(m, 1e-10), ModelError);
}
