#include <cmath>
#include <vector>

#include "doctest.h"
#include "subpa/dynamics.hpp"
#include "subpa/errors.hpp"
#include "subpa/rng.hpp"

using namespace subpa;

namespace {

ModelParams graph(double p, double kappa) {
    return ModelParams::graph(p, WeightFunction::power(kappa));
}
ModelParams urn(double p, double kappa) {
    return ModelParams::urn(p, WeightFunction::power(kappa));
}

TruncatedProfile make_profile(std::vector<double> values,
                              const WeightFunction& w, double t = 1.0) {
    TruncatedProfile p;
    p.t = t;
    p.values = std::move(values);
    p.refresh_summaries(w);
    return p;
}

}  // namespace

TEST_CASE("the ray a_k t is a stationary direction of the flow") {
    const ModelParams m = graph(1.0, 0.0);
    const EquilibriumSolution eq = limit_proportions(m, 1.0, 60);
    for (double t : {0.5, 1.0, 7.0}) {
        std::vector<double> phi(eq.a);
        for (double& v : phi) v *= t;
        const TruncatedProfile p = make_profile(std::move(phi), m.weight, t);
        const std::vector<double> rate = profile_rhs(p, m, TailMode::open);
        // d/dt (a_k t) = a_k, up to the truncated tail mass.
        for (int k = 1; k <= 40; ++k)
            CHECK(std::abs(rate[std::size_t(k - 1)] -
                           eq.a[std::size_t(k - 1)]) <=
                  1e-12 + 10.0 * eq.tail_bound);
    }
}

TEST_CASE("all mass in class 1 with unit weights") {
    const ModelParams m = graph(1.0, 0.0);
    const TruncatedProfile p = make_profile({0.7, 0.0, 0.0, 0.0}, m.weight);
    const std::vector<double> rate = profile_rhs(p, m, TailMode::open);
    CHECK(rate[0] == doctest::Approx(0.0));  // p0 - q0 phi_1 / phi_1 = 0
    CHECK(rate[1] == doctest::Approx(1.0));  // q0 w(1) phi_1 / T = 1
    CHECK(rate[2] == doctest::Approx(0.0));
}

TEST_CASE("the flow is 0-homogeneous") {
    const ModelParams m = urn(0.4, 0.5);
    Rng rng(12345);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> values;
        for (int k = 0; k < 12; ++k) values.push_back(rng.unit() + 1e-3);
        const TruncatedProfile p = make_profile(values, m.weight);
        for (double& v : values) v *= 2.0;
        const TruncatedProfile p2 = make_profile(values, m.weight);
        const auto r1 = profile_rhs(p, m, TailMode::open);
        const auto r2 = profile_rhs(p2, m, TailMode::open);
        for (std::size_t i = 0; i < r1.size(); ++i)
            CHECK(r2[i] == doctest::Approx(r1[i]).epsilon(1e-14));
    }
}

TEST_CASE("singular profile raises a tolerance error") {
    const ModelParams m = graph(1.0, 0.0);
    const TruncatedProfile p = make_profile({0.0, 0.0, 0.0}, m.weight);
    CHECK_THROWS_AS(profile_rhs(p, m, TailMode::open), ToleranceError);
}

TEST_CASE("summaries agree with recomputation") {
    const ModelParams m = graph(0.6, -0.5);
    Rng rng(99);
    std::vector<double> values;
    for (int k = 0; k < 30; ++k) values.push_back(rng.unit());
    TruncatedProfile p = make_profile(values, m.weight);
    double V = 0, T = 0, D = 0;
    for (int k = 1; k <= 30; ++k) {
        V += values[std::size_t(k - 1)];
        T += m.weight(k) * values[std::size_t(k - 1)];
        D += k * values[std::size_t(k - 1)];
    }
    CHECK(p.total_mass == doctest::Approx(V).epsilon(1e-12));
    CHECK(p.total_weight == doctest::Approx(T).epsilon(1e-12));
    CHECK(p.total_size == doctest::Approx(D).epsilon(1e-12));
}

TEST_CASE("small-config integration follows the geometric ray") {
    const ModelParams m = graph(1.0, 0.0);
    std::vector<double> times{0.01, 0.1, 0.5, 1.0};
    const Trajectory traj =
        integrate_profile(InitialConfiguration::small_config(), m, times, 60);
    const TruncatedProfile& last = traj.samples.back();
    REQUIRE(last.t == 1.0);
    for (int k = 1; k <= 10; ++k) {
        const double expect = std::pow(2.0, -k);
        CHECK(std::abs(last.values[std::size_t(k - 1)] - expect) <=
              1e-6 * expect);
    }
    // Ray invariance: phi(t)/t constant along the trajectory.
    for (const TruncatedProfile& s : traj.samples)
        for (int k = 1; k <= 8; ++k)
            CHECK(s.values[std::size_t(k - 1)] / s.t ==
                  doctest::Approx(std::pow(2.0, -k)).epsilon(1e-6));
}

TEST_CASE("large-config mass grows affinely") {
    const ModelParams m = graph(1.0, 0.0);
    const InitialConfiguration init = InitialConfiguration::large({1.0});
    std::vector<double> times{0.0, 0.5, 1.0, 2.0, 5.0};
    const Trajectory traj = integrate_profile(init, m, times, 80);
    for (const TruncatedProfile& s : traj.samples)
        CHECK(s.total_mass + s.tail_register ==
              doctest::Approx(1.0 + s.t).epsilon(1e-8));
}

TEST_CASE("zero-length integration returns the seed") {
    const ModelParams m = urn(0.5, 0.0);
    std::vector<double> times{0.01};
    const Trajectory traj =
        integrate_profile(InitialConfiguration::small_config(), m, times, 40);
    REQUIRE(traj.samples.size() == 1);
    const EquilibriumSolution eq = limit_proportions(m, 0.5, 40);
    for (int k = 1; k <= 20; ++k)
        CHECK(traj.samples[0].values[std::size_t(k - 1)] ==
              doctest::Approx(eq.a[std::size_t(k - 1)] * 0.01));
}

TEST_CASE("small configurations cannot start at t = 0") {
    const ModelParams m = graph(1.0, 0.0);
    std::vector<double> times{0.0, 1.0};
    CHECK_THROWS_AS(integrate_profile(InitialConfiguration::small_config(), m,
                                      times, 40),
                    ConfigError);
}

TEST_CASE("open tail books lost mass in the register") {
    const ModelParams m = graph(1.0, 0.0);
    // Deliberately tiny truncation so the register visibly fills.  The
    // truncated seed carries slightly less than p0 t0 of mass, so compare
    // growth rather than absolute level: V(t) + r(t) - V(t0) = p0 (t - t0).
    std::vector<double> times{0.01, 2.0};
    const Trajectory traj = integrate_profile(
        InitialConfiguration::small_config(), m, times, 6, TailMode::open);
    CHECK(traj.max_tail_register > 0.0);
    const TruncatedProfile& seed = traj.samples.front();
    const TruncatedProfile& last = traj.samples.back();
    CHECK(last.total_mass + last.tail_register - seed.total_mass ==
          doctest::Approx(m.p0 * (last.t - seed.t)).epsilon(1e-7));

    // Absorbing tail conserves V without a register.
    const Trajectory traj2 = integrate_profile(
        InitialConfiguration::small_config(), m, times, 6,
        TailMode::absorbing);
    CHECK(traj2.max_tail_register == 0.0);
    CHECK(traj2.samples.back().total_mass - traj2.samples.front().total_mass ==
          doctest::Approx(m.p0 * (last.t - seed.t)).epsilon(1e-7));
}

TEST_CASE("time-changed system reproduces the exponential time change") {
    const ModelParams m = graph(1.0, 0.0);
    std::vector<double> s_times;
    for (int i = 0; i <= 30; ++i) s_times.push_back(0.1 * i);
    const TimeChangedTrajectory traj = integrate_time_changed(
        InitialConfiguration::small_config(), m, s_times, 60);
    CHECK(traj.time_change_checked);
    CHECK(traj.max_time_change_rel_err <= 1e-6);
    for (const TimeChangedSample& s : traj.samples) {
        const double growth = std::exp(s.s);  // s* = 1
        for (int k = 1; k <= 8; ++k)
            CHECK(s.psi[std::size_t(k - 1)] ==
                  doctest::Approx(std::pow(2.0, -k) * growth).epsilon(1e-6));
    }
}

TEST_CASE("large-config time change obeys the mass law") {
    const ModelParams m = graph(1.0, 0.0);
    const InitialConfiguration init = InitialConfiguration::large({1.0});
    std::vector<double> s_times{0.0, 0.2, 0.5, 1.0, 1.5};
    const TimeChangedTrajectory traj =
        integrate_time_changed(init, m, s_times, 80);
    for (const TimeChangedSample& s : traj.samples) {
        double mass = 0.0;
        for (double v : s.psi) mass += v;
        // V(t) = c + p0 t composed with the time change.
        CHECK(mass - m.p0 * s.t == doctest::Approx(1.0).epsilon(1e-7));
    }
}

TEST_CASE("time-changed start point is returned unchanged") {
    const ModelParams m = urn(0.5, 0.0);
    std::vector<double> s_times{0.0};
    const TimeChangedTrajectory traj = integrate_time_changed(
        InitialConfiguration::small_config(), m, s_times, 40);
    REQUIRE(traj.samples.size() == 1);
    CHECK(traj.samples[0].t == doctest::Approx(1.0));
    const EquilibriumSolution eq = limit_proportions(m, 0.5, 40);
    CHECK(traj.samples[0].psi[0] == doctest::Approx(eq.a[0]));
}

TEST_CASE("the two integrators agree through the time change") {
    const ModelParams m = urn(0.5, 0.0);
    const InitialConfiguration init =
        InitialConfiguration::large({0.5, 0.25});
    std::vector<double> s_times;
    for (int i = 0; i <= 20; ++i) s_times.push_back(0.1 * i);
    const TimeChangedTrajectory psi_traj =
        integrate_time_changed(init, m, s_times, 60);

    std::vector<double> t_times;
    for (const TimeChangedSample& s : psi_traj.samples)
        t_times.push_back(s.t);
    const Trajectory phi_traj = integrate_profile(init, m, t_times, 60);

    for (std::size_t i = 0; i < t_times.size(); ++i) {
        for (int k = 1; k <= 20; ++k) {
            const double a = psi_traj.samples[i].psi[std::size_t(k - 1)];
            const double b = phi_traj.samples[i].values[std::size_t(k - 1)];
            CHECK(std::abs(a - b) <= 1e-7 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("growth bounds along small and large trajectories") {
    SUBCASE("uniform attachment small config: T(t) = t exactly") {
        const ModelParams m = graph(1.0, 0.0);
        std::vector<double> times{0.01, 0.5, 1.0, 2.0};
        const Trajectory traj = integrate_profile(
            InitialConfiguration::small_config(), m, times, 60);
        const GrowthBoundsReport report = check_growth_bounds(
            traj, m, InitialConfiguration::small_config(), 1.0, 1e-6);
        CHECK_FALSE(report.empty);
        CHECK(report.mass_affine_ok);
        CHECK(report.size_bound_ok);
        CHECK(report.weight_bounds_ok);
        CHECK(report.small_ray_ok);
        CHECK(report.max_ray_dev <= 1e-6);
    }
    SUBCASE("urn small config: D(t) = t") {
        const ModelParams m = urn(0.5, 0.0);
        std::vector<double> times{0.01, 1.0, 3.0};
        const Trajectory traj = integrate_profile(
            InitialConfiguration::small_config(), m, times, 70);
        for (const TruncatedProfile& s : traj.samples)
            CHECK(s.total_size ==
                  doctest::Approx((m.p0 + m.q0) * s.t).epsilon(1e-6));
    }
    SUBCASE("empty trajectory reports empty") {
        Trajectory traj;
        const GrowthBoundsReport report =
            check_growth_bounds(traj, graph(1.0, 0.0),
                                InitialConfiguration::small_config(), 1.0);
        CHECK(report.empty);
    }
}

TEST_CASE("integrator preserves nonnegativity") {
    const ModelParams m = graph(0.3, 0.5);
    std::vector<double> times{0.01, 0.1, 1.0, 4.0};
    const Trajectory traj = integrate_profile(
        InitialConfiguration::small_config(), m, times, 50);
    for (const TruncatedProfile& s : traj.samples)
        for (double v : s.values) CHECK(v >= 0.0);
}
