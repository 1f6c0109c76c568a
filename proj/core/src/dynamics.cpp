#include "subpa/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "subpa/errors.hpp"

namespace subpa {

TailMode tail_mode_from_string(const std::string& name) {
    if (name == "open") return TailMode::open;
    if (name == "absorbing") return TailMode::absorbing;
    throw ConfigError("tail mode must be 'open' or 'absorbing' (got '" + name +
                      "')");
}

std::string to_string(TailMode mode) {
    return mode == TailMode::open ? "open" : "absorbing";
}

InitialConfiguration InitialConfiguration::small_config() {
    return InitialConfiguration{};
}

InitialConfiguration InitialConfiguration::large(std::vector<double> c) {
    InitialConfiguration init;
    double total = 0.0, size = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!(c[i] >= 0.0))
            throw ConfigError("initial configuration entries must be >= 0 (class " +
                              std::to_string(i + 1) + ")");
        total += c[i];
        size += double(i + 1) * c[i];
    }
    if (!(total > 0.0))
        throw ConfigError(
            "large initial configuration requires some c_k > 0; use the small "
            "configuration for c == 0");
    init.c = std::move(c);
    init.total = total;
    init.weighted_size = size;
    return init;
}

void TruncatedProfile::refresh_summaries(const WeightFunction& w) {
    double V = 0.0, T = 0.0, D = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        V += values[i];
        T += w(int(i) + 1) * values[i];
        D += double(i + 1) * values[i];
    }
    total_mass = V;
    total_weight = T;
    total_size = D;
}

namespace {

struct WeightArrays {
    std::vector<double> w;  // w(k), k = i+1
    explicit WeightArrays(const WeightFunction& wf, int K) : w(std::size_t(K)) {
        for (int k = 1; k <= K; ++k) w[std::size_t(k - 1)] = wf(k);
    }
};

// phi' over the truncated classes; T computed over the same classes.
void profile_rate(std::span<const double> phi, const WeightArrays& wa,
                  double p0, double q0, TailMode mode, std::span<double> out) {
    const std::size_t K = wa.w.size();
    double T = 0.0;
    for (std::size_t i = 0; i < K; ++i) T += wa.w[i] * phi[i];
    if (!(T > 0.0))
        throw ToleranceError(
            "profile flow is singular: total weight T <= 0 (small "
            "configurations cannot be integrated from t = 0)");
    const double q_over_T = q0 / T;
    out[0] = p0 - q_over_T * wa.w[0] * phi[0];
    for (std::size_t i = 1; i < K; ++i)
        out[i] = q_over_T * (wa.w[i - 1] * phi[i - 1] - wa.w[i] * phi[i]);
    if (mode == TailMode::absorbing) {
        // class K keeps its inflow but loses the outflow term
        out[K - 1] = q_over_T * wa.w[K - 2] * phi[K - 2];
    }
}

struct GrowthConstants {
    double C0 = 0.0;
    int L_hat = 0;
};

GrowthConstants growth_constants(const ModelParams& params,
                                 const InitialConfiguration& init) {
    GrowthConstants g;
    // Smallest integer L with c~/(L+1) <= c/2 and 2/(L+1) <= p0/2.
    int L = std::max(1, int(std::ceil(4.0 / params.p0)) - 1);
    if (!init.small()) {
        const int L2 =
            int(std::ceil(2.0 * init.weighted_size / init.total)) - 1;
        L = std::max(L, std::max(1, L2));
    }
    double winf = params.weight(1);
    for (int k = 2; k <= L; ++k) winf = std::min(winf, params.weight(k));
    g.L_hat = L;
    g.C0 = std::max(1.0 / (0.5 * winf), params.weight.linear_ratio_bound());
    return g;
}

}  // namespace

std::vector<double> profile_rhs(const TruncatedProfile& profile,
                                const ModelParams& params, TailMode mode) {
    const int K = int(profile.values.size());
    if (K < 2) throw ConfigError("profile_rhs requires at least two classes");
    WeightArrays wa(params.weight, K);
    std::vector<double> out(static_cast<std::size_t>(K), 0.0);
    profile_rate(profile.values, wa, params.p0, params.q0, mode, out);
    return out;
}

Trajectory integrate_profile(const InitialConfiguration& init,
                             const ModelParams& params,
                             std::span<const double> sample_times,
                             int truncation, TailMode mode,
                             const StepControl& ctl) {
    if (sample_times.empty())
        throw ConfigError("integrate_profile: no sample times given");
    for (std::size_t i = 1; i < sample_times.size(); ++i)
        if (!(sample_times[i] > sample_times[i - 1]))
            throw ConfigError("integrate_profile: sample times must increase");
    if (truncation < 2)
        throw ConfigError("integrate_profile requires truncation >= 2");

    const double t0 = sample_times[0];
    const int K = truncation;
    std::vector<double> y(std::size_t(K) + 1, 0.0);  // classes + tail register

    if (init.small()) {
        if (!(t0 > 0.0))
            throw ConfigError(
                "small configurations must be seeded at t0 > 0 on the ray "
                "a_k * t0; integration through t = 0 is singular");
        const double s = solve_growth_rate(params, 1e-12);
        EquilibriumSolution eq = limit_proportions(params, s, K);
        for (int i = 0; i < eq.truncation; ++i)
            y[std::size_t(i)] = eq.a[std::size_t(i)] * t0;
    } else {
        if (t0 != 0.0)
            throw ConfigError("large configurations start at t0 = 0");
        if (int(init.c.size()) > K)
            throw ConfigError(
                "initial configuration has more classes than the truncation");
        for (std::size_t i = 0; i < init.c.size(); ++i) y[i] = init.c[i];
    }

    WeightArrays wa(params.weight, K);
    const double p0 = params.p0, q0 = params.q0;
    auto rhs = [&](double, std::span<const double> s,
                   std::span<double> out) {
        profile_rate(s.first(std::size_t(K)), wa, p0, q0, mode,
                     out.first(std::size_t(K)));
        if (mode == TailMode::open) {
            double T = 0.0;
            for (int i = 0; i < K; ++i)
                T += wa.w[std::size_t(i)] * s[std::size_t(i)];
            out[std::size_t(K)] = (q0 / T) * wa.w[std::size_t(K - 1)] *
                                  s[std::size_t(K - 1)];
        } else {
            out[std::size_t(K)] = 0.0;
        }
    };

    DormandPrince5 solver(rhs, y.size(), ctl);
    solver.set_guard([K](std::span<double> s) {
        double norm = 0.0;
        for (int i = 0; i < K; ++i) norm += std::abs(s[std::size_t(i)]);
        const double floor = -1e-12 * norm;
        for (int i = 0; i < K; ++i) {
            double& v = s[std::size_t(i)];
            if (v < floor) return false;
            if (v < 0.0) v = 0.0;
        }
        return true;
    });
    solver.start(t0, y);

    Trajectory traj;
    traj.truncation = K;
    traj.mode = mode;
    for (double t : sample_times) {
        solver.advance_to(t);
        TruncatedProfile p;
        p.t = t;
        const auto& s = solver.state();
        p.values.assign(s.begin(), s.begin() + K);
        p.tail_register = mode == TailMode::open ? s[std::size_t(K)] : 0.0;
        p.refresh_summaries(params.weight);
        traj.max_tail_register =
            std::max(traj.max_tail_register, p.tail_register);
        traj.samples.push_back(std::move(p));
    }
    traj.stats = solver.stats();
    return traj;
}

TimeChangedTrajectory integrate_time_changed(const InitialConfiguration& init,
                                             const ModelParams& params,
                                             std::span<const double> s_times,
                                             int truncation,
                                             const StepControl& ctl) {
    if (s_times.empty())
        throw ConfigError("integrate_time_changed: no sample points given");
    for (std::size_t i = 1; i < s_times.size(); ++i)
        if (!(s_times[i] > s_times[i - 1]))
            throw ConfigError(
                "integrate_time_changed: sample points must increase");
    if (!(s_times[0] == 0.0))
        throw ConfigError("integrate_time_changed starts at s = 0");
    if (truncation < 2)
        throw ConfigError("integrate_time_changed requires truncation >= 2");

    const int K = truncation;
    WeightArrays wa(params.weight, K);
    const double p0 = params.p0, q0 = params.q0;

    std::vector<double> y(std::size_t(K) + 1, 0.0);  // psi classes + time
    double s_star = 0.0;
    if (init.small()) {
        s_star = solve_growth_rate(params, 1e-12);
        EquilibriumSolution eq = limit_proportions(params, s_star, K);
        for (int i = 0; i < eq.truncation; ++i)
            y[std::size_t(i)] = eq.a[std::size_t(i)];
        y[std::size_t(K)] = 1.0;  // t(0) = 1
    } else {
        if (int(init.c.size()) > K)
            throw ConfigError(
                "initial configuration has more classes than the truncation");
        for (std::size_t i = 0; i < init.c.size(); ++i) y[i] = init.c[i];
        y[std::size_t(K)] = 0.0;  // t(s0) = 0 with s0 shifted to 0
    }

    // psi' = A psi (banded plus first row), t' = T(psi).
    auto rhs = [&](double, std::span<const double> v, std::span<double> out) {
        double T = 0.0;
        for (int i = 0; i < K; ++i) T += wa.w[std::size_t(i)] * v[std::size_t(i)];
        out[0] = (p0 - q0) * wa.w[0] * v[0];
        for (int i = 1; i < K; ++i)
            out[0] += p0 * wa.w[std::size_t(i)] * v[std::size_t(i)];
        for (int i = 1; i < K; ++i)
            out[std::size_t(i)] =
                q0 * (wa.w[std::size_t(i - 1)] * v[std::size_t(i - 1)] -
                      wa.w[std::size_t(i)] * v[std::size_t(i)]);
        out[std::size_t(K)] = T;
    };

    DormandPrince5 solver(rhs, y.size(), ctl);
    solver.start(0.0, y);

    const GrowthConstants g = growth_constants(params, init);
    TimeChangedTrajectory traj;
    traj.truncation = K;
    for (double s : s_times) {
        solver.advance_to(s);
        TimeChangedSample sample;
        sample.s = s;
        const auto& v = solver.state();
        sample.psi.assign(v.begin(), v.begin() + K);
        sample.t = v[std::size_t(K)];
        double T = 0.0;
        for (int i = 0; i < K; ++i)
            T += wa.w[std::size_t(i)] * sample.psi[std::size_t(i)];
        sample.total_weight = T;

        // Comparison envelopes for t(s); a factor-10 breach means the
        // integration drifted away from any admissible time change.
        double lower, upper;
        if (init.small()) {
            lower = std::exp(params.p0 / g.C0 * s);
            upper = std::exp(g.C0 * (params.p0 + params.q0) * s);
        } else {
            lower = init.total / params.p0 *
                    (std::exp(params.p0 / g.C0 * s) - 1.0);
            upper = init.weighted_size / (params.p0 + params.q0) *
                    (std::exp(g.C0 * (params.p0 + params.q0) * s) - 1.0);
        }
        if (sample.t > 10.0 * upper || sample.t < lower / 10.0 - 1e-12)
            throw ToleranceError(
                "integrate_time_changed: t(s) drifted outside the comparison "
                "envelopes at s = " + std::to_string(s));

        if (init.small()) {
            const double expected = std::exp(s_star * s);
            traj.max_time_change_rel_err =
                std::max(traj.max_time_change_rel_err,
                         std::abs(sample.t - expected) / expected);
        }
        traj.samples.push_back(std::move(sample));
    }
    traj.time_change_checked = init.small();
    traj.stats = solver.stats();
    return traj;
}

GrowthBoundsReport check_growth_bounds(const Trajectory& traj,
                                       const ModelParams& params,
                                       const InitialConfiguration& init,
                                       double s_star, double tol) {
    GrowthBoundsReport report;
    if (traj.samples.empty()) return report;
    report.empty = false;

    const GrowthConstants g = growth_constants(params, init);
    report.C0 = g.C0;
    report.L_hat = g.L_hat;

    const double c = init.total;
    const double csize = init.weighted_size;
    const double p0 = params.p0, q0 = params.q0;

    report.mass_affine_ok = true;
    report.size_bound_ok = true;
    report.weight_bounds_ok = true;
    report.small_ray_ok = init.small();

    for (const TruncatedProfile& s : traj.samples) {
        const double scale = std::max(1.0, c + p0 * s.t);
        const double mass_dev =
            std::abs(s.total_mass + s.tail_register - (c + p0 * s.t));
        report.max_mass_dev = std::max(report.max_mass_dev, mass_dev / scale);
        if (mass_dev > tol * scale + s.tail_register * 1e-9)
            report.mass_affine_ok = false;

        const double size_cap = csize + (p0 + q0) * s.t;
        const double size_excess = s.total_size - size_cap;
        report.max_size_excess =
            std::max(report.max_size_excess, size_excess / std::max(1.0, size_cap));
        if (size_excess > tol * std::max(1.0, size_cap))
            report.size_bound_ok = false;

        const double slack = tol * std::max(1.0, s.total_weight);
        const double lower = (c + p0 * s.t) / g.C0;
        const double upper = g.C0 * (csize + (p0 + q0) * s.t);
        const double excess =
            std::max(lower - s.total_weight, s.total_weight - upper);
        report.max_weight_excess = std::max(report.max_weight_excess, excess);
        if (excess > slack) report.weight_bounds_ok = false;

        if (init.small()) {
            // T(t) = s* t exactly for small configurations.
            const double ray_dev = std::abs(s.total_weight - s_star * s.t);
            report.max_ray_dev = std::max(
                report.max_ray_dev, ray_dev / std::max(1e-300, s_star * s.t));
            if (ray_dev > tol * std::max(1.0, s_star * s.t))
                report.small_ray_ok = false;
        }
    }
    return report;
}

}  // namespace subpa
