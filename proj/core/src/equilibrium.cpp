#include "subpa/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subpa/errors.hpp"

namespace subpa {

namespace {

constexpr long kSeriesCap = 10'000'000;

double series_factor(const ModelParams& m, double s, int j) {
    const double qw = m.q0 * m.weight(j);
    return qw / (s + qw);
}

}  // namespace

double fixed_point_function(const ModelParams& params, double s, double tol) {
    if (!(s > 0.0)) throw ConfigError("fixed_point_function requires s > 0");
    if (!(tol > 0.0)) throw ConfigError("fixed_point_function requires tol > 0");

    // Each factor q0 w(j)/(s + q0 w(j)) < 1, so partial products decrease.
    // The tail past index k is bounded to first order by prod * r/(1-r) with
    // the ratio frozen at the larger of the factors at k and k+1 (the
    // one-step lookahead covers weights still increasing at the cutoff).
    double sum = 0.0;
    double prod = 1.0;
    const double scale = params.p0 / params.q0;
    for (long k = 1; k <= kSeriesCap; ++k) {
        const double r = series_factor(params, s, int(k));
        prod *= r;
        sum += prod;
        const double rr = std::max(r, series_factor(params, s, int(k) + 1));
        if (prod * rr / (1.0 - rr) < tol / scale) return scale * sum;
        if (prod < std::numeric_limits<double>::min()) return scale * sum;
    }
    throw ToleranceError(
        "fixed_point_function: series did not reach tol within 1e7 terms");
}

double solve_growth_rate(const ModelParams& params, double tol) {
    if (!(tol > 0.0)) throw ConfigError("solve_growth_rate requires tol > 0");
    const double ftol = tol / 8.0;

    double hi = 1.0;
    int expand = 0;
    while (fixed_point_function(params, hi, ftol) > 1.0) {
        hi *= 2.0;
        if (++expand > 200)
            throw ModelError(
                "solve_growth_rate: F(s) stays above 1; no fixed point for "
                "these parameters");
    }
    double lo = hi > 1.0 ? hi / 2.0 : 1.0;
    expand = 0;
    while (fixed_point_function(params, lo, ftol) < 1.0) {
        lo /= 2.0;
        if (++expand > 200)
            throw ModelError(
                "solve_growth_rate: F(s) stays below 1; no fixed point for "
                "these parameters");
    }

    // F is strictly decreasing on the bracket.
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double f = fixed_point_function(params, mid, ftol);
        if (std::abs(f - 1.0) <= tol) return mid;
        if (f > 1.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= std::numeric_limits<double>::epsilon() * mid) break;
    }
    const double f = fixed_point_function(params, mid, ftol);
    if (std::abs(f - 1.0) <= tol) return mid;
    throw ToleranceError("solve_growth_rate: bisection stalled at |F-1| = " +
                         std::to_string(std::abs(f - 1.0)));
}

int choose_truncation(const ModelParams& params, double s, double rel_floor,
                      int cap) {
    if (!(s > 0.0)) throw ConfigError("choose_truncation requires s > 0");
    const double a1 = s * params.p0 / (s + params.q0 * params.weight(1));
    double ak = a1;
    for (int k = 2; k <= cap; ++k) {
        const double qw_prev = params.q0 * params.weight(k - 1);
        const double qw = params.q0 * params.weight(k);
        ak *= qw_prev / (s + qw);
        if (ak < rel_floor * a1) return k;
    }
    return cap;
}

EquilibriumSolution limit_proportions(const ModelParams& params, double s,
                                      int kmax) {
    if (!(s > 0.0)) throw ConfigError("limit_proportions requires s > 0");
    if (kmax < 1) throw ConfigError("limit_proportions requires K >= 1");

    EquilibriumSolution sol;
    sol.growth_rate = s;
    sol.a.reserve(std::size_t(kmax));
    const double tiny = 1e-305;

    double ak = s * params.p0 / (s + params.q0 * params.weight(1));
    sol.a.push_back(ak);
    for (int k = 2; k <= kmax; ++k) {
        ak *= params.q0 * params.weight(k - 1) /
              (s + params.q0 * params.weight(k));
        if (ak < tiny) break;  // underflow: truncate early
        sol.a.push_back(ak);
    }
    sol.truncation = int(sol.a.size());

    // Geometric tail estimate with the step ratio frozen past the cutoff;
    // only applied where the ratio has dropped below 1.
    const int K = sol.truncation;
    const auto ratio = [&](int k) {
        return params.q0 * params.weight(k - 1) /
               (s + params.q0 * params.weight(k));
    };
    double r = std::max(ratio(K + 1), ratio(K + 2));
    if (r < 1.0) {
        sol.tail_bound = sol.a.back() * r / (1.0 - r);
    } else {
        // Ratios above 1 can only happen while the sequence is still rising
        // (decreasing weights at small k); extend until they drop.
        double tail = 0.0;
        double t = sol.a.back();
        int k = K + 1;
        while (k < K + 100000) {
            t *= ratio(k);
            tail += t;
            const double rr = std::max(ratio(k + 1), ratio(k + 2));
            if (rr < 1.0) {
                tail += t * rr / (1.0 - rr);
                break;
            }
            ++k;
        }
        sol.tail_bound = tail;
    }
    return sol;
}

MassResiduals mass_identity_residuals(const EquilibriumSolution& sol,
                                      const ModelParams& params) {
    MassResiduals res;
    double mass = 0.0;
    double size = 0.0;
    // Sum smallest-first to keep the additions well ordered.
    for (int i = sol.truncation - 1; i >= 0; --i) {
        mass += sol.a[std::size_t(i)];
        size += double(i + 1) * sol.a[std::size_t(i)];
    }
    res.mass = std::abs(mass - params.p0);
    res.size = std::abs(size - (params.p0 + params.q0));
    res.threshold = std::max(sol.tail_bound * (sol.truncation + 1), 1e-8);
    res.pass = res.mass <= res.threshold && res.size <= res.threshold;
    return res;
}

}  // namespace subpa
