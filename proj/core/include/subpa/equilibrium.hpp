#pragma once

#include <vector>

#include "subpa/model.hpp"

namespace subpa {

struct MassResiduals {
    double mass = 0.0;       // |sum a_k - p0|
    double size = 0.0;       // |sum k a_k - (p0 + q0)|
    double threshold = 0.0;  // max(tail_bound * (K+1), 1e-8)
    bool pass = false;
};

// Truncated limit sequence {a_k} at a given growth rate s (normally s*).
// a[i] holds class k = i + 1.
struct EquilibriumSolution {
    double growth_rate = 0.0;
    std::vector<double> a;
    int truncation = 0;       // effective K (== a.size())
    double tail_bound = 0.0;  // estimate of sum_{k > K} a_k
    MassResiduals residuals;
};

// The normalized weight-mass series
//   F(s) = (p0/q0) * sum_{k>=1} prod_{j=1..k} q0 w(j) / (s + q0 w(j)),
// truncated when the running product times a frozen-ratio geometric tail
// falls below tol.  Strictly decreasing in s; its unique root F(s*) = 1
// defines the growth rate s*.
double fixed_point_function(const ModelParams& params, double s,
                            double tol = 1e-12);

// Unique s* with |F(s*) - 1| <= tol, by bracket expansion and bisection.
double solve_growth_rate(const ModelParams& params, double tol = 1e-10);

// Smallest K with a_K < rel_floor * a_1 (capped).  Used to size
// truncations for series, ODE systems and operators.
int choose_truncation(const ModelParams& params, double s,
                      double rel_floor = 1e-14, int cap = 200000);

// a_1 = s p0 / (s + q0 w(1)), a_k = q0 w(k-1) a_{k-1} / (s + q0 w(k)).
// Truncates early where a_k underflows.  Does not fill residuals.
EquilibriumSolution limit_proportions(const ModelParams& params, double s,
                                      int kmax);

// Residuals of sum a_k = p0 and sum k a_k = p0 + q0 (valid at s = s*).
MassResiduals mass_identity_residuals(const EquilibriumSolution& sol,
                                      const ModelParams& params);

}  // namespace subpa
