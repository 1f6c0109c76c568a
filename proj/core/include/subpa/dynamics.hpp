#pragma once

#include <span>
#include <vector>

#include "subpa/equilibrium.hpp"
#include "subpa/model.hpp"
#include "subpa/ode_solver.hpp"

namespace subpa {

// What happens to mass flowing past the truncation class K:
//   open       class K keeps its outflow; the lost mass accumulates in a
//              tail register, making the truncation error observable
//   absorbing  class K has no outflow and collects mass
enum class TailMode { open, absorbing };

TailMode tail_mode_from_string(const std::string& name);
std::string to_string(TailMode mode);

// Scaled initial data c_k >= 0.  A "small" configuration has c == 0 (seed
// networks of size o(n)); a "large" one has positive total mass.
struct InitialConfiguration {
    std::vector<double> c;       // c[i] is class k = i+1
    double total = 0.0;          // sum c_k
    double weighted_size = 0.0;  // sum k c_k

    bool small() const { return total == 0.0; }

    static InitialConfiguration small_config();
    static InitialConfiguration large(std::vector<double> c);
};

// Snapshot of the truncated degree profile at one time.
struct TruncatedProfile {
    double t = 0.0;
    std::vector<double> values;  // phi_k, k = i+1
    double tail_register = 0.0;  // mass lost past class K (open tail)
    double total_mass = 0.0;     // V = sum phi_k
    double total_weight = 0.0;   // T = sum w(k) phi_k
    double total_size = 0.0;     // D = sum k phi_k

    void refresh_summaries(const WeightFunction& w);
};

// Right side of the profile flow
//   phi_1' = p0 - q0 w(1) phi_1 / T
//   phi_k' = (q0/T) [w(k-1) phi_{k-1} - w(k) phi_k],  k >= 2
// with T = sum w(k) phi_k over the truncated classes.  The returned vector
// has one entry per class; in open mode the caller accounts for the class-K
// outflow (q0/T) w(K) phi_K separately.  Throws if T <= 0.
std::vector<double> profile_rhs(const TruncatedProfile& profile,
                                const ModelParams& params, TailMode mode);

struct Trajectory {
    std::vector<TruncatedProfile> samples;
    OdeStats stats;
    double max_tail_register = 0.0;
    int truncation = 0;
    TailMode mode = TailMode::open;
};

// Integrate the profile flow, sampling at the given increasing times.
//
// Small configurations must start at sample_times[0] = t0 > 0; the seed is
// the exact ray a_k * t0 at the growth rate s*.  Large configurations start
// at t0 = 0 from the configuration itself.  Steps producing components
// below -1e-12 * |phi| are rejected; tiny negative values are flushed to 0.
Trajectory integrate_profile(const InitialConfiguration& init,
                             const ModelParams& params,
                             std::span<const double> sample_times,
                             int truncation, TailMode mode = TailMode::open,
                             const StepControl& ctl = {});

struct TimeChangedSample {
    double s = 0.0;               // time-change parameter
    double t = 0.0;               // physical time t(s)
    std::vector<double> psi;      // psi_k(s) = phi_k(t(s))
    double total_weight = 0.0;    // T(psi)
};

struct TimeChangedTrajectory {
    std::vector<TimeChangedSample> samples;
    OdeStats stats;
    int truncation = 0;
    // Small configurations: largest relative gap |t(s) - e^{s* s}| / e^{s* s}.
    double max_time_change_rel_err = 0.0;
    bool time_change_checked = false;
};

// Integrate the autonomous linear system psi' = A psi jointly with the
// time change t' = T(psi).  Small configurations start at s = 0 with
// t(0) = 1 and psi(0) = a (the ray at t = 1); the run verifies
// t(s) = e^{s* s} and throws only if the comparison envelopes are violated
// by more than a factor of 10.  Large configurations start at s = 0 with
// t = 0 and psi(0) = c.
TimeChangedTrajectory integrate_time_changed(const InitialConfiguration& init,
                                             const ModelParams& params,
                                             std::span<const double> s_times,
                                             int truncation,
                                             const StepControl& ctl = {});

struct GrowthBoundsReport {
    bool empty = true;
    double C0 = 0.0;
    int L_hat = 0;
    bool mass_affine_ok = false;   // V(t) = c + p0 t (+ tail register)
    double max_mass_dev = 0.0;
    bool size_bound_ok = false;    // D(t) <= c~ + (p0+q0) t
    double max_size_excess = 0.0;
    bool weight_bounds_ok = false; // C0^-1 (c + p0 t) <= T <= C0 (c~ + (p0+q0) t)
    double max_weight_excess = 0.0;
    bool small_ray_ok = false;     // small configs: T(t) = s* t
    double max_ray_dev = 0.0;
};

// Check the growth laws along a sampled trajectory.  For small
// configurations pass s_star; for large ones it is unused (pass 0).
GrowthBoundsReport check_growth_bounds(const Trajectory& traj,
                                       const ModelParams& params,
                                       const InitialConfiguration& init,
                                       double s_star, double tol = 1e-8);

}  // namespace subpa
