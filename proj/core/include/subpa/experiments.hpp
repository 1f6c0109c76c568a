#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "subpa/dynamics.hpp"
#include "subpa/equilibrium.hpp"
#include "subpa/simulation.hpp"

namespace subpa {

// Sup-deviations between recorded chain paths and a deterministic profile,
// the finite-n shadow of the law of large numbers.
struct DeviationReport {
    long long n = 0;
    int k_cut = 0;
    // per_replica_per_k[r][k-1] = sup over the grid of |X_k - phi_k|
    std::vector<std::vector<double>> per_replica_per_k;
    std::vector<double> per_k_mean;       // mean over replicas, per class
    std::vector<double> per_replica_max;  // max over k <= k_cut, per replica
    double mean_max = 0.0;                // mean over replicas of the max
    double max_max = 0.0;
    double std_max = 0.0;
    std::vector<double> weight_sup;       // per replica sup |S^n - T|
};

using ProfileFn = std::function<double(int k, double t)>;
using WeightPathFn = std::function<double(double t)>;

// Deviations of recorded paths from phi (and of the weight path from T).
DeviationReport lln_deviation(std::span<const RecordedPath> paths,
                              const ProfileFn& phi,
                              const WeightPathFn& weight_path, int k_cut);

// Convenience overload comparing against a sampled trajectory; the
// trajectory must share the paths' time grid.
DeviationReport lln_deviation(std::span<const RecordedPath> paths,
                              const Trajectory& trajectory, int k_cut);

// Small-configuration replica batch: run `replicas` chains at scale n on the
// grid, with per-replica seed streams derived from `seed`.
std::vector<RecordedPath> run_replicas(const ModelParams& params, long long n,
                                       int replicas, std::uint64_t seed,
                                       std::span<const double> grid,
                                       int k_record, int threads = 0);

struct StudyRow {
    long long n = 0;
    int replicas = 0;
    double mean_max_dev = 0.0;
    double std_dev = 0.0;
    std::vector<double> per_k_mean;
};

struct StudyTable {
    std::vector<StudyRow> rows;
    bool slope_defined = false;
    double slope = 0.0;            // log-log fit of mean_max_dev vs n
    bool slope_in_band = false;    // soft band [-0.7, -0.3]
    bool monotone = false;         // deviations shrink from first to last n
};

// Deviation-vs-n study against the small-configuration ray a_k t.
StudyTable convergence_study(const ModelParams& params,
                             std::span<const long long> ns, int replicas,
                             double t_end, int k_cut, std::uint64_t seed,
                             int grid_points = 101, int threads = 0);

struct SlopeReport {
    std::vector<double> rel_err;  // |phi_k(t_end)/t_end - a_k| / a_k
    double max_rel_err = 0.0;
    bool pass = false;            // max over k <= k_cut within 1%
    bool t_end_warning = false;   // t_end < 10 c~ / p0
};

// Long-time slope of a large-configuration trajectory against the limit
// proportions.
SlopeReport large_init_slope(const Trajectory& trajectory,
                             const EquilibriumSolution& equilibrium,
                             int k_cut, const InitialConfiguration& init,
                             const ModelParams& params);

}  // namespace subpa
