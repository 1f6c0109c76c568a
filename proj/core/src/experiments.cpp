#include "subpa/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "subpa/errors.hpp"

namespace subpa {

DeviationReport lln_deviation(std::span<const RecordedPath> paths,
                              const ProfileFn& phi,
                              const WeightPathFn& weight_path, int k_cut) {
    if (paths.empty()) throw ConfigError("lln_deviation: no paths");
    DeviationReport report;
    report.n = paths[0].n;
    report.k_cut = k_cut;
    const int k_rec = paths[0].k_record;
    if (k_cut > k_rec)
        throw ConfigError("lln_deviation: k_cut exceeds recorded classes");

    for (const RecordedPath& path : paths) {
        if (path.times.size() != paths[0].times.size() ||
            path.k_record != k_rec)
            throw ConfigError("lln_deviation: paths disagree on the grid");
        std::vector<double> sup(std::size_t(k_rec), 0.0);
        double wsup = 0.0;
        for (std::size_t i = 0; i < path.times.size(); ++i) {
            const double t = path.times[i];
            for (int k = 1; k <= k_rec; ++k) {
                const double dev = std::abs(path.value(k, i) - phi(k, t));
                sup[std::size_t(k - 1)] = std::max(sup[std::size_t(k - 1)], dev);
            }
            if (weight_path) {
                wsup = std::max(
                    wsup, std::abs(path.weight_path[i] - weight_path(t)));
            }
        }
        double worst = 0.0;
        for (int k = 1; k <= k_cut; ++k)
            worst = std::max(worst, sup[std::size_t(k - 1)]);
        report.per_replica_max.push_back(worst);
        report.per_replica_per_k.push_back(std::move(sup));
        if (weight_path) report.weight_sup.push_back(wsup);
    }

    const std::size_t R = report.per_replica_per_k.size();
    report.per_k_mean.assign(std::size_t(k_rec), 0.0);
    for (const auto& sup : report.per_replica_per_k)
        for (int k = 0; k < k_rec; ++k)
            report.per_k_mean[std::size_t(k)] += sup[std::size_t(k)] / double(R);

    double mean = 0.0, mx = 0.0;
    for (double v : report.per_replica_max) {
        mean += v / double(R);
        mx = std::max(mx, v);
    }
    double var = 0.0;
    for (double v : report.per_replica_max) var += (v - mean) * (v - mean);
    report.mean_max = mean;
    report.max_max = mx;
    report.std_max = R > 1 ? std::sqrt(var / double(R - 1)) : 0.0;
    return report;
}

DeviationReport lln_deviation(std::span<const RecordedPath> paths,
                              const Trajectory& trajectory, int k_cut) {
    if (paths.empty()) throw ConfigError("lln_deviation: no paths");
    const auto& times = paths[0].times;
    if (trajectory.samples.size() != times.size())
        throw ConfigError(
            "lln_deviation: trajectory and paths use different grids");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::abs(trajectory.samples[i].t - times[i]) >
            1e-12 * std::max(1.0, std::abs(times[i])))
            throw ConfigError(
                "lln_deviation: trajectory and paths use different grids");

    // Index samples by position; the grids coincide.
    auto phi = [&](int k, double t) -> double {
        const auto it = std::lower_bound(times.begin(), times.end(),
                                         t - 1e-15);
        const std::size_t i = std::size_t(it - times.begin());
        const auto& vals = trajectory.samples[i].values;
        return k <= int(vals.size()) ? vals[std::size_t(k - 1)] : 0.0;
    };
    auto weight = [&](double t) -> double {
        const auto it = std::lower_bound(times.begin(), times.end(),
                                         t - 1e-15);
        const std::size_t i = std::size_t(it - times.begin());
        return trajectory.samples[i].total_weight;
    };
    return lln_deviation(paths, phi, weight, k_cut);
}

std::vector<RecordedPath> run_replicas(const ModelParams& params, long long n,
                                       int replicas, std::uint64_t seed,
                                       std::span<const double> grid,
                                       int k_record, int threads) {
    if (replicas < 1) throw ConfigError("run_replicas: replicas must be >= 1");
    std::vector<RecordedPath> paths(static_cast<std::size_t>(replicas));

    int workers = threads > 0 ? threads
                              : int(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, std::max(1, replicas));

    std::vector<double> grid_copy(grid.begin(), grid.end());
    auto work = [&](int worker) {
        for (int r = worker; r < replicas; r += workers) {
            const std::uint64_t rs = Rng::stream(seed, std::uint64_t(r))
                                         .next_u64();
            DegreeCountState st =
                DegreeCountState::seed_small(params, rs);
            paths[std::size_t(r)] =
                run_chain(st, n, grid_copy, k_record);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(workers));
        for (int wi = 0; wi < workers; ++wi) pool.emplace_back(work, wi);
        for (auto& th : pool) th.join();
    }
    return paths;
}

StudyTable convergence_study(const ModelParams& params,
                             std::span<const long long> ns, int replicas,
                             double t_end, int k_cut, std::uint64_t seed,
                             int grid_points, int threads) {
    if (ns.empty()) throw ConfigError("convergence_study: no scales given");
    for (std::size_t i = 1; i < ns.size(); ++i)
        if (!(ns[i] > ns[i - 1]))
            throw ConfigError("convergence_study: scales must increase");

    const double s_star = solve_growth_rate(params, 1e-12);
    EquilibriumSolution eq =
        limit_proportions(params, s_star, std::max(k_cut, 64));
    auto phi = [&](int k, double t) {
        return k <= eq.truncation ? eq.a[std::size_t(k - 1)] * t : 0.0;
    };
    auto weight = [&](double t) { return s_star * t; };

    std::vector<double> grid(static_cast<std::size_t>(grid_points), 0.0);
    for (int i = 0; i < grid_points; ++i)
        grid[std::size_t(i)] = t_end * double(i) / double(grid_points - 1);

    StudyTable table;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        // Distinct seed block per scale so rows are independent.
        const std::uint64_t row_seed =
            Rng::stream(seed, 0xA0000 + std::uint64_t(i)).next_u64();
        auto paths = run_replicas(params, ns[i], replicas, row_seed, grid,
                                  std::max(k_cut, 8), threads);
        DeviationReport report = lln_deviation(paths, phi, weight, k_cut);
        StudyRow row;
        row.n = ns[i];
        row.replicas = replicas;
        row.mean_max_dev = report.mean_max;
        row.std_dev = report.std_max;
        row.per_k_mean = report.per_k_mean;
        table.rows.push_back(std::move(row));
    }

    if (table.rows.size() >= 2) {
        // Least-squares slope of log(dev) against log(n).
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = double(table.rows.size());
        for (const StudyRow& row : table.rows) {
            const double x = std::log(double(row.n));
            const double y = std::log(std::max(row.mean_max_dev, 1e-300));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        table.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        table.slope_defined = true;
        table.slope_in_band = table.slope >= -0.7 && table.slope <= -0.3;
        table.monotone = table.rows.back().mean_max_dev <
                         table.rows.front().mean_max_dev;
    }
    return table;
}

SlopeReport large_init_slope(const Trajectory& trajectory,
                             const EquilibriumSolution& equilibrium,
                             int k_cut, const InitialConfiguration& init,
                             const ModelParams& params) {
    if (trajectory.samples.empty())
        throw ConfigError("large_init_slope: empty trajectory");
    if (k_cut > equilibrium.truncation ||
        k_cut > int(trajectory.samples.back().values.size()))
        throw ConfigError("large_init_slope: k_cut exceeds the truncation");

    const TruncatedProfile& last = trajectory.samples.back();
    const double t_end = last.t;
    if (!(t_end > 0.0)) throw ConfigError("large_init_slope: t_end must be > 0");

    SlopeReport report;
    report.t_end_warning =
        !init.small() && t_end < 10.0 * init.weighted_size / params.p0;
    for (int k = 1; k <= k_cut; ++k) {
        const double a = equilibrium.a[std::size_t(k - 1)];
        const double slope = last.values[std::size_t(k - 1)] / t_end;
        report.rel_err.push_back(std::abs(slope - a) / a);
    }
    report.max_rel_err =
        *std::max_element(report.rel_err.begin(), report.rel_err.end());
    report.pass = report.max_rel_err <= 0.01;
    return report;
}

}  // namespace subpa
