#include "subpa/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "subpa/errors.hpp"

namespace subpa {

namespace {

// Per-step class deltas; at most four classes change in one step.
struct DeltaScratch {
    std::array<std::pair<int, int>, 6> slots{};
    int used = 0;

    void note(int k, int d) {
        for (int i = 0; i < used; ++i) {
            if (slots[std::size_t(i)].first == k) {
                slots[std::size_t(i)].second += d;
                return;
            }
        }
        slots[std::size_t(used++)] = {k, d};
    }

    int max_abs() const {
        int m = 0;
        for (int i = 0; i < used; ++i)
            m = std::max(m, std::abs(slots[std::size_t(i)].second));
        return m;
    }
};

}  // namespace

DegreeCountState::DegreeCountState(const ModelParams& params,
                                   std::uint64_t seed)
    : params_(params), rng_(seed), tree_(64) {
    z_.assign(65, 0);
}

DegreeCountState DegreeCountState::seed_small(const ModelParams& params,
                                              std::uint64_t seed) {
    DegreeCountState st(params, seed);
    if (params.kind == ModelKind::graph) {
        st.place_unit(1, 2);  // two vertices joined by a single edge
    } else {
        st.place_unit(1, 1);  // one urn holding one ball
    }
    st.audit_.initial_size_total = st.audit_.size_total;
    st.audit_.initial_units = st.audit_.units;
    return st;
}

DegreeCountState DegreeCountState::seed_large(const ModelParams& params,
                                              const InitialConfiguration& init,
                                              long long n, std::uint64_t seed) {
    if (init.small())
        throw ConfigError("seed_large requires a large configuration");
    DegreeCountState st(params, seed);
    long long placed = 0;
    for (std::size_t i = 0; i < init.c.size(); ++i) {
        const long long count = llround(double(n) * init.c[i]);
        if (count > 0) {
            st.place_unit(int(i) + 1, count);
            placed += count;
        }
    }
    if (placed == 0)
        throw ConfigError(
            "large configuration rounded to zero counts at n = " +
            std::to_string(n));
    st.audit_.initial_size_total = st.audit_.size_total;
    st.audit_.initial_units = st.audit_.units;
    return st;
}

void DegreeCountState::ensure_capacity(int k) {
    if (k >= int(z_.size())) z_.resize(std::size_t(k) * 2 + 1, 0);
    if (k > tree_.capacity()) {
        std::vector<double> weights(static_cast<std::size_t>(max_class_), 0.0);
        for (int j = 1; j <= max_class_; ++j)
            weights[std::size_t(j - 1)] = params_.weight(j) * double(z_[std::size_t(j)]);
        tree_.reset(std::max(k, 2 * tree_.capacity()));
        tree_.rebuild(weights);
    }
}

void DegreeCountState::place_unit(int k, long long count) {
    ensure_capacity(k);
    z_[std::size_t(k)] += count;
    max_class_ = std::max(max_class_, k);
    audit_.units += count;
    audit_.size_total += k * count;
    const double w = params_.weight(k) * double(count);
    tree_.add(k, w);
    cached_weight_ += w;
}

void DegreeCountState::add_unit(int k) {
    ensure_capacity(k);
    z_[std::size_t(k)] += 1;
    max_class_ = std::max(max_class_, k);
    audit_.units += 1;
    audit_.size_total += k;
    const double w = params_.weight(k);
    tree_.add(k, w);
    cached_weight_ += w;
}

void DegreeCountState::move_unit(int from, int to) {
    ensure_capacity(to);
    z_[std::size_t(from)] -= 1;
    z_[std::size_t(to)] += 1;
    max_class_ = std::max(max_class_, to);
    audit_.size_total += to - from;
    const double wf = params_.weight(from);
    const double wt = params_.weight(to);
    tree_.add(from, -wf);
    tree_.add(to, wt);
    cached_weight_ += wt - wf;
}

int DegreeCountState::sample_class() {
    const double x = rng_.unit() * cached_weight_;
    int k = tree_.sample(x);
    if (k > max_class_ || z_[std::size_t(k)] <= 0) {
        // Rounding residue landed on an empty class; take the nearest
        // populated one (the configuration is nonempty whenever S > 0).
        int down = std::min(k, max_class_);
        while (down >= 1 && z_[std::size_t(down)] <= 0) --down;
        if (down >= 1) return down;
        int up = k + 1;
        while (up <= max_class_ && z_[std::size_t(up)] <= 0) ++up;
        if (up <= max_class_) return up;
        throw ModelError("sample_class: no populated class (S <= 0)");
    }
    return k;
}

void DegreeCountState::step() {
    if (params_.kind == ModelKind::graph)
        step_graph();
    else
        step_urn();
    audit_.steps += 1;
    if (audit_.steps % resync_interval_ == 0) resync();
}

void DegreeCountState::step_graph() {
    DeltaScratch deltas;
    if (rng_.unit() < params_.p) {
        // New vertex linked to a weighted pick.
        const int k = sample_class();
        move_unit(k, k + 1);
        add_unit(1);
        audit_.additions += 1;
        deltas.note(k, -1);
        deltas.note(k + 1, +1);
        deltas.note(1, +1);
    } else {
        // Two independent weighted picks from the pre-step configuration.
        const int k1 = sample_class();
        const int k2 = sample_class();
        if (k1 == k2) {
            if (rng_.unit() * double(z_[std::size_t(k1)]) < 1.0) {
                // Both picks chose the identical vertex: a loop, degree +2.
                move_unit(k1, k1 + 2);
                deltas.note(k1, -1);
                deltas.note(k1 + 2, +1);
            } else {
                move_unit(k1, k1 + 1);
                move_unit(k1, k1 + 1);
                deltas.note(k1, -2);
                deltas.note(k1 + 1, +2);
            }
        } else {
            move_unit(k1, k1 + 1);
            move_unit(k2, k2 + 1);
            deltas.note(k1, -1);
            deltas.note(k1 + 1, +1);
            deltas.note(k2, -1);
            deltas.note(k2 + 1, +1);
        }
    }
    audit_.max_abs_increment =
        std::max(audit_.max_abs_increment, deltas.max_abs());
}

void DegreeCountState::step_urn() {
    DeltaScratch deltas;
    if (rng_.unit() < params_.p) {
        add_unit(1);
        audit_.additions += 1;
        deltas.note(1, +1);
    } else {
        const int k = sample_class();
        move_unit(k, k + 1);
        deltas.note(k, -1);
        deltas.note(k + 1, +1);
    }
    audit_.max_abs_increment =
        std::max(audit_.max_abs_increment, deltas.max_abs());
}

void DegreeCountState::advance(long long steps) {
    for (long long i = 0; i < steps; ++i) step();
}

void DegreeCountState::resync() {
    std::vector<double> weights(static_cast<std::size_t>(max_class_), 0.0);
    double total = 0.0;
    for (int k = 1; k <= max_class_; ++k) {
        const double w = params_.weight(k) * double(z_[std::size_t(k)]);
        weights[std::size_t(k - 1)] = w;
        total += w;
    }
    tree_.rebuild(weights);
    cached_weight_ = total;
}

double DegreeCountState::weight_drift() const {
    double total = 0.0;
    for (int k = 1; k <= max_class_; ++k)
        total += params_.weight(k) * double(z_[std::size_t(k)]);
    return std::abs(cached_weight_ - total) / std::max(total, 1e-300);
}

double IncrementPmf::sum() const {
    return p[0] + p[1] + p[2] + p[3] + p[4];
}

double IncrementPmf::mean() const {
    return -2.0 * p[0] - p[1] + p[3] + 2.0 * p[4];
}

namespace {

double exact_total_weight(const DegreeCountState& st) {
    double total = 0.0;
    for (int k = 1; k <= st.max_class(); ++k)
        total += st.params().weight(k) * double(st.count(k));
    return total;
}

}  // namespace

IncrementPmf increment_pmf(const DegreeCountState& state, int k) {
    if (k < 1) throw ConfigError("increment_pmf requires k >= 1");
    const ModelParams& m = state.params();
    const double S = exact_total_weight(state);
    if (!(S > 0.0)) throw ModelError("increment_pmf requires S > 0");

    // Selection probability A_j = w(j) Z_j / S and same-vertex mass
    // B_j = w(j)^2 Z_j / S^2.
    auto A = [&](int j) {
        return j >= 1 ? m.weight(j) * double(state.count(j)) / S : 0.0;
    };
    auto B = [&](int j) {
        if (j < 1) return 0.0;
        const double w = m.weight(j);
        return w * w * double(state.count(j)) / (S * S);
    };

    const double p = m.p;
    IncrementPmf pmf;
    auto& P = pmf.p;  // index d + 2

    if (m.kind == ModelKind::urn) {
        if (k == 1) {
            P[3] = p;
            P[1] = (1 - p) * A(1);
            P[2] = (1 - p) * (1.0 - A(1));
        } else {
            P[3] = (1 - p) * A(k - 1);
            P[1] = (1 - p) * A(k);
            P[2] = 1.0 - (1 - p) * (A(k - 1) + A(k));
        }
    } else {
        const double q = 1 - p;
        if (k == 1) {
            const double a1 = A(1), b1 = B(1);
            P[3] = p * (1.0 - a1);
            P[2] = p * a1 + q * (1.0 - a1) * (1.0 - a1);
            P[1] = 2.0 * q * a1 * (1.0 - a1) + q * b1;
            P[0] = q * (a1 * a1 - b1);
        } else if (k == 2) {
            const double a1 = A(1), a2 = A(2), b1 = B(1), b2 = B(2);
            const double rest = 1.0 - a1 - a2;
            P[4] = q * (a1 * a1 - b1);
            P[3] = p * a1 + 2.0 * q * a1 * rest;
            P[2] = p * rest + q * b1 + 2.0 * q * a1 * a2 + q * rest * rest;
            P[1] = p * a2 + q * b2 + 2.0 * q * a2 * rest;
            P[0] = q * (a2 * a2 - b2);
        } else {
            const double am = A(k - 1), ak = A(k);
            const double bm2 = B(k - 2), bm = B(k - 1), bk = B(k);
            const double rest = 1.0 - am - ak;
            P[4] = q * (am * am - bm);
            P[3] = p * am + q * bm2 + 2.0 * q * am * rest;
            P[2] = p * rest + q * bm + 2.0 * q * am * ak + q * rest * rest -
                   q * bm2;
            P[1] = p * ak + q * bk + 2.0 * q * ak * rest;
            P[0] = q * (ak * ak - bk);
        }
    }

    for (double v : P)
        if (v < -1e-12 || v > 1.0 + 1e-12)
            throw ModelError(
                "increment_pmf: table produced a probability outside [0,1]; "
                "invalid state");
    if (std::abs(pmf.sum() - 1.0) > 1e-12)
        throw ModelError("increment_pmf: table does not sum to 1");
    return pmf;
}

double conditional_drift(const DegreeCountState& state, int k) {
    const ModelParams& m = state.params();
    const double S = exact_total_weight(state);
    if (!(S > 0.0)) throw ModelError("conditional_drift requires S > 0");
    auto A = [&](int j) {
        return j >= 1 ? m.weight(j) * double(state.count(j)) / S : 0.0;
    };
    auto B = [&](int j) {
        if (j < 1) return 0.0;
        const double w = m.weight(j);
        return w * w * double(state.count(j)) / (S * S);
    };
    const double p = m.p;
    if (m.kind == ModelKind::urn) {
        if (k == 1) return p - (1 - p) * A(1);
        return (1 - p) * (A(k - 1) - A(k));
    }
    const double q = 1 - p;
    if (k == 1) return p - (2 - p) * A(1) + q * B(1);
    if (k == 2) return (2 - p) * (A(1) - A(2)) + q * (-2.0 * B(1) + B(2));
    return (2 - p) * (A(k - 1) - A(k)) +
           q * (B(k - 2) - 2.0 * B(k - 1) + B(k));
}

RecordedPath run_chain(DegreeCountState& state, long long n,
                       std::span<const double> grid, int k_record) {
    if (grid.empty()) throw ConfigError("run_chain: empty time grid");
    if (n < 1) throw ConfigError("run_chain: scale n must be >= 1");
    if (k_record < 1) throw ConfigError("run_chain: k_record must be >= 1");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] >= grid[i - 1]))
            throw ConfigError("run_chain: grid times must be nondecreasing");

    RecordedPath path;
    path.n = n;
    path.k_record = k_record;
    path.times.assign(grid.begin(), grid.end());

    std::vector<double> zf(static_cast<std::size_t>(k_record), 0.0);
    std::vector<double> zc(static_cast<std::size_t>(k_record), 0.0);
    double sf = 0.0, sc = 0.0;
    long long if_ = -1, ic_ = -1;

    auto snapshot = [&](std::vector<double>& z, double& s) {
        for (int k = 1; k <= k_record; ++k)
            z[std::size_t(k - 1)] = double(state.count(k));
        s = state.total_weight();
    };

    for (double t : grid) {
        const double nt = double(n) * t;
        const long long m = (long long)std::floor(nt);
        const double frac = nt - double(m);

        if (m != if_) {
            if (m == ic_) {
                zf.swap(zc);
                sf = sc;
            } else {
                state.advance(m - state.step_index());
                snapshot(zf, sf);
            }
            if_ = m;
            ic_ = -1;
        }
        std::vector<double> xi(static_cast<std::size_t>(k_record), 0.0);
        double si;
        if (frac > 0.0) {
            if (ic_ != m + 1) {
                state.advance((m + 1) - state.step_index());
                snapshot(zc, sc);
                ic_ = m + 1;
            }
            for (int k = 0; k < k_record; ++k)
                xi[std::size_t(k)] =
                    (zf[std::size_t(k)] +
                     frac * (zc[std::size_t(k)] - zf[std::size_t(k)])) /
                    double(n);
            si = (sf + frac * (sc - sf)) / double(n);
        } else {
            for (int k = 0; k < k_record; ++k)
                xi[std::size_t(k)] = zf[std::size_t(k)] / double(n);
            si = sf / double(n);
        }
        path.x.push_back(std::move(xi));
        path.weight_path.push_back(si);
    }
    path.audit = state.audit();
    return path;
}

}  // namespace subpa
