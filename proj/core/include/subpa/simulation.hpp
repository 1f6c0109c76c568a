#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "subpa/dynamics.hpp"
#include "subpa/fenwick.hpp"
#include "subpa/model.hpp"
#include "subpa/rng.hpp"

namespace subpa {

// Integer identities maintained exactly along a chain:
//   graph: degree total = initial + 2 n
//   urn:   ball total   = initial + n
//   both:  unit count   = initial + number of new-vertex/new-urn events
struct AuditCounters {
    long long initial_size_total = 0;  // total degree / total balls at step 0
    long long size_total = 0;
    long long initial_units = 0;       // vertices or urns at step 0
    long long units = 0;
    long long additions = 0;           // new-vertex / new-urn events
    long long steps = 0;
    int max_abs_increment = 0;         // largest |Z_k change| seen in one step

    bool exact_ok(ModelKind kind) const {
        const long long per_step = kind == ModelKind::graph ? 2 : 1;
        return size_total == initial_size_total + per_step * steps &&
               units == initial_units + additions && max_abs_increment <= 2;
    }
};

// Degree-count Markov chain: Z_k = number of vertices (urns) in class k,
// stepped exactly per the model's one-step law.  Class selection is
// proportional to w(k) Z_k via a Fenwick tree; within a class all units are
// exchangeable, so the chain never needs vertex identities beyond the
// same-vertex rule (two weighted picks landing in class k name the same
// vertex with probability 1/Z_k).
class DegreeCountState {
public:
    static DegreeCountState seed_small(const ModelParams& params,
                                       std::uint64_t seed);
    // Z_k(0) = round(n c_k); rejects configurations that round to nothing.
    static DegreeCountState seed_large(const ModelParams& params,
                                       const InitialConfiguration& init,
                                       long long n, std::uint64_t seed);

    void step();
    void advance(long long steps);

    long long count(int k) const {
        return k <= max_class_ ? z_[std::size_t(k)] : 0;
    }
    double total_weight() const { return cached_weight_; }  // S
    long long step_index() const { return audit_.steps; }   // n
    int max_class() const { return max_class_; }
    const AuditCounters& audit() const { return audit_; }
    const ModelParams& params() const { return params_; }

    // Recompute S and the sampling tree exactly from the counts.
    void resync();
    // Relative gap between the cached S and one recomputed from Z.
    double weight_drift() const;
    // Replace the generator state, e.g. to fan a frozen state into
    // independent one-step trials.
    void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

private:
    explicit DegreeCountState(const ModelParams& params, std::uint64_t seed);

    void place_unit(int k, long long count);  // seeding only
    void move_unit(int from, int to);
    void add_unit(int k);
    void note_increment(int k, int delta);
    void ensure_capacity(int k);
    int sample_class();
    void step_graph();
    void step_urn();

    ModelParams params_;
    Rng rng_;
    std::vector<long long> z_;   // z_[k] for k >= 1; index 0 unused
    std::vector<int> touched_;   // classes changed in the current step
    FenwickTree tree_;
    double cached_weight_ = 0.0;
    int max_class_ = 0;
    AuditCounters audit_;
    long long resync_interval_ = 1 << 16;
};

// Exact one-step pmf of the increment d_k = Z_k(j+1) - Z_k(j), evaluated
// from the model's transition tables at the current state.  Serves as the
// oracle for the samplers and for the drift identities.
struct IncrementPmf {
    std::array<double, 5> p{};  // index d + 2, d in {-2, -1, 0, 1, 2}
    double prob(int d) const { return p[std::size_t(d + 2)]; }
    double sum() const;
    double mean() const;  // sum d * p(d)
};

IncrementPmf increment_pmf(const DegreeCountState& state, int k);

// Conditional expectation of d_k given the state, from the drift formulas
// (an independent route to IncrementPmf::mean()).
double conditional_drift(const DegreeCountState& state, int k);

// Linearly interpolated scaled path recorded on a time grid:
//   X_k(t) = Z_k(floor(nt))/n + (nt - floor(nt)) (Z_k(ceil(nt)) - Z_k(floor(nt)))/n
// and the matching interpolation of S(n t)/n.
struct RecordedPath {
    long long n = 0;  // scale
    int k_record = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> x;  // x[i][k-1] = X_k(times[i])
    std::vector<double> weight_path;     // interpolated S/n at times[i]
    AuditCounters audit;

    double value(int k, std::size_t i) const { return x[i][std::size_t(k - 1)]; }
};

// Advance the chain to cover grid.back() and record classes 1..k_record.
RecordedPath run_chain(DegreeCountState& state, long long n,
                       std::span<const double> grid, int k_record);

}  // namespace subpa
