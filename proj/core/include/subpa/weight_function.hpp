#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace subpa {

// Result of probing w(k)/k over a finite range.  The tail check looks at the
// last tenth of the probe range: the ratio must be nonincreasing there, which
// every admissible power weight k^kappa (kappa < 1) satisfies.
struct SublinearityCertificate {
    double linear_ratio_bound = 0.0;  // max of w(k)/k over 1..probe_limit
    double ratio_tail = 0.0;          // max of w(k)/k over the last tenth
    bool tail_monotone = false;       // w(k)/k nonincreasing over the last tenth
    int probe_limit = 0;

    bool ok() const { return tail_monotone; }
};

// Positive weight function w(k) on classes k >= 1.  Immutable after
// construction and safe to share across threads.
//
// Kinds:
//   power(kappa)  w(k) = k^kappa, kappa < 1
//   table(v)      w(k) = v[k-1] for k <= m; beyond the table the local
//                 log-log slope of the last two entries is held, so the tail
//                 stays a power law with exponent < 1
//   custom(fn)    arbitrary positive closure
class WeightFunction {
public:
    static WeightFunction power(double kappa);
    static WeightFunction table(std::vector<double> values);
    static WeightFunction custom(std::function<double(int)> fn,
                                 std::string label = "custom");

    // w(k) for k >= 1.  Pure; repeated calls agree bitwise.
    double operator()(int k) const;

    // Cached bound on sup_k w(k)/k over the probed range.
    double linear_ratio_bound() const { return ratio_bound_; }

    // Probe w(k)/k over 1..probe_limit (probe_limit >= 100).
    SublinearityCertificate certify(int probe_limit = 1000) const;

    bool is_power() const { return kind_ == Kind::power; }
    double power_exponent() const;
    const std::string& label() const { return label_; }

private:
    enum class Kind { power, table, custom };

    WeightFunction(Kind kind, double kappa, std::vector<double> values,
                   std::function<double(int)> fn, std::string label);

    double eval(int k) const;

    Kind kind_;
    double kappa_ = 0.0;            // power exponent, or table extension slope
    std::vector<double> values_;    // table entries
    std::function<double(int)> fn_;
    std::string label_;
    double ratio_bound_ = 0.0;      // cached sup of w(k)/k over the probe
};

}  // namespace subpa
