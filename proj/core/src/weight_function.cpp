#include "subpa/weight_function.hpp"

#include <algorithm>
#include <cmath>

#include "subpa/errors.hpp"

namespace subpa {

WeightFunction::WeightFunction(Kind kind, double kappa,
                               std::vector<double> values,
                               std::function<double(int)> fn,
                               std::string label)
    : kind_(kind),
      kappa_(kappa),
      values_(std::move(values)),
      fn_(std::move(fn)),
      label_(std::move(label)) {
    // Cache the linear-ratio bound over a default probe.
    int probe = 1000;
    double bound = 0.0;
    for (int k = 1; k <= probe; ++k) bound = std::max(bound, eval(k) / k);
    ratio_bound_ = bound;
}

WeightFunction WeightFunction::power(double kappa) {
    if (!(kappa < 1.0))
        throw ConfigError("weight.kappa must satisfy kappa < 1 (got " +
                          std::to_string(kappa) + ")");
    return WeightFunction(Kind::power, kappa, {}, nullptr,
                          "power(" + std::to_string(kappa) + ")");
}

WeightFunction WeightFunction::table(std::vector<double> values) {
    if (values.empty()) throw ConfigError("weight.table must be nonempty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0))
            throw ConfigError("weight.table entries must be positive (entry " +
                              std::to_string(i + 1) + ")");
    }
    // Extension beyond the table holds the terminal log-log slope; a slope
    // >= 1 would grow at least linearly, so such tables are rejected.
    double slope = 0.0;
    const std::size_t m = values.size();
    if (m >= 2) {
        slope = std::log(values[m - 1] / values[m - 2]) /
                std::log(double(m) / double(m - 1));
        if (!(slope < 1.0))
            throw ConfigError(
                "weight.table terminal slope " + std::to_string(slope) +
                " is not sublinear; the extension requires slope < 1");
    }
    return WeightFunction(Kind::table, slope, std::move(values), nullptr,
                          "table");
}

WeightFunction WeightFunction::custom(std::function<double(int)> fn,
                                      std::string label) {
    if (!fn) throw ConfigError("weight.custom requires a callable");
    return WeightFunction(Kind::custom, 0.0, {}, std::move(fn),
                          std::move(label));
}

double WeightFunction::eval(int k) const {
    switch (kind_) {
        case Kind::power:
            return std::pow(double(k), kappa_);
        case Kind::table: {
            const int m = int(values_.size());
            if (k <= m) return values_[std::size_t(k - 1)];
            return values_.back() * std::pow(double(k) / double(m), kappa_);
        }
        case Kind::custom: {
            double v = fn_(k);
            if (!(v > 0.0))
                throw ConfigError("custom weight returned a non-positive value at k = " +
                                  std::to_string(k));
            return v;
        }
    }
    return 0.0;  // unreachable
}

double WeightFunction::operator()(int k) const {
    if (k < 1) throw ConfigError("weight functions are defined for k >= 1");
    return eval(k);
}

double WeightFunction::power_exponent() const {
    if (kind_ != Kind::power)
        throw ConfigError("power_exponent() requires a power weight");
    return kappa_;
}

SublinearityCertificate WeightFunction::certify(int probe_limit) const {
    if (probe_limit < 100)
        throw ConfigError("weight.probe must be at least 100");
    SublinearityCertificate cert;
    cert.probe_limit = probe_limit;

    double bound = 0.0;
    for (int k = 1; k <= probe_limit; ++k)
        bound = std::max(bound, eval(k) / k);
    cert.linear_ratio_bound = bound;

    // Last tenth of the probe range.
    const int tail_start = probe_limit - probe_limit / 10 + 1;
    double tail_max = 0.0;
    bool monotone = true;
    double prev = eval(tail_start) / tail_start;
    tail_max = prev;
    for (int k = tail_start + 1; k <= probe_limit; ++k) {
        double r = eval(k) / k;
        tail_max = std::max(tail_max, r);
        if (r > prev) monotone = false;
        prev = r;
    }
    cert.ratio_tail = tail_max;
    cert.tail_monotone = monotone;
    return cert;
}

}  // namespace subpa
