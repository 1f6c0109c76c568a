#pragma once

// Small statistics helpers for the test suites: chi-square survival
// function via the regularized incomplete gamma, and a two-sample
// chi-square test with bin pooling.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace testutil {

// Regularized upper incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) return std::nan("");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 1000; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double chi2_sf(double stat, int df) {
    return gamma_q(0.5 * df, 0.5 * stat);
}

struct TwoSampleChi2 {
    double stat = 0.0;
    int df = 0;
    double p_value = 1.0;
};

// Two-sample chi-square on integer-valued observations.  Values are pooled
// left to right until each bin holds at least `min_count` combined
// observations.
inline TwoSampleChi2 two_sample_chi2(const std::vector<long long>& xs,
                                     const std::vector<long long>& ys,
                                     long long min_count = 10) {
    std::map<long long, std::pair<double, double>> hist;
    for (long long v : xs) hist[v].first += 1.0;
    for (long long v : ys) hist[v].second += 1.0;

    std::vector<std::pair<double, double>> bins;
    double acc1 = 0.0, acc2 = 0.0;
    for (const auto& [value, counts] : hist) {
        (void)value;
        acc1 += counts.first;
        acc2 += counts.second;
        if (acc1 + acc2 >= double(min_count)) {
            bins.emplace_back(acc1, acc2);
            acc1 = acc2 = 0.0;
        }
    }
    if (acc1 + acc2 > 0.0) {
        if (bins.empty()) {
            bins.emplace_back(acc1, acc2);
        } else {
            bins.back().first += acc1;
            bins.back().second += acc2;
        }
    }

    TwoSampleChi2 out;
    if (bins.size() < 2) return out;  // everything in one bin: no signal

    const double n1 = double(xs.size()), n2 = double(ys.size());
    for (const auto& [o1, o2] : bins) {
        const double total = o1 + o2;
        const double e1 = total * n1 / (n1 + n2);
        const double e2 = total * n2 / (n1 + n2);
        out.stat += (o1 - e1) * (o1 - e1) / e1 + (o2 - e2) * (o2 - e2) / e2;
    }
    out.df = int(bins.size()) - 1;
    out.p_value = chi2_sf(out.stat, out.df);
    return out;
}

}  // namespace testutil
