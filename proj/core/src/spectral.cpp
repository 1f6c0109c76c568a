#include "subpa/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subpa/errors.hpp"

namespace subpa {

TruncatedGenerator::TruncatedGenerator(const ModelParams& params,
                                       int truncation)
    : K_(truncation), p0_(params.p0), q0_(params.q0) {
    if (truncation < 2)
        throw ConfigError("TruncatedGenerator requires K >= 2");
    q0w_.resize(std::size_t(K_));
    p0w_.resize(std::size_t(K_));
    for (int k = 1; k <= K_; ++k) {
        const double w = params.weight(k);
        q0w_[std::size_t(k - 1)] = q0_ * w;
        p0w_[std::size_t(k - 1)] = p0_ * w;
    }
    shift_ = q0_ * params.weight.linear_ratio_bound() * K_;
}

void TruncatedGenerator::apply(std::span<const double> x,
                               std::span<double> out) const {
    const std::size_t K = std::size_t(K_);
    double first = (p0w_[0] - q0w_[0]) * x[0];
    for (std::size_t i = 1; i < K; ++i) first += p0w_[i] * x[i];
    for (std::size_t i = K - 1; i >= 1; --i)
        out[i] = q0w_[i - 1] * x[i - 1] - q0w_[i] * x[i];
    out[0] = first;
}

double TruncatedGenerator::diagonal(int k) const {
    if (k == 1) return p0w_[0] - q0w_[0];
    return -q0w_[std::size_t(k - 1)];
}

double TruncatedGenerator::first_row(int k) const {
    if (k == 1) return 0.0;  // folded into diagonal(1)
    return p0w_[std::size_t(k - 1)];
}

double TruncatedGenerator::subdiagonal(int k) const {
    return q0w_[std::size_t(k - 1)];
}

double TruncatedGenerator::lattice_norm(std::span<const double> x) const {
    double norm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        norm += double(i + 1) * std::abs(x[i]);
    return norm;
}

TruncatedGenerator build_generator(const ModelParams& params, int truncation) {
    return TruncatedGenerator(params, truncation);
}

double solve_eigenvalue_equation(const ModelParams& params, double tol) {
    if (!(tol > 0.0))
        throw ConfigError("solve_eigenvalue_equation requires tol > 0");

    // Right side of the eigenvalue equation at a given lambda, truncated
    // with the same frozen-ratio tail rule as the fixed-point series.
    auto rhs = [&](double lam) {
        double sum = 0.0;
        double prod = 1.0;
        for (long k = 2; k <= 10'000'000; ++k) {
            const double qw = params.q0 * params.weight(int(k));
            const double r = qw / (lam + qw);
            prod *= r;
            sum += prod;
            const double qw2 = params.q0 * params.weight(int(k) + 1);
            const double rr = std::max(r, qw2 / (lam + qw2));
            if (prod * rr / (1.0 - rr) < tol * 1e-3) break;
        }
        const double w1 = params.weight(1);
        return (params.p0 - params.q0) * w1 + params.p0 * w1 * sum;
    };

    double hi = 1.0;
    int guard = 0;
    while (rhs(hi) > hi) {
        hi *= 2.0;
        if (++guard > 200)
            throw ModelError("solve_eigenvalue_equation: no positive root");
    }
    double lo = hi / 2.0;
    guard = 0;
    while (rhs(lo) < lo) {
        lo /= 2.0;
        if (++guard > 200)
            throw ModelError("solve_eigenvalue_equation: no positive root");
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double gap = rhs(mid) - mid;
        if (std::abs(gap) <= tol) return mid;
        if (gap > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= std::numeric_limits<double>::epsilon() * mid) break;
    }
    return mid;
}

Eigenpair dominant_eigenpair(const TruncatedGenerator& op, double tol,
                             long max_iterations) {
    const int K = op.truncation();
    const std::size_t n = std::size_t(K);
    std::vector<double> x(n, 0.0), y(n, 0.0);
    x[0] = 1.0;

    const double sigma = op.shift();
    double lambda = 0.0;
    Eigenpair out;

    // Converged when the lattice residual is below tol and every component
    // above underflow satisfies its row equation in relative terms (the
    // latter makes the deep tail multiplicatively accurate, not just small).
    double best_rel = 1e300;
    long stale = 0;
    long it = 0;
    for (; it < max_iterations; ++it) {
        op.apply(x, y);
        for (std::size_t i = 0; i < n; ++i) y[i] += sigma * x[i];
        const double norm = op.lattice_norm(y);
        if (!(norm > 0.0))
            throw ToleranceError("dominant_eigenpair: iterate vanished");
        for (std::size_t i = 0; i < n; ++i) y[i] /= norm;
        lambda = norm - sigma;

        op.apply(y, x);  // reuse x as scratch: x = A y
        double res = 0.0;
        double rel = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double row = std::abs(x[i] - lambda * y[i]);
            if (i + 1 < n) res += double(i + 1) * row;
            if (y[i] > 1e-250) {
                const double scale =
                    (std::abs(lambda) + op.subdiagonal(int(i) + 1)) * y[i];
                rel = std::max(rel, row / scale);
            }
        }
        const double res_K = double(K) * std::abs(x[n - 1] - lambda * y[n - 1]);
        x.swap(y);

        if (rel < best_rel * 0.999) {
            best_rel = rel;
            stale = 0;
        } else {
            ++stale;
        }
        if (res + res_K <= tol && (rel <= tol || stale > 500)) break;
    }
    if (it >= max_iterations)
        throw ToleranceError(
            "dominant_eigenpair: power iteration did not converge in " +
            std::to_string(max_iterations) + " iterations");

    out.iterations = it + 1;
    out.value = lambda;
    out.vector = x;

    out.positive_ok = true;
    for (double v : x)
        if (v < 0.0) out.positive_ok = false;  // truncation too small

    // Residual rows < K and the dropped outflow past the boundary.
    op.apply(x, y);
    double res = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        res += double(i + 1) * std::abs(y[i] - lambda * x[i]);
    out.residual = res;
    out.boundary_residual = double(K + 1) * op.subdiagonal(K) * x[n - 1];

    // Componentwise check against the product form
    // x_k = x_1 prod_{r=2..k} q0 w(r-1) / (lambda + q0 w(r)).
    double prod = x[0];
    double max_rel = 0.0;
    for (int k = 2; k <= K; ++k) {
        // x_k = x_{k-1} * q0 w(k-1) / (lambda + q0 w(k))
        prod *= op.subdiagonal(k - 1) / (lambda + op.subdiagonal(k));
        if (prod < 1e-250) break;
        max_rel = std::max(max_rel,
                           std::abs(x[std::size_t(k - 1)] - prod) / prod);
    }
    out.closed_form_rel_err = max_rel;
    return out;
}

AdjointEigenvector adjoint_eigenvector(const ModelParams& params,
                                       double s_star, int truncation) {
    if (truncation < 2)
        throw ConfigError("adjoint_eigenvector requires K >= 2");
    if (!(s_star > 0.0))
        throw ConfigError("adjoint_eigenvector requires s* > 0");

    const double p0 = params.p0, q0 = params.q0;
    auto R = [&](int r) {
        const double qw = q0 * params.weight(r);
        return qw / (s_star + qw);
    };
    auto P = [&](int k) {
        const double w = params.weight(k);
        return p0 * w / (s_star + q0 * w);
    };

    AdjointEigenvector out;
    out.values.resize(std::size_t(truncation));
    for (int j = 1; j <= truncation; ++j) {
        double total = 0.0;
        double prod = 1.0;
        for (long k = j; k <= j + 10'000'000; ++k) {
            total += prod * P(int(k));
            const double r = R(int(k));
            prod *= r;
            const double rr = std::max(r, R(int(k) + 1));
            // P_m <= p0/q0 for all m, so the remaining tail is bounded by
            // prod * (p0/q0) * rr / (1 - rr).
            if (prod * (p0 / q0) * rr / (1.0 - rr) <
                1e-16 * std::max(total, 1e-300))
                break;
        }
        out.values[std::size_t(j - 1)] = total;
    }
    const double x1 = out.values[0];
    if (!(x1 > 0.0))
        throw ToleranceError("adjoint_eigenvector: series degenerated");
    for (double& v : out.values) v /= x1;

    for (int j = 1; j < truncation; ++j) {
        const double wj = params.weight(j);
        const double lhs = out.values[std::size_t(j - 1)] * (s_star + q0 * wj);
        const double rhs =
            q0 * wj * out.values[std::size_t(j)] + p0 * wj * out.values[0];
        const double rel = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
        out.max_recursion_residual = std::max(out.max_recursion_residual, rel);
    }
    if (out.max_recursion_residual > 1e-8)
        throw ToleranceError(
            "adjoint_eigenvector: recursion residual above 1e-8; the tail "
            "truncation is too aggressive");

    for (int j = 1; j <= truncation; ++j)
        out.linear_growth_bound = std::max(
            out.linear_growth_bound, out.values[std::size_t(j - 1)] / j);
    return out;
}

}  // namespace subpa
