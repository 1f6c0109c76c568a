#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "subpa/errors.hpp"

namespace subpa {

struct StepControl {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double h_init = 0.0;  // 0 = derive from the first step's error estimate
    double safety = 0.9;
    double h_grow_max = 6.0;
    double h_shrink_min = 0.2;
    int max_rejects_in_row = 60;
    long max_steps = 100'000'000;
};

struct OdeStats {
    long steps = 0;
    long accepted = 0;
    long rejected = 0;
    long guard_rejects = 0;
};

// Dormand-Prince 5(4) embedded pair with step-size control.  The optional
// guard runs on each trial state; returning false rejects the step (the
// guard may also clamp the state in place, e.g. flushing -1e-16 to 0).
class DormandPrince5 {
public:
    using Rhs = std::function<void(double, std::span<const double>,
                                   std::span<double>)>;
    using Guard = std::function<bool(std::span<double>)>;

    DormandPrince5(Rhs rhs, std::size_t dim, const StepControl& ctl)
        : rhs_(std::move(rhs)), n_(dim), ctl_(ctl) {
        for (auto& k : k_) k.resize(n_);
        ytmp_.resize(n_);
    }

    void set_guard(Guard g) { guard_ = std::move(g); }

    void start(double t0, std::vector<double> y0) {
        t_ = t0;
        y_ = std::move(y0);
        h_ = ctl_.h_init;
        have_k1_ = false;
    }

    double time() const { return t_; }
    const std::vector<double>& state() const { return y_; }
    const OdeStats& stats() const { return stats_; }

    // Advance to exactly t_end (steps are clamped; no dense output needed).
    void advance_to(double t_end) {
        if (t_end < t_) throw ConfigError("ode: sample times must increase");
        while (t_ < t_end) {
            if (!have_k1_) {
                rhs_(t_, y_, k_[0]);
                have_k1_ = true;
            }
            if (h_ <= 0.0) h_ = initial_step(t_end);
            const bool clamped = h_ > t_end - t_;
            double h = std::min(h_, t_end - t_);
            int rejects = 0;
            for (;;) {
                if (++stats_.steps > ctl_.max_steps)
                    throw ToleranceError("ode: step budget exhausted");
                const double err = try_step(h);
                bool ok = err <= 1.0;
                if (ok && guard_ && !guard_(ytmp_)) {
                    ok = false;
                    ++stats_.guard_rejects;
                }
                if (ok) {
                    ++stats_.accepted;
                    t_ += h;
                    y_.swap(ytmp_);
                    k_[0].swap(k_[6]);  // FSAL
                    double fac = ctl_.safety * std::pow(std::max(err, 1e-10), -0.2);
                    fac = std::clamp(fac, ctl_.h_shrink_min, ctl_.h_grow_max);
                    // A boundary-clamped step must not shrink the proposal.
                    h_ = clamped ? std::max(h_, h * fac) : h * fac;
                    break;
                }
                ++stats_.rejected;
                if (++rejects > ctl_.max_rejects_in_row)
                    throw ToleranceError(
                        "ode: repeated step rejection near t = " +
                        std::to_string(t_) +
                        "; try a smaller tolerance or a larger truncation");
                const double fac = std::clamp(
                    ctl_.safety * std::pow(std::max(err, 1e-10), -0.2), 0.1,
                    0.5);
                h *= err > 1.0 ? fac : 0.5;
                if (!(h > 0.0) || t_ + h == t_)
                    throw ToleranceError("ode: step size underflow at t = " +
                                         std::to_string(t_));
            }
        }
    }

private:
    // Classic DP5(4) tableau.
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                            e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;

    double try_step(double h) {
        const std::size_t n = n_;
        auto& k1 = k_[0];
        auto& k2 = k_[1];
        auto& k3 = k_[2];
        auto& k4 = k_[3];
        auto& k5 = k_[4];
        auto& k6 = k_[5];
        auto& k7 = k_[6];

        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * a21 * k1[i];
        rhs_(t_ + c2 * h, ytmp_, k2);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs_(t_ + c3 * h, ytmp_, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs_(t_ + c4 * h, ytmp_, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                                    a54 * k4[i]);
        rhs_(t_ + c5 * h, ytmp_, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                    a64 * k4[i] + a65 * k5[i]);
        rhs_(t_ + h, ytmp_, k6);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                    b5 * k5[i] + b6 * k6[i]);
        rhs_(t_ + h, ytmp_, k7);

        double err_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                  e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = ctl_.abs_tol +
                              ctl_.rel_tol *
                                  std::max(std::abs(y_[i]), std::abs(ytmp_[i]));
            err_norm = std::max(err_norm, std::abs(e) / sc);
        }
        return err_norm;
    }

    double initial_step(double t_end) const {
        double ynorm = 0.0, fnorm = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            ynorm = std::max(ynorm, std::abs(y_[i]));
            fnorm = std::max(fnorm, std::abs(k_[0][i]));
        }
        const double h =
            fnorm > 0.0 ? 0.01 * std::max(ynorm, 1.0) / fnorm : 1e-6;
        return std::min(h, t_end - t_);
    }

    Rhs rhs_;
    Guard guard_;
    std::size_t n_;
    StepControl ctl_;
    double t_ = 0.0;
    double h_ = 0.0;
    bool have_k1_ = false;
    std::vector<double> y_, ytmp_;
    std::vector<double> k_[7];
    OdeStats stats_;
};

}  // namespace subpa
