#include <cmath>
#include <cstring>

#include "doctest.h"
#include "subpa/errors.hpp"
#include "subpa/weight_function.hpp"

using namespace subpa;

TEST_CASE("power weights evaluate k^kappa") {
    CHECK(WeightFunction::power(0.0)(7) == doctest::Approx(1.0));
    CHECK(WeightFunction::power(0.5)(4) == doctest::Approx(2.0));
    CHECK(WeightFunction::power(-1.0)(4) == doctest::Approx(0.25));
}

TEST_CASE("power weights require kappa < 1") {
    CHECK_THROWS_AS(WeightFunction::power(1.0), ConfigError);
    CHECK_THROWS_AS(WeightFunction::power(1.5), ConfigError);
    CHECK_NOTHROW(WeightFunction::power(0.999));
}

TEST_CASE("eval is pure: repeated calls agree bitwise") {
    const WeightFunction w = WeightFunction::power(0.37);
    for (int k : {1, 2, 17, 1000, 999983}) {
        const double a = w(k);
        const double b = w(k);
        CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    }
}

TEST_CASE("log w(k) = kappa log k to relative 1e-12 up to 1e6") {
    for (double kappa : {-0.5, 0.3, 0.9}) {
        const WeightFunction w = WeightFunction::power(kappa);
        for (int k : {2, 10, 541, 65536, 1000000}) {
            const double lhs = std::log(w(k));
            const double rhs = kappa * std::log(double(k));
            CHECK(std::abs(lhs - rhs) <=
                  1e-12 * std::max(1.0, std::abs(rhs)));
        }
    }
}

TEST_CASE("certification of power(0) over 1000 probes") {
    const WeightFunction w = WeightFunction::power(0.0);
    const SublinearityCertificate cert = w.certify(1000);
    CHECK(cert.linear_ratio_bound == doctest::Approx(1.0));
    // Last tenth of the probe starts at k = 901, where 1/k peaks.
    CHECK(cert.ratio_tail == doctest::Approx(1.0 / 901).epsilon(1e-12));
    CHECK(cert.tail_monotone);
}

TEST_CASE("certification of power(0.5) attains the bound at k = 1") {
    const SublinearityCertificate cert =
        WeightFunction::power(0.5).certify(10000);
    CHECK(cert.linear_ratio_bound == doctest::Approx(1.0));
    CHECK(cert.tail_monotone);
}

TEST_CASE("certification rejects short probes") {
    CHECK_THROWS_AS(WeightFunction::power(0.0).certify(99), ConfigError);
}

TEST_CASE("a superlinear custom closure fails the tail check") {
    const WeightFunction w =
        WeightFunction::custom([](int k) { return double(k) * double(k); });
    CHECK_FALSE(w.certify(1000).ok());
}

TEST_CASE("custom closures must stay positive") {
    // Caught at construction when the default probe reaches the bad value.
    CHECK_THROWS_AS(
        WeightFunction::custom([](int k) { return k < 5 ? 1.0 : 0.0; }),
        ConfigError);
    // Caught at evaluation when the bad value sits past the probe range.
    const WeightFunction w = WeightFunction::custom(
        [](int k) { return k <= 2000 ? 1.0 : 0.0; });
    CHECK(w(2000) == doctest::Approx(1.0));
    CHECK_THROWS_AS(w(2001), ConfigError);
}

TEST_CASE("table weights extend with the terminal slope") {
    const WeightFunction w = WeightFunction::table({1.0, 1.2, 1.3});
    CHECK(w(2) == doctest::Approx(1.2));
    // Beyond the table: w(k) = v_m (k/m)^slope with the slope from the last
    // two entries, so w stays a sublinear power law.
    const double slope = std::log(1.3 / 1.2) / std::log(3.0 / 2.0);
    CHECK(w(30) == doctest::Approx(1.3 * std::pow(10.0, slope)));
    CHECK(w.certify(1000).ok());
}

TEST_CASE("tables implying a linear tail are rejected") {
    CHECK_THROWS_AS(WeightFunction::table({1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(WeightFunction::table({1.0, -1.0}), ConfigError);
    CHECK_THROWS_AS(WeightFunction::table({}), ConfigError);
}

TEST_CASE("single-entry tables extend as a constant") {
    const WeightFunction w = WeightFunction::table({2.5});
    CHECK(w(1) == doctest::Approx(2.5));
    CHECK(w(100) == doctest::Approx(2.5));
}
