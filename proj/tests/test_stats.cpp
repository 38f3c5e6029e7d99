#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "homog/rng.hpp"
#include "homog/stats.hpp"

using namespace homog;

TEST_CASE("two-sample KS basics") {
    CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_two_sample({0, 1, 2}, {10, 11, 12}) == 1.0);
    CHECK(ks_two_sample({1, 2, 3}, {1.5, 2.5, 3.5}) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(ks_two_sample({}, {1.0}), std::invalid_argument);
}

TEST_CASE("KS is symmetric and invariant under monotone transforms") {
    RngStream r(stream_key(5, 1));
    std::vector<double> a(300), b(200);
    for (auto& v : a) v = r.next_normal();
    for (auto& v : b) v = 0.3 + 1.2 * r.next_normal();
    const double d = ks_two_sample(a, b);
    CHECK(ks_two_sample(b, a) == doctest::Approx(d));
    auto mono = [](double x) { return std::exp(0.5 * x) + x; };
    std::vector<double> ta = a, tb = b;
    for (auto& v : ta) v = mono(v);
    for (auto& v : tb) v = mono(v);
    CHECK(ks_two_sample(ta, tb) == doctest::Approx(d));
}

TEST_CASE("one-sample KS against its own quantile grid is <= 1/n") {
    const int n = 500;
    std::vector<double> q(n);
    // quantiles of N(0,1) via bisection on the CDF
    for (int i = 0; i < n; ++i) {
        const double target = (i + 0.5) / n;
        double lo = -10, hi = 10;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (normal_cdf(mid, 0, 1) < target ? lo : hi) = mid;
        }
        q[i] = 0.5 * (lo + hi);
    }
    CHECK(gaussian_fit_ks(q, 0.0, 1.0) <= 1.0 / n + 1e-12);
}

TEST_CASE("N(0,1) sample against N(0,4): KS concentrates at the analytic sup") {
    // analytic sup_x |Phi(x) - Phi(x/2)| at the stationary point
    // phi(x) = phi(x/2)/2, i.e. x = sqrt((8/3) ln 2)
    const double xs = std::sqrt(8.0 / 3.0 * std::log(2.0));
    const double exact = normal_cdf(xs, 0, 1) - normal_cdf(xs, 0, 4);
    CHECK(exact == doctest::Approx(0.1613).epsilon(1e-3));
    // grid-scan oracle confirms it is the global sup
    double scan = 0.0;
    for (double x = -8.0; x <= 8.0; x += 1e-3)
        scan = std::max(scan, std::abs(normal_cdf(x, 0, 1) - normal_cdf(x, 0, 4)));
    CHECK(scan == doctest::Approx(exact).epsilon(1e-6));

    RngStream r(stream_key(5, 2));
    const int n = 10000;
    std::vector<double> sample(n);
    for (auto& v : sample) v = r.next_normal();
    const double ks = gaussian_fit_ks(sample, 0.0, 4.0);
    CHECK(ks > exact - 3.0 * 1.3 / std::sqrt(n));
    CHECK(ks < exact + 3.0 * 1.3 / std::sqrt(n));
}

TEST_CASE("energy distance: identical multisets, brute force, translation") {
    std::vector<double> a = {1, 2, 3, 4, 5};
    CHECK(energy_distance(a, a, 1) == doctest::Approx(0.0));

    // brute-force double-sum oracle on 10 scalar points
    RngStream r(stream_key(5, 3));
    std::vector<double> x(10), y(10);
    for (auto& v : x) v = r.next_normal();
    for (auto& v : y) v = r.next_normal() + 0.5;
    double sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            sab += std::abs(x[i] - y[j]);
            saa += std::abs(x[i] - x[j]);
            sbb += std::abs(y[i] - y[j]);
        }
    const double oracle = 2.0 * sab / 100.0 - saa / 100.0 - sbb / 100.0;
    CHECK(energy_distance(x, y, 1) == doctest::Approx(oracle));

    // far-separated clouds: distance ~ 2 offset
    std::vector<double> z = y;
    for (auto& v : z) v += 1000.0;
    CHECK(energy_distance(y, z, 1) == doctest::Approx(2000.0).epsilon(1e-2));

    CHECK_THROWS_AS(energy_distance(x, y, 3), std::invalid_argument);
}

TEST_CASE("energy distance is nonnegative across random same-law samples") {
    RngStream r(stream_key(5, 4));
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> a(40 * 2), b(60 * 2);
        for (auto& v : a) v = r.next_normal();
        for (auto& v : b) v = r.next_normal();
        CHECK(energy_distance(a, b, 2) >= 0.0);
        // shifted clouds strictly positive
        std::vector<double> c = b;
        for (auto& v : c) v += 2.0;
        CHECK(energy_distance(a, c, 2) > 0.5);
    }
}

TEST_CASE("permutation noise floor brackets the same-law statistic") {
    RngStream r(stream_key(5, 5));
    std::vector<double> a(200), b(200);
    for (auto& v : a) v = r.next_normal();
    for (auto& v : b) v = r.next_normal();
    RngStream pr(stream_key(5, 6));
    const EnergyResult res = energy_distance_with_null(a, b, 1, 100, 0.95, pr);
    CHECK(res.null_quantile > 0.0);
    CHECK(res.distance <= 1.5 * res.null_quantile);  // same law: inside the floor
}

TEST_CASE("bootstrap CI: constant sample gives a zero-width interval") {
    std::vector<double> c(50, 3.25);
    RngStream r(stream_key(5, 7));
    const TestResult t = bootstrap_ci(
        c, [](const std::vector<double>& v) { return mean(v); }, 200, 0.95, r);
    CHECK(t.ci_lo == 3.25);
    CHECK(t.ci_hi == 3.25);
    CHECK(t.statistic == 3.25);
}

TEST_CASE("bootstrap CI covers the mean of a normal sample") {
    RngStream r(stream_key(5, 8));
    std::vector<double> xs(400);
    for (auto& v : xs) v = 2.0 + r.next_normal();
    const TestResult t = bootstrap_ci(
        xs, [](const std::vector<double>& v) { return mean(v); }, 500, 0.99, r);
    CHECK(t.ci_lo < 2.0);
    CHECK(t.ci_hi > 2.0);
    CHECK(t.ci_hi - t.ci_lo < 0.5);
}

TEST_CASE("ks_asymptotic_quantile matches the closed form") {
    CHECK(ks_asymptotic_quantile(0.01, 2000, 500) ==
          doctest::Approx(std::sqrt(-0.5 * std::log(0.005)) * std::sqrt(2500.0 / 1e6)));
}

TEST_CASE("quantile and median helpers") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.0) == 1.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 1.0) == 4.0);
    CHECK(quantile({0.0, 10.0}, 0.25) == doctest::Approx(2.5));
}
