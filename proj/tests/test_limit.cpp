#include <doctest.h>

#include <cmath>
#include <vector>

#include "homog/limit.hpp"
#include "homog/stats.hpp"

using namespace homog;

TEST_CASE("sample_W: pinned origin, variance and covariance") {
    const int n = 8000;
    std::vector<double> w1(n), w2(n);
    for (int i = 0; i < n; ++i) {
        RngStream rng(stream_key(21, static_cast<std::uint64_t>(i)));
        const WienerPath W = sample_W(3.0, 0.01, rng);
        CHECK(W.value(0.0) == 0.0);
        w1[static_cast<std::size_t>(i)] = W.value(1.0);
        w2[static_cast<std::size_t>(i)] = W.value(2.0);
    }
    const double v1 = variance(w1);
    CHECK(std::abs(v1 - 1.0) <= 3.0 * std::sqrt(2.0 / (n - 1.0)));
    double cov = 0.0;
    const double m1 = mean(w1), m2 = mean(w2);
    for (int i = 0; i < n; ++i)
        cov += (w1[static_cast<std::size_t>(i)] - m1) * (w2[static_cast<std::size_t>(i)] - m2);
    cov /= n - 1;
    CHECK(std::abs(cov - 1.0) <= 3.0 * std::sqrt(3.0 / n));  // Var(W1 W2) ~ 2 min^2 + ...
}

TEST_CASE("two-sided increments are independent across the origin") {
    const int n = 6000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        RngStream rng(stream_key(22, static_cast<std::uint64_t>(i)));
        const WienerPath W = sample_W(2.0, 0.01, rng);
        s += (W.value(1.0) - W.value(0.0)) * (W.value(-1.0) - W.value(0.0));
    }
    CHECK(std::abs(s / n) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("WienerPath integral is the exact antiderivative") {
    RngStream rng(stream_key(23, 0));
    const WienerPath W = sample_W(2.0, 0.05, rng);
    // compare against a fine Riemann sum of the piecewise-linear interp
    const double a = -1.3, b = 1.7;
    double acc = 0.0;
    const int nn = 2000000;
    const double h = (b - a) / nn;
    for (int i = 0; i < nn; ++i) acc += W.value(a + (i + 0.5) * h) * h;
    CHECK(W.integral(b) - W.integral(a) == doctest::Approx(acc).epsilon(1e-8));
}

TEST_CASE("exponent_direct: zero W, single-bin profile, coverage errors") {
    const WienerPath W0 = zero_W(5.0, 0.01);
    LocalTimeProfile L;
    L.delta = 0.02;
    L.first_bin = 10;  // support [0.2, 0.24)
    L.density = {25.0, 25.0};  // t = 1 split over two bins
    CHECK(exponent_direct(L, W0, 0.0, 0.5, 1.6) == 0.0);

    // single-bin mass t/Delta pairs with the local W increment
    RngStream rng(stream_key(24, 0));
    const WienerPath W = sample_W(5.0, 0.01, rng);
    LocalTimeProfile one;
    one.delta = 0.02;
    one.first_bin = 0;
    one.density = {50.0};  // t = 1 concentrated on [0, 0.02)
    const double y = exponent_direct(one, W, 0.0, 0.5, 1.6);
    // dominated by (c_bar) * 50 * (W(0.02) - W(0)) up to interpolation spill
    const double crude = 0.5 * 50.0 * (W.value(0.02) - W.value(0.0));
    CHECK(std::abs(y - crude) <= 0.5 * 50.0 * 0.03 * 5.0);

    LocalTimeProfile wide = one;
    wide.first_bin = -1000;  // support outside the sampled W
    CHECK_THROWS_AS(exponent_direct(wide, W0, 4.9, 0.5, 1.6), std::invalid_argument);
    // delta_W > Delta/2 rejected
    const WienerPath coarse = zero_W(5.0, 0.02);
    CHECK_THROWS_AS(exponent_direct(one, coarse, 0.0, 0.5, 1.6), std::invalid_argument);
}

TEST_CASE("exponent_ito: zero W, constant W telescopes, coverage error") {
    PathConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 1e-3;
    RngStream rng(stream_key(25, 0));
    const Trajectory tr = simulate_limit_path(cfg, 1.6, rng);
    const WienerPath W0 = zero_W(6.0, 0.01);
    CHECK(exponent_ito(tr, W0, 0.0, 0.5, 1.6) == doctest::Approx(0.0));

    // constant W = w on the whole range: spatial and stochastic parts cancel
    WienerPath Wc(-6.0, 0.01, std::vector<double>(1201, 0.7));
    CHECK(exponent_ito(tr, Wc, 0.0, 0.5, 1.6) == doctest::Approx(0.0).epsilon(1e-10));

    const WienerPath tiny = zero_W(0.1, 0.01);
    CHECK_THROWS_AS(exponent_ito(tr, tiny, 0.0, 0.5, 1.6), std::invalid_argument);
}

TEST_CASE("E[Y | W = 0 injected] = 0 exactly, both estimators") {
    PathConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 1e-3;
    const WienerPath W0 = zero_W(6.0, 0.01);
    for (int i = 0; i < 5; ++i) {
        RngStream rng(stream_key(26, static_cast<std::uint64_t>(i)));
        const Trajectory tr = simulate_limit_path(cfg, 1.6, rng);
        CHECK(exponent_ito(tr, W0, 0.0, 0.5, 1.6) == 0.0);
        CHECK(exponent_direct(local_time(tr, 0.02), W0, 0.0, 0.5, 1.6) == 0.0);
    }
}

TEST_CASE("direct and ito estimators approach each other under refinement") {
    // the gap between the two discretizations of the same exponent shrinks
    // as (dt, Delta, delta_W) refine together; the acceptance experiment
    // measures the pinned-budget behaviour
    const double a_bar = 1.6, c_bar = 0.5;
    auto rel_gap = [&](double dt, double delta_bin, double delta_w) {
        double g2 = 0.0, y2 = 0.0;
        for (int i = 0; i < 60; ++i) {
            RngStream wr(stream_key(27, static_cast<std::uint64_t>(i)));
            const WienerPath W = sample_W(8.0, delta_w, wr);
            PathConfig cfg;
            cfg.T = 0.25;
            cfg.dt = dt;
            RngStream pr(stream_key(28, static_cast<std::uint64_t>(i)));
            const Trajectory tr = simulate_limit_path(cfg, a_bar, pr);
            const double yd = exponent_direct(local_time(tr, delta_bin), W, 0.0, c_bar, a_bar);
            const double yi = exponent_ito(tr, W, 0.0, c_bar, a_bar);
            g2 += (yd - yi) * (yd - yi);
            y2 += yi * yi;
        }
        return std::sqrt(g2 / y2);
    };
    const double coarse = rel_gap(1e-3, 0.02, 0.01);
    const double fine = rel_gap(1e-3 / 8.0, 0.02 / 8.0, 0.01 / 8.0);
    CHECK(fine < coarse);
    CHECK(coarse / fine > 1.15);
    CHECK(fine < 0.5);
}

TEST_CASE("u_limit: zero W reproduces the heat value; g = 0 gives 0") {
    const double a_bar = 1.6, c_bar = 0.5, t = 0.5, x = 0.3;
    const WienerPath W0 = zero_W(8.0, 0.01);
    LimitMcConfig mc;
    mc.n_paths = 4000;
    auto g = [](double y) { return std::exp(-y * y); };
    const LimitSample s = u_limit(W0, t, x, g, a_bar, c_bar, mc, stream_key(29, 0));
    const double vt = a_bar * t;
    const double exact = std::exp(-x * x / (1.0 + 2.0 * vt)) / std::sqrt(1.0 + 2.0 * vt);
    CHECK(std::abs(s.u - exact) <= 3.0 * s.se);

    auto zero = [](double) { return 0.0; };
    const LimitSample z = u_limit(W0, t, x, zero, a_bar, c_bar, mc, stream_key(29, 1));
    CHECK(z.u == 0.0);
    CHECK(z.se == 0.0);
}

TEST_CASE("u_limit_law: zero c_bar degenerates; Jensen pushes the mean above") {
    const double a_bar = 1.6, t = 0.5, x = 0.0;
    auto one = [](double) { return 1.0; };
    LimitMcConfig mc;
    mc.n_paths = 300;
    // c_bar = 0: every sample equals 1 exactly (g = 1, exponent off)
    const auto degen = u_limit_law(t, x, one, a_bar, 0.0, 12, 8.0, 0.01, mc,
                                   stream_key(30, 0), 2);
    for (const auto& s : degen) CHECK(s.u == doctest::Approx(1.0));

    // c_bar > 0, g = 1: E over W of inner mean of e^Y exceeds 1 (convexity)
    mc.n_paths = 400;
    const auto law = u_limit_law(t, x, one, a_bar, 0.5, 400, 8.0, 0.01, mc,
                                 stream_key(30, 1), 2);
    std::vector<double> us;
    for (const auto& s : law) us.push_back(s.u);
    const double m = mean(us);
    CHECK(m > 1.0 + 2.0 * std::sqrt(variance(us) / static_cast<double>(us.size())));
}

TEST_CASE("u_limit_law is invariant under a joint shift of x and g") {
    const double a_bar = 1.6, c_bar = 0.5, t = 0.5;
    LimitMcConfig mc;
    mc.n_paths = 400;
    auto g0 = [](double y) { return std::exp(-y * y); };
    auto g1 = [](double y) { return std::exp(-(y - 0.7) * (y - 0.7)); };
    const auto a = u_limit_law(t, 0.0, g0, a_bar, c_bar, 150, 9.0, 0.01, mc,
                               stream_key(31, 0), 2);
    const auto b = u_limit_law(t, 0.7, g1, a_bar, c_bar, 150, 9.0, 0.01, mc,
                               stream_key(31, 1), 2);
    std::vector<double> ua, ub;
    for (const auto& s : a) ua.push_back(s.u);
    for (const auto& s : b) ub.push_back(s.u);
    CHECK(ks_two_sample(ua, ub) <= ks_asymptotic_quantile(0.01, ua.size(), ub.size()));
}
