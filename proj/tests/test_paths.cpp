#include <doctest.h>

#include <cmath>
#include <vector>

#include "homog/field.hpp"
#include "homog/paths.hpp"
#include "homog/stats.hpp"

using namespace homog;

namespace {

FieldSpec two_point_spec(double lo = 1.0, double hi = 4.0, double p = 0.5, double sigma = 0.5) {
    FieldSpec s;
    s.a_lo = lo;
    s.a_hi = hi;
    s.a_p = p;
    s.sigma = sigma;
    return s;
}

}  // namespace

TEST_CASE("step bound is enforced") {
    PathConfig cfg;
    cfg.eps = 0.1;
    cfg.dt = 1e-3;  // far above c_dt eps^2 / a_hi
    FieldRealization f(two_point_spec(), 1);
    RngStream rng(stream_key(1, 1));
    CHECK_THROWS_AS(simulate_quenched(f, cfg, 1.6, rng), std::invalid_argument);
    cfg.eps = 0.0;
    cfg.dt = 0.01;
    CHECK_THROWS_AS(simulate_limit_path(cfg, 1.6, rng), std::invalid_argument);
}

TEST_CASE("psi is increasing, bracketed, and inverts to 1e-10") {
    const FieldSpec s = two_point_spec();
    FieldRealization f(s, 11);
    const double a_bar = effective_a(s);
    QuenchedStepper st(f, 0.1, a_bar, 0.0);
    double prev = st.psi(-3.0);
    for (double x = -3.0 + 0.05; x <= 3.0; x += 0.05) {
        const double cur = st.psi(x);
        CHECK(cur > prev);
        const double slope = (cur - prev) / 0.05;
        CHECK(slope >= a_bar / s.a_hi - 1e-9);
        CHECK(slope <= a_bar / s.a_lo + 1e-9);
        prev = cur;
    }
    for (double x : {-2.31, -0.333, 0.0, 0.77, 1.999}) {
        const double z = st.psi(x);
        CHECK(std::abs(st.psi_inverse(z, x + 0.3) - x) <= 1e-10);
    }
}

TEST_CASE("exact cell inversion agrees with bisection along a path") {
    const FieldSpec s = two_point_spec();
    FieldRealization f(s, 23);
    const double a_bar = effective_a(s);
    const double eps = 0.2;
    QuenchedStepper st(f, eps, a_bar, 0.1);
    RngStream rng(stream_key(2, 9));
    const double dt = PathConfig{eps, 0.1, 1.0, 1e-4}.dt_max(s.a_hi);
    double x_prev = st.x();
    for (int k = 0; k < 2000; ++k) {
        st.step(dt, rng);
        const double via_bisect = st.psi_inverse(st.z(), x_prev);
        CHECK(std::abs(st.x() - via_bisect) <= 1e-9);
        x_prev = st.x();
    }
}

TEST_CASE("constant medium reduces to Brownian motion with variance a_bar t") {
    const FieldSpec s = two_point_spec(2.0, 2.0, 0.5, 0.0);
    FieldRealization f(s, 3);
    PathConfig cfg;
    cfg.eps = 0.1;
    cfg.T = 1.0;
    cfg.dt = cfg.dt_max(2.0);
    const int n = 4000;
    std::vector<double> ends(n);
    for (int i = 0; i < n; ++i) {
        RngStream rng(stream_key(7, static_cast<std::uint64_t>(i)));
        ends[static_cast<std::size_t>(i)] = simulate_quenched(f, cfg, 2.0, rng).X.back();
    }
    const double v = variance(ends);
    const double se = 2.0 * std::sqrt(2.0 / (n - 1.0));
    CHECK(std::abs(v - 2.0) <= 3.0 * se);
    CHECK(std::abs(mean(ends)) <= 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("limit path marginals: variance and half-normal mean") {
    PathConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 1e-3;
    cfg.x0 = 0.25;
    const double a_bar = 1.6;
    const int n = 20000;
    std::vector<double> ends(n), absdev(n);
    for (int i = 0; i < n; ++i) {
        RngStream rng(stream_key(8, static_cast<std::uint64_t>(i)));
        const double xt = simulate_limit_path(cfg, a_bar, rng).X.back();
        ends[static_cast<std::size_t>(i)] = xt;
        absdev[static_cast<std::size_t>(i)] = std::abs(xt - cfg.x0);
    }
    const double vt = a_bar * cfg.T;
    CHECK(std::abs(variance(ends) - vt) <= 3.0 * vt * std::sqrt(2.0 / (n - 1.0)));
    // E|X_T - x0| = sqrt(2 a_bar T / pi)
    const double half_normal = std::sqrt(2.0 * vt / 3.14159265358979323846);
    const double se = std::sqrt(variance(absdev) / n);
    CHECK(std::abs(mean(absdev) - half_normal) <= 3.0 * se);
}

TEST_CASE("limit path law does not depend on dt (grid marginals exact)") {
    const double a_bar = 1.0;
    const int n = 4000;
    std::vector<double> coarse(n), fine(n);
    for (int i = 0; i < n; ++i) {
        PathConfig cfg;
        cfg.T = 1.0;
        RngStream r1(stream_key(9, static_cast<std::uint64_t>(i)));
        RngStream r2(stream_key(10, static_cast<std::uint64_t>(i)));
        cfg.dt = 1e-3;
        coarse[static_cast<std::size_t>(i)] = simulate_limit_path(cfg, a_bar, r1).X.back();
        cfg.dt = 1e-4;
        fine[static_cast<std::size_t>(i)] = simulate_limit_path(cfg, a_bar, r2).X.back();
    }
    CHECK(ks_two_sample(coarse, fine) <= ks_asymptotic_quantile(0.01, n, n));
}

TEST_CASE("local time: frozen path, mass, and positivity") {
    Trajectory tr;
    tr.eps = 0.0;
    tr.dt = 0.01;
    tr.x0 = 0.737;
    tr.X.assign(101, 0.737);  // zero-noise path
    tr.dB.assign(100, 0.0);
    const double delta = 0.05;
    const LocalTimeProfile L = local_time(tr, delta);
    CHECK(L.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    int nonzero = 0;
    for (double v : L.density) {
        CHECK(v >= 0.0);
        if (v > 0) ++nonzero;
    }
    CHECK(nonzero == 1);
    double peak = 0.0;
    for (double v : L.density) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(1.0 / delta));
}

TEST_CASE("local time mass equals elapsed time for random paths") {
    PathConfig cfg;
    cfg.T = 0.5;
    cfg.dt = 1e-3;
    RngStream rng(stream_key(11, 0));
    const Trajectory tr = simulate_limit_path(cfg, 1.6, rng);
    const LocalTimeProfile L = local_time(tr, 0.02);
    CHECK(std::abs(L.total_mass() - 0.5) <= cfg.dt);
}

TEST_CASE("occupation formula error shrinks under (delta, dt) refinement") {
    auto occupation_gap = [](double dt, double delta) {
        PathConfig cfg;
        cfg.T = 0.5;
        cfg.dt = dt;
        RngStream rng(stream_key(12, 31));
        const Trajectory tr = simulate_limit_path(cfg, 1.6, rng);
        auto g = [](double y) {
            const double z = (y - 0.2) / 0.25;
            return std::exp(-0.5 * z * z);
        };
        double direct = 0.0;
        for (std::size_t k = 0; k + 1 < tr.X.size(); ++k) direct += g(tr.X[k]) * dt;
        const LocalTimeProfile L = local_time(tr, delta);
        double via = 0.0;
        for (std::size_t i = 0; i < L.density.size(); ++i)
            via += g(L.bin_center(i)) * L.density[i] * delta;
        return std::abs(direct - via) / direct;
    };
    const double coarse = occupation_gap(1e-3, 4e-2);
    const double fine = occupation_gap(5e-4, 2e-2);
    const double finest = occupation_gap(2.5e-4, 1e-2);
    CHECK(fine < coarse);
    CHECK(finest < fine);
    // empirical order >= 0.5 in the bin width across the two halvings
    CHECK(coarse / finest >= std::pow(4.0, 0.5) * 0.8);
}

TEST_CASE("h_eps: constant medium, monotone, bounded") {
    const FieldSpec s = two_point_spec(2.0, 2.0, 0.5, 0.0);
    FieldRealization f(s, 5);
    PathConfig cfg;
    cfg.eps = 0.2;
    cfg.T = 0.5;
    cfg.dt = cfg.dt_max(2.0);
    RngStream rng(stream_key(13, 0));
    const Trajectory tr = simulate_quenched(f, cfg, 2.0, rng);
    const auto h = h_eps(tr, f);
    CHECK(h.back() == doctest::Approx(0.5 / 2.0).epsilon(1e-9));
    for (std::size_t k = 1; k < h.size(); ++k) CHECK(h[k] >= h[k - 1]);

    const FieldSpec s2 = two_point_spec();
    FieldRealization f2(s2, 6);
    RngStream rng2(stream_key(13, 1));
    PathConfig cfg2 = cfg;
    cfg2.dt = cfg2.dt_max(s2.a_hi);
    const Trajectory tr2 = simulate_quenched(f2, cfg2, effective_a(s2), rng2);
    const auto h2 = h_eps(tr2, f2);
    for (std::size_t k = 0; k < h2.size(); ++k) {
        const double t = cfg2.dt * static_cast<double>(k);
        CHECK(h2[k] >= t / s2.a_hi - 1e-12);
        CHECK(h2[k] <= t / s2.a_lo + 1e-12);
    }
}

TEST_CASE("exponent estimators: zero potential and frozen-path value") {
    const FieldSpec z = two_point_spec(1.0, 4.0, 0.5, 0.0);
    FieldRealization f(z, 7);
    PathConfig cfg;
    cfg.eps = 0.2;
    cfg.T = 0.25;
    cfg.dt = cfg.dt_max(4.0);
    RngStream rng(stream_key(14, 0));
    const Trajectory tr = simulate_quenched(f, cfg, effective_a(z), rng);
    CHECK(y_eps_direct(tr, f) == 0.0);
    CHECK(y_eps_identity(tr, f, effective_a(z), 1.0) == doctest::Approx(0.0).epsilon(1e-12));

    // frozen path: Y = (t / sqrt(eps)) c(x0/eps)
    Trajectory frozen;
    frozen.eps = 0.2;
    frozen.dt = 0.01;
    frozen.x0 = 0.3;
    frozen.X.assign(26, 0.3);
    frozen.Z.assign(26, 0.0);
    frozen.dB.assign(25, 0.0);
    const FieldSpec s = two_point_spec();
    FieldRealization g(s, 8);
    const double want = 0.25 / std::sqrt(0.2) * g.eval_c(0.3 / 0.2);
    CHECK(y_eps_direct(frozen, g) == doctest::Approx(want));
}

TEST_CASE("quenched exponent: identity and direct routes approach each other") {
    const FieldSpec s = two_point_spec();
    FieldRealization f(s, 77);
    const double a_bar = effective_a(s);
    const double c_bar = effective_coefficients(s).c_bar();
    const double eps = 0.2;
    PathConfig cfg;
    cfg.eps = eps;
    cfg.T = 0.25;

    auto rms_rel = [&](double dt) {
        cfg.dt = dt;
        double g2 = 0.0, y2 = 0.0;
        for (int i = 0; i < 60; ++i) {
            RngStream rng(stream_key(15, static_cast<std::uint64_t>(i)));
            const Trajectory tr = simulate_quenched(f, cfg, a_bar, rng);
            const double yd = y_eps_direct(tr, f);
            const double yi = y_eps_identity(tr, f, a_bar, c_bar);
            g2 += (yd - yi) * (yd - yi);
            y2 += yi * yi;
        }
        return std::sqrt(g2 / y2);
    };
    const double dt0 = cfg.dt_max(s.a_hi);
    const double at0 = rms_rel(dt0);
    const double at1 = rms_rel(dt0 / 4.0);
    CHECK(at1 < at0);
    CHECK(at0 / at1 >= 1.5);  // ~sqrt(dt) rate over a 4x refinement
}

TEST_CASE("feynman_kac_u_eps: trivial potential and the Gaussian closed form") {
    const FieldSpec unit = two_point_spec(1.0, 1.0, 0.5, 0.0);
    FieldRealization f(unit, 9);
    auto one = [](double) { return 1.0; };
    const FkEstimate triv = feynman_kac_u_eps(f, 0.5, 0.3, 0.0, one, 50, stream_key(16, 0));
    CHECK(triv.value == doctest::Approx(1.0));
    CHECK(triv.se == doctest::Approx(0.0));

    // a = 1, c = 0, g = exp(-x^2): E g(x + B_t) = exp(-x^2/(1+2t))/sqrt(1+2t)
    auto g = [](double y) { return std::exp(-y * y); };
    const double t = 0.5, x = 0.3;
    const FkEstimate est = feynman_kac_u_eps(f, 0.5, t, x, g, 4000, stream_key(16, 1));
    const double exact = std::exp(-x * x / (1.0 + 2.0 * t)) / std::sqrt(1.0 + 2.0 * t);
    CHECK(std::abs(est.value - exact) <= 3.0 * est.se + 1e-3);
    CHECK(est.max_share > 0.0);
    CHECK(est.max_share < 0.01);
}

TEST_CASE("gaussian tail exceedance: fitted log-slope vs r^2 is negative") {
    const FieldSpec s = two_point_spec();
    FieldRealization f(s, 99);
    const double a_bar = effective_a(s);
    PathConfig cfg;
    cfg.eps = 0.2;
    cfg.T = 0.5;
    cfg.dt = cfg.dt_max(s.a_hi);
    const int n = 600;
    std::vector<double> sups(n);
    for (int i = 0; i < n; ++i) {
        RngStream rng(stream_key(17, static_cast<std::uint64_t>(i)));
        QuenchedStepper st(f, cfg.eps, a_bar, 0.0);
        double sup = 0.0;
        const auto nsteps = static_cast<std::size_t>(cfg.T / cfg.dt);
        for (std::size_t k = 0; k < nsteps; ++k) {
            st.step(cfg.dt, rng);
            sup = std::max(sup, std::abs(st.x()));
        }
        sups[static_cast<std::size_t>(i)] = sup;
    }
    // ln P(sup > r) against r^2 at a few levels
    std::vector<double> r2s, lps;
    for (double r : {0.8, 1.2, 1.6}) {
        int count = 0;
        for (double v : sups)
            if (v > r) ++count;
        REQUIRE(count > 0);
        r2s.push_back(r * r);
        lps.push_back(std::log(static_cast<double>(count) / n));
    }
    const double slope = (lps.back() - lps.front()) / (r2s.back() - r2s.front());
    CHECK(slope < 0.0);
}
