#include "homog/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace homog {

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double cdf_a = 0.0, cdf_b = 0.0, d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) cdf_a = static_cast<double>(++i) / na;
        while (j < b.size() && b[j] <= x) cdf_b = static_cast<double>(++j) / nb;
        d = std::max(d, std::abs(cdf_a - cdf_b));
    }
    return d;  // once one sample is exhausted the gap can only shrink
}

double normal_cdf(double x, double mu, double var) {
    return 0.5 * std::erfc(-(x - mu) / std::sqrt(2.0 * var));
}

double gaussian_fit_ks(std::vector<double> samples, double mu, double var) {
    if (samples.size() < 2) throw std::invalid_argument("gaussian_fit_ks: degenerate sample");
    if (!(var > 0.0)) throw std::invalid_argument("gaussian_fit_ks: variance must be positive");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = normal_cdf(samples[i], mu, var);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double ks_asymptotic_quantile(double alpha, std::size_t n, std::size_t m) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c * std::sqrt(static_cast<double>(n + m) /
                         (static_cast<double>(n) * static_cast<double>(m)));
}

namespace {

double euclid(const double* p, const double* q, std::size_t dim) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = p[k] - q[k];
        s += d * d;
    }
    return std::sqrt(s);
}

// energy distance from a precomputed pooled distance matrix and an index
// split; uses sab = S_all - saa - sbb to halve the pair loops. Plug-in
// (empirical-measure) form: nonnegative, zero iff the empirical
// distributions coincide.
double energy_from_matrix(const std::vector<double>& dist, double s_all, std::size_t total,
                          const std::vector<std::size_t>& idx, std::size_t na) {
    const std::size_t nb = total - na;
    double saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = i + 1; j < na; ++j) saa += dist[idx[i] * total + idx[j]];
    for (std::size_t i = na; i < total; ++i)
        for (std::size_t j = i + 1; j < total; ++j) sbb += dist[idx[i] * total + idx[j]];
    const double sab = s_all - saa - sbb;
    const double da = static_cast<double>(na), db = static_cast<double>(nb);
    return 2.0 * sab / (da * db) - 2.0 * saa / (da * da) - 2.0 * sbb / (db * db);
}

}  // namespace

double energy_distance(const std::vector<double>& a, const std::vector<double>& b,
                       std::size_t dim) {
    if (dim == 0 || a.size() % dim != 0 || b.size() % dim != 0)
        throw std::invalid_argument("energy_distance: dimension mismatch");
    const std::size_t na = a.size() / dim, nb = b.size() / dim;
    if (na < 2 || nb < 2) throw std::invalid_argument("energy_distance: need >= 2 per sample");
    // plug-in form over the empirical measures: nonnegative, zero iff the
    // empirical distributions coincide
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) sab += euclid(&a[i * dim], &b[j * dim], dim);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = i + 1; j < na; ++j) saa += euclid(&a[i * dim], &a[j * dim], dim);
    for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = i + 1; j < nb; ++j) sbb += euclid(&b[i * dim], &b[j * dim], dim);
    const double da = static_cast<double>(na), db = static_cast<double>(nb);
    return 2.0 * sab / (da * db) - 2.0 * saa / (da * da) - 2.0 * sbb / (db * db);
}

EnergyResult energy_distance_with_null(const std::vector<double>& a,
                                       const std::vector<double>& b, std::size_t dim,
                                       int n_perm, double q, RngStream& rng) {
    EnergyResult out;
    out.distance = energy_distance(a, b, dim);
    const std::size_t na = a.size() / dim, nb = b.size() / dim;
    const std::size_t total = na + nb;
    std::vector<double> pool(a);
    pool.insert(pool.end(), b.begin(), b.end());
    std::vector<double> dist(total * total, 0.0);
    double s_all = 0.0;
    for (std::size_t i = 0; i < total; ++i)
        for (std::size_t j = i + 1; j < total; ++j) {
            const double d = euclid(&pool[i * dim], &pool[j * dim], dim);
            dist[i * total + j] = d;
            dist[j * total + i] = d;
            s_all += d;
        }
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<double> nulls(static_cast<std::size_t>(n_perm));
    for (int p = 0; p < n_perm; ++p) {
        for (std::size_t i = total - 1; i > 0; --i) {  // Fisher-Yates
            const auto j = static_cast<std::size_t>(rng.next_double() * static_cast<double>(i + 1));
            std::swap(idx[i], idx[std::min(j, i)]);
        }
        nulls[static_cast<std::size_t>(p)] = energy_from_matrix(dist, s_all, total, idx, na);
    }
    out.null_quantile = quantile(std::move(nulls), q);
    return out;
}

TestResult bootstrap_ci(const std::vector<double>& samples,
                        const std::function<double(const std::vector<double>&)>& statistic,
                        int n_resamples, double level, RngStream& rng) {
    if (samples.size() < 2) throw std::invalid_argument("bootstrap_ci: degenerate sample");
    if (n_resamples < 100) throw std::invalid_argument("bootstrap_ci: need >= 100 resamples");
    std::vector<double> stats(static_cast<std::size_t>(n_resamples));
    std::vector<double> resample(samples.size());
    for (int b = 0; b < n_resamples; ++b) {
        for (auto& v : resample) {
            const auto j =
                static_cast<std::size_t>(rng.next_double() * static_cast<double>(samples.size()));
            v = samples[std::min(j, samples.size() - 1)];
        }
        stats[static_cast<std::size_t>(b)] = statistic(resample);
    }
    TestResult r;
    r.statistic = statistic(samples);
    r.ci_level = level;
    const double tail = 0.5 * (1.0 - level);
    std::vector<double> tmp = stats;
    r.ci_lo = quantile(tmp, tail);
    r.ci_hi = quantile(std::move(stats), 1.0 - tail);
    r.pass = true;
    return r;
}

double mean(const std::vector<double>& v) {
    double s = 0.0, c = 0.0;  // Kahan; reductions must not depend on chunking
    for (double x : v) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (static_cast<double>(v.size()) - 1.0);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * (static_cast<double>(v.size()) - 1.0);
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(i);
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

}  // namespace homog
