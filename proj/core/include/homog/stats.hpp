#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "homog/rng.hpp"

namespace homog {

struct TestResult {
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    double ci_level = 0.0, ci_lo = 0.0, ci_hi = 0.0;
};

/// Exact two-sample Kolmogorov-Smirnov statistic (sort-merge sup distance).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS against Normal(mu, var).
double gaussian_fit_ks(std::vector<double> samples, double mu, double var);

double normal_cdf(double x, double mu, double var);

/// Asymptotic two-sample KS null quantile at level alpha:
/// sqrt(-ln(alpha/2)/2) * sqrt((n+m)/(n m)).
double ks_asymptotic_quantile(double alpha, std::size_t n, std::size_t m);

/// Energy distance 2E|a-b| - E|a-a'| - E|b-b'| between samples of
/// `dim`-vectors (rows flattened), Euclidean norm, U-statistic form.
double energy_distance(const std::vector<double>& a, const std::vector<double>& b,
                       std::size_t dim);

/// Energy distance plus a permutation noise floor: the given quantile of the
/// statistic under `n_perm` random label permutations of the pooled samples.
struct EnergyResult {
    double distance = 0.0;
    double null_quantile = 0.0;
};
EnergyResult energy_distance_with_null(const std::vector<double>& a,
                                       const std::vector<double>& b, std::size_t dim,
                                       int n_perm, double quantile, RngStream& rng);

/// Percentile bootstrap confidence interval for statistic(samples).
TestResult bootstrap_ci(const std::vector<double>& samples,
                        const std::function<double(const std::vector<double>&)>& statistic,
                        int n_resamples, double level, RngStream& rng);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased
double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);

}  // namespace homog
