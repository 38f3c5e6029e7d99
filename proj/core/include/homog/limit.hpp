#pragma once

#include <functional>
#include <string>
#include <vector>

#include "homog/paths.hpp"
#include "homog/rng.hpp"

namespace homog {

/// Two-sided sampled Wiener path on a uniform spatial grid, W(0) = 0.
/// integral() is the exact antiderivative of the piecewise-linear
/// interpolation (piecewise quadratic), anchored at the left end.
class WienerPath {
public:
    WienerPath(double y_first, double delta, std::vector<double> values);

    double y_first() const { return y0_; }
    double y_last() const;
    double delta() const { return delta_; }
    std::size_t size() const { return w_.size(); }
    const std::vector<double>& values() const { return w_; }

    bool covers(double lo, double hi) const;
    double value(double y) const;     // linear interpolation; throws off-grid
    double integral(double y) const;  // int_{y_first}^{y} W, exact
    double increment(std::size_t j) const { return w_[j + 1] - w_[j]; }
    double grid_point(std::size_t j) const { return y0_ + static_cast<double>(j) * delta_; }

private:
    double y0_, delta_;
    std::vector<double> w_, iw_;
};

/// Standard two-sided Wiener path over [-range, range]: cumulative sums of
/// independent N(0, delta) increments in both directions from 0.
WienerPath sample_W(double range, double delta, RngStream& rng);
WienerPath zero_W(double range, double delta);  // injected W = 0 (tests)

/// Y = (c_bar/a_bar) int L(y-x) W(dy) with L the semimartingale local time
/// a_bar * L-hat; with the occupation density L-hat stored in
/// LocalTimeProfile this is c_bar * sum L-hat(y_j - x) (W(y_{j+1}) - W(y_j)),
/// a forward Riemann sum on the W grid.
double exponent_direct(const LocalTimeProfile& L, const WienerPath& W, double x, double c_bar,
                       double a_bar);

/// Y = 2 (c_bar/a_bar) [ int_x^{x+X_t} W(y) dy - int_0^t W(x+X_s) dX_s ]
/// for a limit trajectory started at 0; spatial part exact on the W grid,
/// stochastic part a left-point (Ito) sum.
double exponent_ito(const Trajectory& traj, const WienerPath& W, double x, double c_bar,
                    double a_bar);

/// Mollified exponent c_bar int_0^t W_n'(x+X_s) ds along the same path
/// (the Feynman-Kac exponent of the n-mollified PDE).
double exponent_mollified(const Trajectory& traj, const std::vector<double>& grid_x,
                          const std::vector<double>& wn_prime, double x, double c_bar);

enum class ExponentEstimator { direct, ito };

struct LimitSample {
    double t = 0.0, x = 0.0;
    double u = 0.0;   // mean of g(x + X_t) e^Y over inner paths
    double se = 0.0;
    ExponentEstimator estimator = ExponentEstimator::ito;
    int n_paths = 0;
};

struct LimitMcConfig {
    int n_paths = 2000;
    double dt = 1e-3;
    double delta_bin = 0.02;   // local-time bin width (direct estimator)
    ExponentEstimator estimator = ExponentEstimator::ito;
};

/// E over inner Brownian paths of g(x + X_t) e^Y, W frozen.
LimitSample u_limit(const WienerPath& W, double t, double x,
                    const std::function<double(double)>& g, double a_bar, double c_bar,
                    const LimitMcConfig& mc, std::uint64_t path_key);

/// One u estimate per independent W draw: the sampled law of u(t,x) over W.
std::vector<LimitSample> u_limit_law(double t, double x, const std::function<double(double)>& g,
                                     double a_bar, double c_bar, int n_w, double w_range,
                                     double delta_w, const LimitMcConfig& mc,
                                     std::uint64_t seed, int workers = 1);

}  // namespace homog
