#include "homog/limit.hpp"

#include <cmath>
#include <stdexcept>

#include "homog/parallel.hpp"

namespace homog {

namespace {
constexpr std::uint64_t kTagWDraw = 0xD1CEull;
constexpr std::uint64_t kTagInnerPath = 0xBEEFull;
}  // namespace

WienerPath::WienerPath(double y_first, double delta, std::vector<double> values)
    : y0_(y_first), delta_(delta), w_(std::move(values)) {
    if (!(delta_ > 0.0) || w_.size() < 2)
        throw std::invalid_argument("WienerPath: need delta > 0 and >= 2 grid values");
    iw_.resize(w_.size());
    iw_[0] = 0.0;
    for (std::size_t j = 0; j + 1 < w_.size(); ++j)
        iw_[j + 1] = iw_[j] + 0.5 * (w_[j] + w_[j + 1]) * delta_;
}

double WienerPath::y_last() const {
    return y0_ + static_cast<double>(w_.size() - 1) * delta_;
}

bool WienerPath::covers(double lo, double hi) const { return lo >= y0_ && hi <= y_last(); }

double WienerPath::value(double y) const {
    const double pos = (y - y0_) / delta_;
    if (pos < -1e-9 || pos > static_cast<double>(w_.size() - 1) + 1e-9)
        throw std::out_of_range("WienerPath::value: point outside the sampled range");
    const auto j = std::min(static_cast<std::size_t>(std::max(0.0, pos)), w_.size() - 2);
    const double f = pos - static_cast<double>(j);
    return w_[j] * (1.0 - f) + w_[j + 1] * f;
}

double WienerPath::integral(double y) const {
    const double pos = (y - y0_) / delta_;
    if (pos < -1e-9 || pos > static_cast<double>(w_.size() - 1) + 1e-9)
        throw std::out_of_range("WienerPath::integral: point outside the sampled range");
    const auto j = std::min(static_cast<std::size_t>(std::max(0.0, pos)), w_.size() - 2);
    const double d = (pos - static_cast<double>(j)) * delta_;
    const double slope = (w_[j + 1] - w_[j]) / delta_;
    return iw_[j] + w_[j] * d + 0.5 * slope * d * d;
}

WienerPath sample_W(double range, double delta, RngStream& rng) {
    if (!(range > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("sample_W: need range, delta > 0");
    const auto half = static_cast<std::size_t>(std::ceil(range / delta));
    const double sq = std::sqrt(delta);
    std::vector<double> w(2 * half + 1);
    w[half] = 0.0;  // grid point at y = 0 exactly
    for (std::size_t j = half; j + 1 < w.size(); ++j) w[j + 1] = w[j] + sq * rng.next_normal();
    for (std::size_t j = half; j > 0; --j) w[j - 1] = w[j] + sq * rng.next_normal();
    return WienerPath(-static_cast<double>(half) * delta, delta, std::move(w));
}

WienerPath zero_W(double range, double delta) {
    const auto half = static_cast<std::size_t>(std::ceil(range / delta));
    return WienerPath(-static_cast<double>(half) * delta, delta,
                      std::vector<double>(2 * half + 1, 0.0));
}

double exponent_direct(const LocalTimeProfile& L, const WienerPath& W, double x, double c_bar,
                       double a_bar) {
    if (!(W.delta() <= 0.5 * L.delta + 1e-12))
        throw std::invalid_argument("exponent_direct: need delta_W <= Delta/2");
    if (!W.covers(L.support_lo() + x, L.support_hi() + x))
        throw std::invalid_argument(
            "exponent_direct: W grid does not cover the local-time support");
    // (c_bar/a_bar) sum (a_bar Lhat)(y_j - x) dW_j, forward Riemann on the W grid
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < W.size(); ++j) {
        const double lhat = L.value_at(W.grid_point(j) - x);
        if (lhat != 0.0) s += a_bar * lhat * W.increment(j);
    }
    return c_bar / a_bar * s;
}

double exponent_ito(const Trajectory& traj, const WienerPath& W, double x, double c_bar,
                    double a_bar) {
    if (traj.eps != 0.0) throw std::invalid_argument("exponent_ito: limit trajectory required");
    double lo = traj.X[0], hi = traj.X[0];
    for (double v : traj.X) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!W.covers(lo + x, hi + x))
        throw std::invalid_argument("exponent_ito: W grid does not cover the path range");
    const double spatial = W.integral(x + traj.X.back()) - W.integral(x + traj.X.front());
    double sto = 0.0, comp = 0.0;
    for (std::size_t k = 0; k + 1 < traj.X.size(); ++k) {
        const double y = W.value(x + traj.X[k]) * (traj.X[k + 1] - traj.X[k]) - comp;
        const double t = sto + y;
        comp = (t - sto) - y;
        sto = t;
    }
    return 2.0 * c_bar / a_bar * (spatial - sto);
}

double exponent_mollified(const Trajectory& traj, const std::vector<double>& grid_x,
                          const std::vector<double>& wn_prime, double x, double c_bar) {
    if (traj.eps != 0.0)
        throw std::invalid_argument("exponent_mollified: limit trajectory required");
    const double x0 = grid_x.front();
    const double h = grid_x[1] - grid_x[0];
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < traj.X.size(); ++k) {
        const double pos = (x + traj.X[k] - x0) / h;
        if (pos < 0.0 || pos > static_cast<double>(grid_x.size() - 1))
            throw std::out_of_range("exponent_mollified: path left the potential grid");
        const auto j = std::min(static_cast<std::size_t>(pos), grid_x.size() - 2);
        const double f = pos - static_cast<double>(j);
        s += (wn_prime[j] * (1.0 - f) + wn_prime[j + 1] * f) * traj.dt;
    }
    return c_bar * s;
}

LimitSample u_limit(const WienerPath& W, double t, double x,
                    const std::function<double(double)>& g, double a_bar, double c_bar,
                    const LimitMcConfig& mc, std::uint64_t path_key) {
    if (mc.n_paths < 1) throw std::invalid_argument("u_limit: need n_paths >= 1");
    PathConfig cfg;
    cfg.eps = 0.0;
    cfg.x0 = 0.0;
    cfg.T = t;
    cfg.dt = mc.dt;
    double sum = 0.0, sumsq = 0.0, comp = 0.0;
    for (int p = 0; p < mc.n_paths; ++p) {
        RngStream rng(stream_key(path_key, kTagInnerPath, static_cast<std::uint64_t>(p)));
        const Trajectory traj = simulate_limit_path(cfg, a_bar, rng);
        double y;
        if (mc.estimator == ExponentEstimator::ito) {
            y = exponent_ito(traj, W, x, c_bar, a_bar);
        } else {
            const LocalTimeProfile L = local_time(traj, mc.delta_bin);
            y = exponent_direct(L, W, x, c_bar, a_bar);
        }
        const double w = g(x + traj.X.back()) * std::exp(y);
        const double d = w - comp;
        const double s2 = sum + d;
        comp = (s2 - sum) - d;
        sum = s2;
        sumsq += w * w;
    }
    LimitSample out;
    out.t = t;
    out.x = x;
    out.n_paths = mc.n_paths;
    out.estimator = mc.estimator;
    const double n = static_cast<double>(mc.n_paths);
    out.u = sum / n;
    const double var = std::max(0.0, (sumsq - n * out.u * out.u) / (n - 1.0));
    out.se = std::sqrt(var / n);
    return out;
}

std::vector<LimitSample> u_limit_law(double t, double x, const std::function<double(double)>& g,
                                     double a_bar, double c_bar, int n_w, double w_range,
                                     double delta_w, const LimitMcConfig& mc, std::uint64_t seed,
                                     int workers) {
    if (n_w < 2) throw std::invalid_argument("u_limit_law: need n_w >= 2");
    return parallel_map<LimitSample>(
        static_cast<std::size_t>(n_w), workers, [&](std::size_t i) {
            RngStream wrng(stream_key(seed, kTagWDraw, i));
            const WienerPath W = sample_W(w_range, delta_w, wrng);
            return u_limit(W, t, x, g, a_bar, c_bar, mc, stream_key(seed, kTagWDraw + 1, i));
        });
}

}  // namespace homog
