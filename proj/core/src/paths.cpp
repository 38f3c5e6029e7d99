#include "homog/paths.hpp"

#include <cmath>
#include <stdexcept>

namespace homog {

double PathConfig::dt_max(double a_hi) const {
    return eps > 0.0 ? c_dt * eps * eps / a_hi : kLimitDtMax;
}

void PathConfig::validate(double a_hi) const {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("PathConfig: need T, dt > 0");
    if (eps < 0.0) throw std::invalid_argument("PathConfig: eps must be >= 0");
    if (dt > dt_max(a_hi) * (1.0 + 1e-12))
        throw std::invalid_argument("PathConfig: dt exceeds the step bound for this eps");
}

QuenchedStepper::QuenchedStepper(const FieldRealization& f, double eps, double a_bar, double x0)
    : f_(f), eps_(eps), a_bar_(a_bar), inv_eps_(1.0 / eps), x_(x0), box_(f.is_box()) {
    if (!(eps > 0.0)) throw std::invalid_argument("QuenchedStepper: eps must be positive");
    cell_ = f_.a_cell_of(x0 * inv_eps_);
    f_.ensure_a_segments(cell_ - 8, cell_ + 8);
    z_ = psi(x0);
}

double QuenchedStepper::psi(double x) const { return a_bar_ * eps_ * f_.int_inv_a(x * inv_eps_); }

double QuenchedStepper::a_local() const {
    return box_ ? f_.a_cell_value(cell_) : f_.eval_a(x_ * inv_eps_);
}

double QuenchedStepper::psi_inverse(double z, double x_hint) const {
    // bracket from psi' in [a_bar/a_hi, a_bar/a_lo]
    const double dz = z - psi(x_hint);
    const double lo_step = dz * (dz > 0 ? f_.spec().a_lo : f_.spec().a_hi) / a_bar_;
    const double hi_step = dz * (dz > 0 ? f_.spec().a_hi : f_.spec().a_lo) / a_bar_;
    double lo = x_hint + lo_step, hi = x_hint + hi_step;
    if (lo > hi) std::swap(lo, hi);
    lo -= 1e-12;
    hi += 1e-12;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (psi(mid) < z)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * std::max(1.0, std::abs(mid))) return 0.5 * (lo + hi);
    }
    throw std::runtime_error("psi_inverse: bisection failed to converge (corrupted corrector?)");
}

double QuenchedStepper::step(double dt, RngStream& rng) {
    const double a_here = a_local();
    db_ = std::sqrt(dt) * rng.next_normal();
    const double dz = a_bar_ / std::sqrt(a_here) * db_;
    const double z_new = z_ + dz;

    if (!box_) {
        x_ = psi_inverse(z_new, x_);
        z_ = z_new;
        cell_ = f_.a_cell_of(x_ * inv_eps_);
        return dz;
    }

    // exact inversion: K* = z/(a_bar eps); walk cells until K* is bracketed,
    // then solve the linear piece. K is strictly increasing.
    const double k_target = z_new / (a_bar_ * eps_);
    std::int64_t j = cell_;
    f_.ensure_a_segments(j - 2, j + 2);
    int guard = 0;
    while (k_target < f_.inv_a_prefix(j)) {
        --j;
        if (j <= f_.a_cell_of(0.0) - (1 << 22) || ++guard > (1 << 22))
            throw std::runtime_error("QuenchedStepper: cell walk diverged");
        f_.ensure_a_segments(j - 2, j + 2);
    }
    while (k_target >= f_.inv_a_prefix(j + 1)) {
        ++j;
        if (++guard > (1 << 22))
            throw std::runtime_error("QuenchedStepper: cell walk diverged");
        f_.ensure_a_segments(j - 2, j + 2);
    }
    const double u = f_.a_cell_left(j) + (k_target - f_.inv_a_prefix(j)) * f_.a_cell_value(j);
    x_ = u * eps_;
    z_ = z_new;
    cell_ = j;
    return dz;
}

Trajectory simulate_quenched(const FieldRealization& f, const PathConfig& cfg, double a_bar,
                             RngStream& rng) {
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("simulate_quenched: eps must be positive");
    cfg.validate(f.spec().a_hi);
    const auto nsteps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
    Trajectory tr;
    tr.eps = cfg.eps;
    tr.dt = cfg.dt;
    tr.x0 = cfg.x0;
    tr.X.resize(nsteps + 1);
    tr.Z.resize(nsteps + 1);
    tr.dB.resize(nsteps);
    QuenchedStepper st(f, cfg.eps, a_bar, cfg.x0);
    tr.X[0] = st.x();
    tr.Z[0] = st.z();
    for (std::size_t k = 0; k < nsteps; ++k) {
        st.step(cfg.dt, rng);
        tr.X[k + 1] = st.x();
        tr.Z[k + 1] = st.z();
        tr.dB[k] = st.last_db();
    }
    return tr;
}

Trajectory simulate_limit_path(const PathConfig& cfg, double a_bar, RngStream& rng) {
    if (cfg.eps != 0.0) throw std::invalid_argument("simulate_limit_path: eps must be 0");
    if (!(a_bar > 0.0)) throw std::invalid_argument("simulate_limit_path: a_bar must be positive");
    cfg.validate(1.0);
    const auto nsteps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
    Trajectory tr;
    tr.eps = 0.0;
    tr.dt = cfg.dt;
    tr.x0 = cfg.x0;
    tr.X.resize(nsteps + 1);
    tr.dB.resize(nsteps);
    tr.X[0] = cfg.x0;
    const double sq = std::sqrt(a_bar);
    const double sqdt = std::sqrt(cfg.dt);
    for (std::size_t k = 0; k < nsteps; ++k) {
        tr.dB[k] = sqdt * rng.next_normal();
        tr.X[k + 1] = tr.X[k] + sq * tr.dB[k];
    }
    return tr;
}

double LocalTimeProfile::total_mass() const {
    double s = 0.0;
    for (double v : density) s += v;
    return s * delta;
}

double LocalTimeProfile::value_at(double y) const {
    // interpolate between bin-center values; 0 outside the support
    const double pos = (y - support_lo()) / delta - 0.5;
    if (pos <= -1.0 || pos >= static_cast<double>(density.size())) return 0.0;
    if (pos <= 0.0) return density.front() * (1.0 + pos);
    if (pos >= static_cast<double>(density.size()) - 1.0) {
        const double f = pos - (static_cast<double>(density.size()) - 1.0);
        return density.back() * (1.0 - f);
    }
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    return density[i] * (1.0 - f) + density[i + 1] * f;
}

LocalTimeProfile local_time(const Trajectory& traj, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("local_time: bin width must be positive");
    double lo = traj.X[0], hi = traj.X[0];
    for (double x : traj.X) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    LocalTimeProfile L;
    L.delta = delta;
    L.first_bin = static_cast<std::int64_t>(std::floor(lo / delta)) - 1;
    const auto last_bin = static_cast<std::int64_t>(std::floor(hi / delta)) + 1;
    L.density.assign(static_cast<std::size_t>(last_bin - L.first_bin + 1), 0.0);

    const double dt = traj.dt;
    for (std::size_t k = 0; k + 1 < traj.X.size(); ++k) {
        double a = traj.X[k], b = traj.X[k + 1];
        if (a > b) std::swap(a, b);
        const auto j0 = static_cast<std::int64_t>(std::floor(a / delta));
        const auto j1 = static_cast<std::int64_t>(std::floor(b / delta));
        if (j0 == j1) {
            L.density[static_cast<std::size_t>(j0 - L.first_bin)] += dt / delta;
            continue;
        }
        const double len = b - a;
        for (std::int64_t j = j0; j <= j1; ++j) {
            const double cell_lo = static_cast<double>(j) * delta;
            const double overlap = std::min(b, cell_lo + delta) - std::max(a, cell_lo);
            L.density[static_cast<std::size_t>(j - L.first_bin)] += dt * overlap / (len * delta);
        }
    }
    return L;
}

std::vector<double> h_eps(const Trajectory& traj, const FieldRealization& f) {
    if (!(traj.eps > 0.0)) throw std::invalid_argument("h_eps: quenched trajectory required");
    std::vector<double> h(traj.X.size());
    h[0] = 0.0;
    const double inv_eps = 1.0 / traj.eps;
    for (std::size_t k = 0; k + 1 < traj.X.size(); ++k)
        h[k + 1] = h[k] + traj.dt / f.eval_a(traj.X[k] * inv_eps);
    return h;
}

double y_eps_direct(const Trajectory& traj, const FieldRealization& f) {
    if (!(traj.eps > 0.0))
        throw std::invalid_argument("y_eps_direct: quenched trajectory required");
    const double inv_eps = 1.0 / traj.eps;
    double s = 0.0, comp = 0.0;
    for (std::size_t k = 0; k + 1 < traj.X.size(); ++k) {
        const double y = f.eval_c(traj.X[k] * inv_eps) * traj.dt - comp;
        const double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    return s / std::sqrt(traj.eps);
}

double y_eps_identity(const Trajectory& traj, const FieldRealization& f, double a_bar,
                      double c_bar) {
    if (!(traj.eps > 0.0) || traj.Z.empty())
        throw std::invalid_argument("y_eps_identity: quenched trajectory with Z required");
    const double eps = traj.eps;
    const double inv_eps = 1.0 / eps;
    // spatial term: 2 c_bar int_x^{X_t} W_eps/a dy = 2 (F_eps(X_t) - F_eps(x0))
    const double spatial = 2.0 * (f_eps(f, eps, traj.X.back()) - f_eps(f, eps, traj.x0));
    // Ito sum of W_eps against the Z increments
    const double scale = std::sqrt(eps) / c_bar;
    double sto = 0.0, comp = 0.0;
    for (std::size_t k = 0; k + 1 < traj.X.size(); ++k) {
        const double w = scale * f.int_c(traj.X[k] * inv_eps);
        const double y = w * (traj.Z[k + 1] - traj.Z[k]) - comp;
        const double t = sto + y;
        comp = (t - sto) - y;
        sto = t;
    }
    return spatial - 2.0 * (c_bar / a_bar) * sto;
}

FkEstimate feynman_kac_u_eps(const FieldRealization& f, double eps, double t, double x,
                             const std::function<double(double)>& g, int n_paths,
                             std::uint64_t path_key, double c_dt) {
    if (!(eps > 0.0) || !(t > 0.0))
        throw std::invalid_argument("feynman_kac_u_eps: need eps, t > 0");
    if (n_paths < 1) throw std::invalid_argument("feynman_kac_u_eps: need n_paths >= 1");
    const double a_hi = f.spec().a_hi;
    const double dt = c_dt * eps * eps / a_hi;
    const auto nsteps = static_cast<std::size_t>(std::ceil(t / dt));
    const double dt_eff = t / static_cast<double>(nsteps);
    const double a_bar = effective_a(f.spec(), f.spec().kernel == KernelKind::triangle &&
                                                       f.spec().a_marginal ==
                                                           AMarginal::uniform_interval
                                                   ? EffectiveMethod::quadrature
                                                   : EffectiveMethod::closed_form);
    const double inv_sqeps = 1.0 / std::sqrt(eps);
    const double inv_eps = 1.0 / eps;

    double sum = 0.0, sumsq = 0.0, comp = 0.0, max_w = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        RngStream rng(stream_key(path_key, static_cast<std::uint64_t>(p)));
        QuenchedStepper st(f, eps, a_bar, x);
        double y = 0.0;
        for (std::size_t k = 0; k < nsteps; ++k) {
            y += f.eval_c(st.x() * inv_eps) * dt_eff;
            st.step(dt_eff, rng);
        }
        const double w = g(st.x()) * std::exp(y * inv_sqeps);
        max_w = std::max(max_w, std::abs(w));
        const double d = w - comp;
        const double s2 = sum + d;
        comp = (s2 - sum) - d;
        sum = s2;
        sumsq += w * w;
    }
    FkEstimate out;
    const double n = static_cast<double>(n_paths);
    out.value = sum / n;
    const double var = std::max(0.0, (sumsq - n * out.value * out.value) / (n - 1.0));
    out.se = std::sqrt(var / n);
    out.max_share = sum != 0.0 ? max_w / std::abs(sum) : 0.0;
    return out;
}

}  // namespace homog
