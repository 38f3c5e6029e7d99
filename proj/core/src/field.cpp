#include "homog/field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace homog {

namespace {

constexpr std::uint64_t kTagCellsA = 0xA11CE11Aull;
constexpr std::uint64_t kTagCellsC = 0xC0FFEECEull;
constexpr std::uint64_t kTagShift = 0x5111F7ull;
constexpr std::uint64_t kTagEffMc = 0xEFFAull;

// 12-point Gauss-Legendre on [-1, 1]
constexpr double kGlX[12] = {
    -0.9815606342467192, -0.9041172563704749, -0.7699026741943047, -0.5873179542866175,
    -0.3678314989981802, -0.1252334085114689, 0.1252334085114689,  0.3678314989981802,
    0.5873179542866175,  0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
constexpr double kGlW[12] = {
    0.0471753363865118, 0.1069393259953184, 0.1600783285433462, 0.2031674267230659,
    0.2334925365383548, 0.2491470458134028, 0.2491470458134028, 0.2334925365383548,
    0.2031674267230659, 0.1600783285433462, 0.1069393259953184, 0.0471753363865118};

double xlogx(double z) { return z > 0.0 ? z * std::log(z) : 0.0; }

// E[1/(lam*alpha + (1-lam)*beta)] over an i.i.d. marginal pair
double pair_mean_inv(const FieldSpec& s, double lam) {
    if (s.a_marginal == AMarginal::two_point) {
        const double a[2] = {s.a_lo, s.a_hi};
        const double p[2] = {s.a_p, 1.0 - s.a_p};
        double e = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) e += p[i] * p[j] / (lam * a[i] + (1.0 - lam) * a[j]);
        return e;
    }
    const double lo = s.a_lo, hi = s.a_hi;
    if (hi == lo) return 1.0 / lo;
    const double marginal = std::log(hi / lo) / (hi - lo);
    if (lam < 1e-9 || lam > 1.0 - 1e-9) return marginal;
    const double q = 1.0 - lam;
    const double d2 = (hi - lo) * (hi - lo);
    return (xlogx(hi) - xlogx(lam * lo + q * hi) - xlogx(lam * hi + q * lo) +
            xlogx(lam * lo + q * lo)) /
           (lam * q * d2);
}

std::int64_t seg_of(double x, double s, double shift) {
    return static_cast<std::int64_t>(std::floor(x / s - shift));
}

}  // namespace

void FieldSpec::validate() const {
    if (!(a_lo > 0.0)) throw std::invalid_argument("FieldSpec: a_lo must be positive");
    if (!(a_hi >= a_lo)) throw std::invalid_argument("FieldSpec: need a_lo <= a_hi");
    if (!(a_p >= 0.0 && a_p <= 1.0)) throw std::invalid_argument("FieldSpec: a_p outside [0,1]");
    if (!(sigma >= 0.0)) throw std::invalid_argument("FieldSpec: sigma must be >= 0");
    if (!(range >= 1.0)) throw std::invalid_argument("FieldSpec: dependence range must be >= 1");
}

double FieldSpec::c_variance() const {
    return c_marginal == CMarginal::rademacher ? sigma * sigma : sigma * sigma / 3.0;
}

double EffectiveCoefficients::c_bar() const { return std::sqrt(c_bar_sq); }

double covariance_c(const FieldSpec& spec, double x) {
    spec.validate();
    const double var = spec.c_variance();
    const double ax = std::abs(x);
    if (spec.kernel == KernelKind::box) {
        return ax >= spec.range ? 0.0 : var * (1.0 - ax / spec.range);
    }
    const double tau = ax / spec.spacing();
    if (tau < 1.0) return var * (2.0 / 3.0 - tau * tau + 0.5 * tau * tau * tau);
    if (tau < 2.0) {
        const double r = 2.0 - tau;
        return var * r * r * r / 6.0;
    }
    return 0.0;
}

double effective_c_sq(const FieldSpec& spec) {
    spec.validate();
    return spec.c_variance() * (spec.kernel == KernelKind::box ? spec.range : spec.spacing());
}

double effective_a(const FieldSpec& spec, EffectiveMethod method) {
    spec.validate();
    if (method == EffectiveMethod::monte_carlo)
        throw std::invalid_argument("effective_a: use effective_a_monte_carlo for MC estimates");
    const bool box = spec.kernel == KernelKind::box;
    if (method == EffectiveMethod::closed_form) {
        if (box) {
            if (spec.a_marginal == AMarginal::two_point)
                return 1.0 / (spec.a_p / spec.a_lo + (1.0 - spec.a_p) / spec.a_hi);
            if (spec.a_hi == spec.a_lo) return spec.a_lo;
            return (spec.a_hi - spec.a_lo) / std::log(spec.a_hi / spec.a_lo);
        }
        if (spec.a_marginal == AMarginal::two_point) {
            // for each coefficient pair the lam-average of 1/a has a log form
            const double a[2] = {spec.a_lo, spec.a_hi};
            const double p[2] = {spec.a_p, 1.0 - spec.a_p};
            double e = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const double f =
                        (a[i] == a[j]) ? 1.0 / a[i] : std::log(a[i] / a[j]) / (a[i] - a[j]);
                    e += p[i] * p[j] * f;
                }
            return 1.0 / e;
        }
        throw std::invalid_argument(
            "effective_a: no closed form for triangle kernel with uniform marginal; "
            "use quadrature");
    }
    if (box) return effective_a(spec, EffectiveMethod::closed_form);
    // composite trapezoid over the mixing weight, h_q = 1e-3, error O(h_q^2)
    const int n = 1000;
    const double h = 1.0 / n;
    double sum = 0.5 * (pair_mean_inv(spec, 0.0) + pair_mean_inv(spec, 1.0));
    for (int i = 1; i < n; ++i) sum += pair_mean_inv(spec, i * h);
    return 1.0 / (sum * h);
}

Estimate effective_a_monte_carlo(const FieldSpec& spec, std::uint64_t seed, int n_realizations,
                                 double window) {
    spec.validate();
    if (n_realizations < 2)
        throw std::invalid_argument("effective_a_monte_carlo: need >= 2 realizations");
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n_realizations; ++i) {
        FieldRealization f(spec, stream_key(seed, kTagEffMc, static_cast<std::uint64_t>(i)));
        const double m = f.int_inv_a(window) / window;
        sum += m;
        sumsq += m * m;
    }
    const double mean = sum / n_realizations;
    const double var =
        std::max(0.0, (sumsq - n_realizations * mean * mean) / (n_realizations - 1.0));
    const double se_mean = std::sqrt(var / n_realizations);
    return {1.0 / mean, se_mean / (mean * mean)};
}

EffectiveCoefficients effective_coefficients(const FieldSpec& spec) {
    EffectiveCoefficients out;
    if (spec.kernel == KernelKind::triangle && spec.a_marginal == AMarginal::uniform_interval) {
        out.a_bar = effective_a(spec, EffectiveMethod::quadrature);
        out.provenance = Provenance::quadrature;
    } else {
        out.a_bar = effective_a(spec, EffectiveMethod::closed_form);
        out.provenance = Provenance::closed_form;
    }
    out.c_bar_sq = effective_c_sq(spec);
    return out;
}

// ---------------------------------------------------------------------------

namespace detail {

LazyTable::LazyTable() {
    pos_.resize(static_cast<std::size_t>(kMaxChunks));
    neg_.resize(static_cast<std::size_t>(kMaxChunks));
}

double& LazyTable::slot(std::int64_t i) {
    auto& side = i >= 0 ? pos_ : neg_;
    const std::int64_t k = i >= 0 ? i : -1 - i;
    const auto chunk = static_cast<std::size_t>(k / kChunk);
    if (chunk >= side.size())
        throw std::runtime_error("FieldRealization: memoized window limit exceeded");
    if (!side[chunk]) side[chunk] = std::make_unique<std::array<double, kChunk>>();
    return (*side[chunk])[k % kChunk];
}

}  // namespace detail

/// Memoized prefix windows. k_pref/c_pref/phi_pref hold running integrals at
/// segment left boundaries (anchored to 0 at segment index 0); K0/C0/Phi0
/// shift them so the published integrals vanish at x = 0.
struct FieldRealization::Window {
    mutable std::mutex mu;
    detail::LazyTable a_nodes, c_nodes;
    detail::LazyTable k_pref, c_pref, phi_pref;
    double K0 = 0.0, C0 = 0.0, Phi0 = 0.0;
    std::atomic<bool> anchored{false}, phi_anchored{false};
};

FieldRealization::FieldRealization(const FieldSpec& spec) : spec_(spec) {
    spec_.validate();
    win_ = std::make_unique<Window>();
}

FieldRealization::FieldRealization(const FieldSpec& spec, std::uint64_t seed)
    : FieldRealization(spec) {
    seed_ = seed;
    key_a_ = stream_key(seed, kTagCellsA);
    key_c_ = stream_key(seed, kTagCellsC);
    shift_a_ = keyed_uniform(stream_key(seed, kTagShift), 0);
    shift_c_ = keyed_uniform(stream_key(seed, kTagShift), 1);
    ensure_cover(-2.0 * spec_.spacing(), 2.0 * spec_.spacing());
}

FieldRealization::FieldRealization(FieldRealization&&) noexcept = default;
FieldRealization& FieldRealization::operator=(FieldRealization&&) noexcept = default;
FieldRealization::~FieldRealization() = default;

FieldRealization FieldRealization::from_cells(const FieldSpec& spec, std::vector<double> a_cells,
                                              std::vector<double> c_cells,
                                              std::int64_t first_index, double shift_a,
                                              double shift_c) {
    if (a_cells.empty() || c_cells.empty())
        throw std::invalid_argument("from_cells: need at least one coefficient per field");
    for (double a : a_cells)
        if (!(a >= spec.a_lo && a <= spec.a_hi))
            throw std::invalid_argument("from_cells: a coefficient outside [a_lo, a_hi]");
    FieldRealization f(spec);
    f.inj_a_ = std::move(a_cells);
    f.inj_c_ = std::move(c_cells);
    f.inj_first_ = first_index;
    f.shift_a_ = shift_a;
    f.shift_c_ = shift_c;
    f.ensure_cover(-2.0 * spec.spacing(), 2.0 * spec.spacing());
    return f;
}

double FieldRealization::coeff_a(std::int64_t j) const {
    if (!inj_a_.empty()) {
        const auto idx = std::clamp<std::int64_t>(j - inj_first_, 0,
                                                  static_cast<std::int64_t>(inj_a_.size()) - 1);
        return inj_a_[static_cast<std::size_t>(idx)];
    }
    const double u = keyed_uniform(key_a_, j);
    if (spec_.a_marginal == AMarginal::two_point) return u < spec_.a_p ? spec_.a_lo : spec_.a_hi;
    return spec_.a_lo + (spec_.a_hi - spec_.a_lo) * u;
}

double FieldRealization::coeff_c(std::int64_t j) const {
    if (!inj_c_.empty()) {
        const auto idx = std::clamp<std::int64_t>(j - inj_first_, 0,
                                                  static_cast<std::int64_t>(inj_c_.size()) - 1);
        return inj_c_[static_cast<std::size_t>(idx)];
    }
    const double u = keyed_uniform(key_c_, j);
    if (spec_.c_marginal == CMarginal::rademacher) return u < 0.5 ? -spec_.sigma : spec_.sigma;
    return spec_.sigma * (2.0 * u - 1.0);
}

std::int64_t FieldRealization::a_cell_of(double x) const {
    return seg_of(x, spec_.spacing(), shift_a_);
}

double FieldRealization::a_cell_left(std::int64_t j) const {
    return (static_cast<double>(j) + shift_a_) * spec_.spacing();
}

double FieldRealization::a_cell_value(std::int64_t j) const { return win_->a_nodes.at(j); }

double FieldRealization::inv_a_prefix(std::int64_t j) const {
    return win_->k_pref.at(j) - win_->K0;
}

void FieldRealization::ensure_a_segments(std::int64_t j_lo, std::int64_t j_hi) const {
    auto& w = *win_;
    if (w.a_nodes.covers(j_lo - 1, j_hi + 1) && w.k_pref.covers(j_lo, j_hi + 1)) return;

    std::scoped_lock lk(w.mu);
    const double s = spec_.spacing();
    const bool tri = spec_.kernel == KernelKind::triangle;

    // lattice coefficients (triangle segment j reads nodes j-1 and j)
    {
        auto& t = w.a_nodes;
        std::int64_t lo = t.lo(), hi = t.hi();
        if (lo == hi) {
            t.slot(0) = coeff_a(0);
            lo = 0;
            hi = 1;
        }
        const std::int64_t want_lo = j_lo - 2, want_hi = j_hi + 2;
        for (std::int64_t j = hi; j <= want_hi; ++j) t.slot(j) = coeff_a(j);
        for (std::int64_t j = lo - 1; j >= want_lo; --j) t.slot(j) = coeff_a(j);
        t.publish(std::min(lo, want_lo), std::max(hi, want_hi + 1));
    }

    auto seg_inv_a = [&](std::int64_t j) {
        if (!tri) return s / w.a_nodes.at(j);
        const double al = w.a_nodes.at(j - 1), ar = w.a_nodes.at(j);
        if (al == ar) return s / al;
        return s * std::log(ar / al) / (ar - al);
    };

    auto& kp = w.k_pref;
    std::int64_t klo = kp.lo(), khi = kp.hi();
    if (klo == khi) {
        kp.slot(0) = 0.0;
        klo = 0;
        khi = 1;
    }
    for (std::int64_t j = khi; j <= j_hi + 1; ++j) kp.slot(j) = kp.at(j - 1) + seg_inv_a(j - 1);
    for (std::int64_t j = klo - 1; j >= j_lo; --j) kp.slot(j) = kp.at(j + 1) - seg_inv_a(j);
    kp.publish(std::min(klo, j_lo), std::max(khi, j_hi + 2));
}

void FieldRealization::ensure_cover(double x_lo, double x_hi) const {
    if (x_lo > x_hi) std::swap(x_lo, x_hi);
    auto& w = *win_;
    const double s = spec_.spacing();
    const bool tri = spec_.kernel == KernelKind::triangle;
    const std::int64_t a_lo_seg = seg_of(std::min(x_lo, 0.0), s, shift_a_) - 1;
    const std::int64_t a_hi_seg = seg_of(std::max(x_hi, 0.0), s, shift_a_) + 1;
    // Phi fill integrates C over a segments, so pad the c window generously
    const std::int64_t c_lo_seg = seg_of(std::min(x_lo, 0.0) - 4.0 * s, s, shift_c_) - 1;
    const std::int64_t c_hi_seg = seg_of(std::max(x_hi, 0.0) + 4.0 * s, s, shift_c_) + 1;

    ensure_a_segments(a_lo_seg, a_hi_seg);

    if (!(w.c_nodes.covers(c_lo_seg - 1, c_hi_seg + 1) && w.c_pref.covers(c_lo_seg, c_hi_seg + 1))) {
        std::scoped_lock lk(w.mu);
        {
            auto& t = w.c_nodes;
            std::int64_t lo = t.lo(), hi = t.hi();
            if (lo == hi) {
                t.slot(0) = coeff_c(0);
                lo = 0;
                hi = 1;
            }
            const std::int64_t want_lo = c_lo_seg - 2, want_hi = c_hi_seg + 2;
            for (std::int64_t j = hi; j <= want_hi; ++j) t.slot(j) = coeff_c(j);
            for (std::int64_t j = lo - 1; j >= want_lo; --j) t.slot(j) = coeff_c(j);
            t.publish(std::min(lo, want_lo), std::max(hi, want_hi + 1));
        }
        auto seg_c = [&](std::int64_t j) {
            if (!tri) return s * w.c_nodes.at(j);
            return 0.5 * s * (w.c_nodes.at(j - 1) + w.c_nodes.at(j));
        };
        auto& cp = w.c_pref;
        std::int64_t clo = cp.lo(), chi = cp.hi();
        if (clo == chi) {
            cp.slot(0) = 0.0;
            clo = 0;
            chi = 1;
        }
        for (std::int64_t j = chi; j <= c_hi_seg + 1; ++j) cp.slot(j) = cp.at(j - 1) + seg_c(j - 1);
        for (std::int64_t j = clo - 1; j >= c_lo_seg; --j) cp.slot(j) = cp.at(j + 1) - seg_c(j);
        cp.publish(std::min(clo, c_lo_seg), std::max(chi, c_hi_seg + 2));
    }

    if (!w.anchored.load(std::memory_order_acquire)) {
        std::scoped_lock lk(w.mu);
        if (!w.anchored.load(std::memory_order_relaxed)) {
            w.K0 = raw_int_inv_a(0.0);
            w.C0 = raw_int_c(0.0);
            w.anchored.store(true, std::memory_order_release);
        }
    }

    if (!w.phi_pref.covers(a_lo_seg, a_hi_seg + 1)) {
        std::scoped_lock lk(w.mu);
        auto& pp = w.phi_pref;
        std::int64_t plo = pp.lo(), phi = pp.hi();
        if (plo == phi) {
            pp.slot(0) = 0.0;
            plo = 0;
            phi = 1;
        }
        for (std::int64_t j = phi; j <= a_hi_seg + 1; ++j)
            pp.slot(j) = pp.at(j - 1) + phi_partial(a_cell_left(j - 1), a_cell_left(j));
        for (std::int64_t j = plo - 1; j >= a_lo_seg; --j)
            pp.slot(j) = pp.at(j + 1) - phi_partial(a_cell_left(j), a_cell_left(j + 1));
        pp.publish(std::min(plo, a_lo_seg), std::max(phi, a_hi_seg + 2));
    }

    if (!w.phi_anchored.load(std::memory_order_acquire)) {
        std::scoped_lock lk(w.mu);
        if (!w.phi_anchored.load(std::memory_order_relaxed)) {
            w.Phi0 = raw_phi(0.0);
            w.phi_anchored.store(true, std::memory_order_release);
        }
    }
}

double FieldRealization::eval_a(double x) const {
    ensure_cover(x, x);
    return eval_a_nocover(x);
}

double FieldRealization::eval_a_nocover(double x) const {
    const std::int64_t j = a_cell_of(x);
    const auto& w = *win_;
    if (spec_.kernel == KernelKind::box) return w.a_nodes.at(j);
    const double xi = x / spec_.spacing() - shift_a_ - static_cast<double>(j);
    return (1.0 - xi) * w.a_nodes.at(j - 1) + xi * w.a_nodes.at(j);
}

double FieldRealization::eval_c(double x) const {
    ensure_cover(x, x);
    const std::int64_t j = seg_of(x, spec_.spacing(), shift_c_);
    const auto& w = *win_;
    if (spec_.kernel == KernelKind::box) return w.c_nodes.at(j);
    const double xi = x / spec_.spacing() - shift_c_ - static_cast<double>(j);
    return (1.0 - xi) * w.c_nodes.at(j - 1) + xi * w.c_nodes.at(j);
}

double FieldRealization::raw_int_inv_a(double x) const {
    const auto& w = *win_;
    const double s = spec_.spacing();
    const std::int64_t j = a_cell_of(x);
    const double left = a_cell_left(j);
    if (spec_.kernel == KernelKind::box) return w.k_pref.at(j) + (x - left) / w.a_nodes.at(j);
    const double al = w.a_nodes.at(j - 1), ar = w.a_nodes.at(j);
    if (al == ar) return w.k_pref.at(j) + (x - left) / al;
    const double here = al + (ar - al) * (x - left) / s;
    return w.k_pref.at(j) + s * std::log(here / al) / (ar - al);
}

double FieldRealization::raw_int_c(double x) const {
    const auto& w = *win_;
    const double s = spec_.spacing();
    const std::int64_t j = seg_of(x, s, shift_c_);
    const double left = (static_cast<double>(j) + shift_c_) * s;
    if (spec_.kernel == KernelKind::box) return w.c_pref.at(j) + (x - left) * w.c_nodes.at(j);
    const double cl = w.c_nodes.at(j - 1), cr = w.c_nodes.at(j);
    const double xi = (x - left) / s;
    return w.c_pref.at(j) + s * (cl * xi + 0.5 * (cr - cl) * xi * xi);
}

double FieldRealization::int_inv_a(double x) const {
    ensure_cover(std::min(x, 0.0), std::max(x, 0.0));
    return raw_int_inv_a(x) - win_->K0;
}

double FieldRealization::int_c(double x) const {
    ensure_cover(std::min(x, 0.0), std::max(x, 0.0));
    return raw_int_c(x) - win_->C0;
}

double FieldRealization::phi_partial(double u0, double u1) const {
    if (u1 <= u0) return 0.0;
    const double s = spec_.spacing();
    const auto& w = *win_;
    double pieces[4];
    int np = 0;
    pieces[np++] = u0;
    const std::int64_t jc0 = seg_of(u0, s, shift_c_);
    const std::int64_t jc1 = seg_of(u1, s, shift_c_);
    for (std::int64_t j = jc0 + 1; j <= jc1 && np < 3; ++j) {
        const double b = (static_cast<double>(j) + shift_c_) * s;
        if (b > pieces[np - 1] && b < u1) pieces[np++] = b;
    }
    pieces[np++] = u1;
    double total = 0.0;
    for (int p = 0; p + 1 < np; ++p) {
        const double lo = pieces[p], hi = pieces[p + 1];
        if (hi <= lo) continue;
        if (spec_.kernel == KernelKind::box) {
            // a constant and C linear on the piece: trapezoid is exact
            const double a = w.a_nodes.at(a_cell_of(0.5 * (lo + hi)));
            total += 0.5 * ((raw_int_c(lo) - w.C0) + (raw_int_c(hi) - w.C0)) * (hi - lo) / a;
        } else {
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            double acc = 0.0;
            for (int q = 0; q < 12; ++q) {
                const double z = mid + half * kGlX[q];
                acc += kGlW[q] * (raw_int_c(z) - w.C0) / eval_a_nocover(z);
            }
            total += acc * half;
        }
    }
    return total;
}

double FieldRealization::raw_phi(double x) const {
    const std::int64_t j = a_cell_of(x);
    if (x >= a_cell_left(j))
        return win_->phi_pref.at(j) + phi_partial(a_cell_left(j), x);
    return win_->phi_pref.at(j) - phi_partial(x, a_cell_left(j));
}

double FieldRealization::phi(double x) const {
    ensure_cover(std::min(x, 0.0), std::max(x, 0.0));
    return raw_phi(x) - win_->Phi0;
}

double FieldRealization::phi_prime(double x) const { return int_c(x) / eval_a(x); }

// ---------------------------------------------------------------------------
// rescaled processes

double w_eps(const FieldRealization& f, double c_bar, double eps, double x) {
    if (!(eps > 0.0)) throw std::invalid_argument("w_eps: eps must be positive");
    if (!(c_bar > 0.0)) throw std::invalid_argument("w_eps: c_bar must be positive");
    return std::sqrt(eps) / c_bar * f.int_c(x / eps);
}

double f_eps(const FieldRealization& f, double eps, double x) {
    if (!(eps > 0.0)) throw std::invalid_argument("f_eps: eps must be positive");
    return std::pow(eps, 1.5) * f.phi(x / eps);
}

double k_eps(const FieldRealization& f, double eps, double x) {
    if (!(eps > 0.0)) throw std::invalid_argument("k_eps: eps must be positive");
    return eps * f.int_inv_a(x / eps);
}

double corrector_chi(const FieldRealization& f, double a_bar, double x) {
    return a_bar * f.int_inv_a(x) - x;
}

std::pair<double, double> corrector_phi(const FieldRealization& f, double x) {
    return {f.phi(x), f.phi_prime(x)};
}

CorrectorTable tabulate_correctors(const FieldRealization& f, double a_bar, double x_lo,
                                   double x_hi, int n) {
    CorrectorTable t;
    t.exact_piecewise = f.is_box();
    t.x.resize(n);
    t.chi.resize(n);
    t.phi.resize(n);
    t.phi_prime.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / (n - 1.0);
        t.x[i] = x;
        t.chi[i] = corrector_chi(f, a_bar, x);
        t.phi[i] = f.phi(x);
        t.phi_prime[i] = f.phi_prime(x);
    }
    return t;
}

double w_eps_variance(const FieldSpec& spec, double eps, double x) {
    spec.validate();
    if (!(eps > 0.0)) throw std::invalid_argument("w_eps_variance: eps must be positive");
    x = std::abs(x);
    const double cb2 = effective_c_sq(spec);
    if (spec.kernel == KernelKind::box) {
        const double var = spec.c_variance();
        const double L = spec.range * eps;
        const double base = x <= L ? x * x - x * x * x / (3.0 * L) : x * L - L * L / 3.0;
        return var * base / (cb2 * eps);
    }
    // triangle: composite trapezoid over the covariance support
    const double h_max = std::min(x, spec.range * eps);
    const int n = 4000;
    const double dh = h_max / n;
    auto f = [&](double h) { return 2.0 * (x - h) * covariance_c(spec, h / eps); };
    double s = 0.5 * (f(0.0) + f(h_max));
    for (int i = 1; i < n; ++i) s += f(i * dh);
    return s * dh / (cb2 * eps);
}

double xi_gamma_eps(const FieldRealization& f, double c_bar, double eps, double gamma, double R) {
    if (!(gamma > 0.0 && gamma < 0.5))
        throw std::invalid_argument("xi_gamma_eps: gamma must lie in (0, 1/2)");
    if (!(eps > 0.0)) throw std::invalid_argument("xi_gamma_eps: eps must be positive");
    const double s = f.spec().spacing();
    const double step_x = eps * s;
    f.ensure_cover(-R / eps - 2.0 * s, R / eps + 2.0 * s);

    const double omg = 1.0 - gamma;
    auto score = [&](double x, double w) {
        return std::abs(w) / std::pow(1.0 + std::abs(x), omg);
    };
    auto W = [&](double x) { return w_eps(f, c_bar, eps, x); };

    // visit all W_eps breakpoints in [-R, R] plus 0 and the window edges
    double best = 0.0;
    double x_prev = -R;
    double w_prev = W(x_prev);
    best = std::max(best, score(x_prev, w_prev));
    const double first_b = (std::floor(-R / step_x - f.shift_c()) + 1.0 + f.shift_c()) * step_x;
    const auto nseg = static_cast<std::int64_t>(std::ceil(2.0 * R / step_x)) + 2;
    for (std::int64_t k = 0; k <= nseg; ++k) {
        double x = first_b + static_cast<double>(k) * step_x;
        bool last = false;
        if (x >= R) {
            x = R;
            last = true;
        }
        const double w = W(x);
        if (x > x_prev) {
            const double B = (w - w_prev) / (x - x_prev);
            if (B != 0.0) {
                const double A = w_prev - B * x_prev;
                if (x_prev >= 0.0) {
                    const double xc = (omg * A - B) / (gamma * B);
                    if (xc > x_prev && xc < x) best = std::max(best, score(xc, A + B * xc));
                } else if (x <= 0.0) {
                    const double xc = (B + omg * A) / (gamma * B);
                    if (xc > x_prev && xc < x) best = std::max(best, score(xc, A + B * xc));
                } else {
                    best = std::max(best, score(0.0, A));
                }
            }
        }
        best = std::max(best, score(x, w));
        x_prev = x;
        w_prev = w;
        if (last) break;
    }
    return best;
}

}  // namespace homog
