#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "homog/rng.hpp"

namespace homog {

enum class KernelKind { box, triangle };
enum class AMarginal { two_point, uniform_interval };
enum class CMarginal { rademacher, uniform_sym };
enum class EffectiveMethod { closed_form, quadrature, monte_carlo };
enum class Provenance { closed_form, quadrature, monte_carlo };

/// Parametric description of the stationary coefficient pair (a, c).
///
/// Construction: c(x) = sum_j eta_j k(x - (j+U) s) with eta_j i.i.d. zero-mean
/// bounded and U ~ Uniform[0,1) a stationarizing shift; a(x) is built the same
/// way from positive i.i.d. alpha_j with an independent shift. The box kernel
/// (s = range) tiles the line, so the fields are piecewise constant with the
/// exact marginal per cell; the triangle kernel (hat of width range,
/// s = range/2) is a partition of unity, so the fields are continuous
/// piecewise-linear convex combinations of two adjacent coefficients. Either
/// way the dependence range is `range`, hence phi(h) = 0 for h > range.
struct FieldSpec {
    KernelKind kernel = KernelKind::box;
    AMarginal a_marginal = AMarginal::two_point;
    double a_lo = 1.0;
    double a_hi = 4.0;
    double a_p = 0.5;  // P(alpha = a_lo) for two_point
    CMarginal c_marginal = CMarginal::rademacher;
    double sigma = 0.5;  // amplitude: |eta| <= sigma
    double range = 1.0;  // dependence range m (kernel support width)

    void validate() const;      // throws std::invalid_argument
    double c_variance() const;  // Var(eta): sigma^2 (rademacher), sigma^2/3 (uniform_sym)
    double spacing() const { return kernel == KernelKind::box ? range : 0.5 * range; }
};

struct EffectiveCoefficients {
    double a_bar = 0.0;
    double c_bar_sq = 0.0;
    Provenance provenance = Provenance::closed_form;
    double c_bar() const;
};

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// E[c(0) c(x)] in closed form: Var(eta) (1-|x|/m)_+ for the box kernel, the
/// piecewise-cubic hat autocorrelation for the triangle kernel.
double covariance_c(const FieldSpec& spec, double x);

/// a_bar = [E(1/a)]^{-1}. closed_form covers both box marginals and
/// triangle/two_point; quadrature (composite trapezoid in the mixing weight,
/// step 1e-3) additionally covers triangle/uniform.
double effective_a(const FieldSpec& spec, EffectiveMethod method = EffectiveMethod::closed_form);

/// E(1/a) estimated from exact window averages over independent realizations;
/// delta-method standard error on the harmonic mean.
Estimate effective_a_monte_carlo(const FieldSpec& spec, std::uint64_t seed,
                                 int n_realizations = 64, double window = 512.0);

/// c_bar^2 = integral of covariance_c = Var(eta) (int k)^2 / s.
double effective_c_sq(const FieldSpec& spec);

EffectiveCoefficients effective_coefficients(const FieldSpec& spec);

namespace detail {

/// Two-sided lazily extended array with stable element addresses. Readers
/// that stay inside the published [lo, hi) range never take a lock; writers
/// fill slots and then publish the wider range with release stores.
class LazyTable {
public:
    static constexpr std::int64_t kChunk = 512;
    static constexpr std::int64_t kMaxChunks = 8192;  // ~4.2M entries per side

    LazyTable();
    double at(std::int64_t i) const {
        if (i >= 0) return (*pos_[static_cast<std::size_t>(i / kChunk)])[i % kChunk];
        const std::int64_t k = -1 - i;
        return (*neg_[static_cast<std::size_t>(k / kChunk)])[k % kChunk];
    }
    std::int64_t lo() const { return lo_.load(std::memory_order_acquire); }
    std::int64_t hi() const { return hi_.load(std::memory_order_acquire); }
    bool covers(std::int64_t a, std::int64_t b) const { return lo() <= a && b < hi(); }

    double& slot(std::int64_t i);  // writer side only (under the window mutex)
    void publish(std::int64_t lo, std::int64_t hi) {
        lo_.store(lo, std::memory_order_release);
        hi_.store(hi, std::memory_order_release);
    }
    bool empty() const { return lo() == hi(); }

private:
    std::vector<std::unique_ptr<std::array<double, kChunk>>> pos_, neg_;
    std::atomic<std::int64_t> lo_{0}, hi_{0};
};

}  // namespace detail

/// One sampled realization of (a, c). Deterministic function of (spec, seed):
/// lattice coefficients are Philox-addressed by cell index, so re-evaluation
/// at any x reproduces the identical value and far-field queries need no
/// sequential generation. Immutable apart from the memoized prefix windows,
/// whose extension is race-free; sharing across threads is safe.
class FieldRealization {
public:
    FieldRealization(const FieldSpec& spec, std::uint64_t seed);
    FieldRealization(FieldRealization&&) noexcept;
    FieldRealization& operator=(FieldRealization&&) noexcept;
    ~FieldRealization();

    /// test hook: explicit coefficients (lattice index j takes
    /// values[j - first_index], constant extension outside)
    static FieldRealization from_cells(const FieldSpec& spec, std::vector<double> a_cells,
                                       std::vector<double> c_cells, std::int64_t first_index = 0,
                                       double shift_a = 0.0, double shift_c = 0.0);

    const FieldSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }
    double shift_a() const { return shift_a_; }
    double shift_c() const { return shift_c_; }
    bool is_box() const { return spec_.kernel == KernelKind::box; }

    double eval_a(double x) const;
    double eval_c(double x) const;

    double int_inv_a(double x) const;  // K(x) = int_0^x dy/a(y), exact
    double int_c(double x) const;      // C(x) = int_0^x c(y) dy, exact
    double phi(double x) const;        // Phi(x) = int_0^x C(z)/a(z) dz
    double phi_prime(double x) const;  // C(x)/a(x)

    /// pre-extend the memoized windows to cover [x_lo, x_hi]
    void ensure_cover(double x_lo, double x_hi) const;

    // low-level a-lattice access (hot path of the quenched stepper); caller
    // must have covered the range via ensure_cover / ensure_a_segments
    std::int64_t a_cell_of(double x) const;
    double a_cell_left(std::int64_t j) const;
    double a_cell_value(std::int64_t j) const;   // box kernel cell value
    double inv_a_prefix(std::int64_t j) const;   // K at left boundary of cell j
    void ensure_a_segments(std::int64_t j_lo, std::int64_t j_hi) const;

private:
    struct Window;
    explicit FieldRealization(const FieldSpec& spec);

    double coeff_a(std::int64_t j) const;
    double coeff_c(std::int64_t j) const;
    double raw_int_inv_a(double x) const;
    double raw_int_c(double x) const;
    double raw_phi(double x) const;
    double eval_a_nocover(double x) const;
    double phi_partial(double u0, double u1) const;

    FieldSpec spec_;
    std::uint64_t seed_ = 0;
    double shift_a_ = 0.0, shift_c_ = 0.0;
    std::uint64_t key_a_ = 0, key_c_ = 0;

    std::vector<double> inj_a_, inj_c_;  // injected coefficients (tests)
    std::int64_t inj_first_ = 0;

    std::unique_ptr<Window> win_;
};

/// W_eps(x) = eps^{-1/2} c_bar^{-1} int_0^x c(y/eps) dy, exact cellwise.
double w_eps(const FieldRealization& f, double c_bar, double eps, double x);
/// F_eps(x) = eps^{3/2} Phi(x/eps)
double f_eps(const FieldRealization& f, double eps, double x);
/// k_eps(x) = int_0^x dz / a(z/eps)
double k_eps(const FieldRealization& f, double eps, double x);
/// chi(x) = a_bar K(x) - x (pass a_bar from effective_a)
double corrector_chi(const FieldRealization& f, double a_bar, double x);
/// (Phi(x), Phi'(x))
std::pair<double, double> corrector_phi(const FieldRealization& f, double x);

/// sup over [-R, R] of |W_eps|/(1+|x|)^{1-gamma}, evaluated at the cell
/// breakpoints of the piecewise-linear W_eps plus interior critical points.
double xi_gamma_eps(const FieldRealization& f, double c_bar, double eps, double gamma, double R);

/// E[W_eps(x)^2] = (c_bar^2 eps)^{-1} * 2 int_0^{|x|} (|x|-h) cov_c(h/eps) dh
/// (closed form for the box kernel, composite trapezoid otherwise).
double w_eps_variance(const FieldSpec& spec, double eps, double x);

/// grid of exact corrector values for reporting
struct CorrectorTable {
    std::vector<double> x, chi, phi, phi_prime;
    bool exact_piecewise = true;
};
CorrectorTable tabulate_correctors(const FieldRealization& f, double a_bar, double x_lo,
                                   double x_hi, int n);

}  // namespace homog
