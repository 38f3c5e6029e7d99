#pragma once

#include <functional>
#include <vector>

#include "homog/field.hpp"
#include "homog/rng.hpp"

namespace homog {

/// default step-bound constant: dt <= c_dt eps^2 / a_hi (calibrated by the
/// refinement acceptance runs)
inline constexpr double kDefaultCdt = 0.005;
/// step bound for limit (eps = 0) paths
inline constexpr double kLimitDtMax = 1e-3;

struct PathConfig {
    double eps = 0.0;  // 0 means limit path
    double x0 = 0.0;
    double T = 1.0;
    double dt = 1e-3;
    double c_dt = kDefaultCdt;

    double dt_max(double a_hi) const;
    void validate(double a_hi) const;  // throws if dt violates the bound
};

struct Trajectory {
    double eps = 0.0;
    double dt = 0.0;
    double x0 = 0.0;
    std::vector<double> X;   // positions on the uniform grid, size steps()+1
    std::vector<double> Z;   // martingale coordinates (eps > 0 only)
    std::vector<double> dB;  // Brownian increments used, size steps()

    std::size_t steps() const { return dB.size(); }
    double t_final() const { return dt * static_cast<double>(steps()); }
};

/// Streaming Euler stepper for the quenched diffusion in martingale
/// coordinates: dZ = (a_bar/sqrt(a(X/eps))) dB, X = psi^{-1}(Z) with
/// psi(x) = x + eps chi(x/eps) = a_bar eps K(x/eps). The box-kernel inverse
/// is the exact per-cell linear solve reached by walking cells; the generic
/// (triangle) inverse falls back to bracketed bisection with
/// psi' in [a_bar/a_hi, a_bar/a_lo].
class QuenchedStepper {
public:
    QuenchedStepper(const FieldRealization& f, double eps, double a_bar, double x0);

    /// advance one step; returns the Z increment
    double step(double dt, RngStream& rng);
    double x() const { return x_; }
    double z() const { return z_; }
    double a_local() const;         // a(x/eps) at the current position
    double last_db() const { return db_; }

    double psi(double x) const;
    double psi_inverse(double z, double x_hint) const;  // bisection route

private:
    const FieldRealization& f_;
    double eps_, a_bar_, inv_eps_;
    double x_, z_;
    double db_ = 0.0;
    std::int64_t cell_ = 0;  // current a-cell of x/eps (box kernel)
    bool box_;
};

/// Quenched diffusion via Euler on Z plus exact psi-inversion. Requires
/// eps > 0 and dt within the step bound.
Trajectory simulate_quenched(const FieldRealization& f, const PathConfig& cfg, double a_bar,
                             RngStream& rng);

/// x0 + sqrt(a_bar) B_t sampled exactly on the grid (eps = 0).
Trajectory simulate_limit_path(const PathConfig& cfg, double a_bar, RngStream& rng);

/// Time-occupation density: L(y) with int f(X_s) ds = int f(y) L(y) dy.
/// Bins of width delta anchored at integer multiples; each dt-interval is
/// distributed over the bins its segment overlaps (trapezoidal assignment).
struct LocalTimeProfile {
    double delta = 0.0;
    std::int64_t first_bin = 0;          // bin j covers [j delta, (j+1) delta)
    std::vector<double> density;         // values L at bins first_bin..
    static constexpr const char* kConvention = "time-occupation density";

    double bin_center(std::size_t i) const {
        return (static_cast<double>(first_bin) + static_cast<double>(i) + 0.5) * delta;
    }
    double total_mass() const;           // sum L delta = elapsed time
    double value_at(double y) const;     // linear interpolation of bin values
    double support_lo() const { return static_cast<double>(first_bin) * delta; }
    double support_hi() const {
        return (static_cast<double>(first_bin) + static_cast<double>(density.size())) * delta;
    }
};

LocalTimeProfile local_time(const Trajectory& traj, double delta);

/// h_eps(t) = int_0^t ds / a(X_s/eps), left-endpoint sum; curve on the grid.
std::vector<double> h_eps(const Trajectory& traj, const FieldRealization& f);

/// Y via the definition: eps^{-1/2} int_0^t c(X_s/eps) ds, left-endpoint sum.
double y_eps_direct(const Trajectory& traj, const FieldRealization& f);

/// Y via the corrector identity:
/// 2 c_bar [ int_x^{X_t} W_eps(y)/a(y/eps) dy - (1/a_bar) sum W_eps(X_k) dZ_k ],
/// spatial part exact cellwise (= 2(F_eps(X_t) - F_eps(x0))), stochastic part
/// left-point (Ito).
double y_eps_identity(const Trajectory& traj, const FieldRealization& f, double a_bar,
                      double c_bar);

struct FkEstimate {
    double value = 0.0;
    double se = 0.0;
    double max_share = 0.0;  // largest summand / total: heavy-tail guard
};

/// Monte Carlo Feynman-Kac average E[g(X_t) exp(Y_t)] over quenched paths.
FkEstimate feynman_kac_u_eps(const FieldRealization& f, double eps, double t, double x,
                             const std::function<double(double)>& g, int n_paths,
                             std::uint64_t path_key, double c_dt = kDefaultCdt);

}  // namespace homog
