#pragma once

#include <functional>
#include <vector>

#include "homog/field.hpp"
#include "homog/limit.hpp"

namespace homog {

struct Grid1D {
    double x_min = 0.0, x_max = 1.0;
    int n = 2;  // node count

    double h() const { return (x_max - x_min) / (n - 1); }
    double node(int i) const { return x_min + h() * i; }
    void validate() const;
    /// smallest uniform grid over [lo, hi] with spacing <= h_target
    static Grid1D with_spacing(double lo, double hi, double h_target);
};

enum class Scheme { implicit_euler, crank_nicolson };
enum class BoundaryKind { dirichlet_zero, dirichlet_data, reflecting };

struct SolverConfig {
    double dt = 1e-3;
    Scheme scheme = Scheme::crank_nicolson;
    BoundaryKind boundary = BoundaryKind::dirichlet_zero;
    std::function<double(double)> left_data, right_data;  // dirichlet_data only
    std::vector<double> record_times;  // snapshots (final time always kept)
};

/// Symmetric tridiagonal stencil of the finite-volume operator
/// (1/2) d/dx (a du/dx): interface coefficients are harmonic means of the
/// nodal samples, interior row sums vanish (discrete conservation).
struct Tridiagonal {
    std::vector<double> lower, diag, upper;  // lower[0] and upper[n-1] unused
    int n = 0;
    void apply(const std::vector<double>& u, std::vector<double>& out) const;
};

Tridiagonal assemble_divergence(const std::function<double(double)>& a_of_x, const Grid1D& grid,
                                BoundaryKind boundary = BoundaryKind::dirichlet_zero);

/// in-place Thomas solve of (diag, lower, upper) x = rhs
void thomas_solve(const std::vector<double>& lower, std::vector<double> diag,
                  const std::vector<double>& upper, std::vector<double>& rhs);

struct GridSolution {
    Grid1D grid;
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // values[k][i] = u(times[k], node i)
    double min_value = 0.0;                   // over all recorded steps
    bool cn_positivity_bound_ok = true;       // dt within the CN positivity bound

    double mass(std::size_t k) const;  // sum u h
    double at(double x) const;         // final snapshot, linear interpolation
    double at(double t, double x) const;
};

/// Finite-volume solve of the eps-problem: du/dt = 1/2 (a(./eps) u')' +
/// eps^{-1/2} c(./eps) u, Strang splitting with the exact exponential
/// potential step. Grid must resolve the fine scale (h <= eps/16).
GridSolution solve_eps_pde(const FieldRealization& f, double eps,
                           const std::function<double(double)>& g, double T, const Grid1D& grid,
                           const SolverConfig& cfg);

/// Same solver core for general sampled coefficients (tests, the heat
/// regression): du/dt = 1/2 (a u')' + V u.
GridSolution solve_sampled_pde(const std::function<double(double)>& a_of_x,
                               const std::function<double(double)>& potential,
                               const std::function<double(double)>& g, double T,
                               const Grid1D& grid, const SolverConfig& cfg);

/// Mollified potential of the limit problem: W_n = clip(W * rho_n, +-n) with
/// rho_n(y) = n rho(n y), rho the standard C^inf bump on [-1,1]; W_n' from
/// differentiating the convolution (exact against the piecewise-linear W).
struct MollifiedW {
    std::vector<double> wn, wn_prime;
};
MollifiedW mollify_on_grid(const WienerPath& W, int n_moll, const std::vector<double>& xs);

/// Limit problem on [-M, M]: du/dt = (a_bar/2) u'' + c_bar W_n' u. The grid
/// resolves the mollified potential (h <= 1/(8 n_moll)); refine > 1 halves
/// the spacing accordingly (Richardson error estimation).
GridSolution solve_limit_pde(const WienerPath& W, int n_moll,
                             const std::function<double(double)>& g, double T, double M,
                             const SolverConfig& cfg, double a_bar, double c_bar,
                             int refine = 1);

/// Conservative Gaussian-tail domain radius: sqrt(2 a_hi t ln(1/tol)) + 2.
double truncation_radius(double t, double tol, double a_hi);

}  // namespace homog
