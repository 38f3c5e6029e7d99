#include "homog/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace homog {

void Grid1D::validate() const {
    if (!(x_max > x_min) || n < 3) throw std::invalid_argument("Grid1D: degenerate grid");
}

Grid1D Grid1D::with_spacing(double lo, double hi, double h_target) {
    if (!(hi > lo) || !(h_target > 0.0)) throw std::invalid_argument("Grid1D: bad range");
    const int n = static_cast<int>(std::ceil((hi - lo) / h_target)) + 1;
    return {lo, hi, std::max(n, 3)};
}

void Tridiagonal::apply(const std::vector<double>& u, std::vector<double>& out) const {
    out.resize(u.size());
    out[0] = diag[0] * u[0] + upper[0] * u[1];
    for (int i = 1; i < n - 1; ++i)
        out[i] = lower[i] * u[i - 1] + diag[i] * u[i] + upper[i] * u[i + 1];
    out[n - 1] = lower[n - 1] * u[n - 2] + diag[n - 1] * u[n - 1];
}

Tridiagonal assemble_divergence(const std::function<double(double)>& a_of_x, const Grid1D& grid,
                                BoundaryKind boundary) {
    grid.validate();
    const int n = grid.n;
    const double h = grid.h();
    const double inv = 1.0 / (2.0 * h * h);
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) {
        a[i] = a_of_x(grid.node(i));
        if (!(a[i] > 0.0)) throw std::invalid_argument("assemble_divergence: a must be positive");
    }
    std::vector<double> w(n - 1);  // interface coefficient between nodes i, i+1
    for (int i = 0; i + 1 < n; ++i) w[i] = 2.0 / (1.0 / a[i] + 1.0 / a[i + 1]);

    Tridiagonal L;
    L.n = n;
    L.lower.assign(n, 0.0);
    L.diag.assign(n, 0.0);
    L.upper.assign(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) {
        L.lower[i] = w[i - 1] * inv;
        L.upper[i] = w[i] * inv;
        L.diag[i] = -(w[i - 1] + w[i]) * inv;
    }
    if (boundary == BoundaryKind::reflecting) {
        // zero-flux edges keep the telescoping flux sum conservative
        L.upper[0] = w[0] * inv;
        L.diag[0] = -w[0] * inv;
        L.lower[n - 1] = w[n - 2] * inv;
        L.diag[n - 1] = -w[n - 2] * inv;
    }
    // Dirichlet variants: boundary rows stay zero; the stepper pins the values
    return L;
}

void thomas_solve(const std::vector<double>& lower, std::vector<double> diag,
                  const std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) throw std::runtime_error("thomas_solve: zero pivot");
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0) throw std::runtime_error("thomas_solve: zero pivot");
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i > 0; --i)
        rhs[i - 1] = (rhs[i - 1] - upper[i - 1] * rhs[i]) / diag[i - 1];
}

double GridSolution::mass(std::size_t k) const {
    double s = 0.0;
    for (double v : values[k]) s += v;
    return s * grid.h();
}

double GridSolution::at(double x) const { return at(times.back(), x); }

double GridSolution::at(double t, double x) const {
    std::size_t k = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double d = std::abs(times[i] - t);
        if (d < best) {
            best = d;
            k = i;
        }
    }
    const double pos = (x - grid.x_min) / grid.h();
    if (pos < -1e-9 || pos > grid.n - 1 + 1e-9)
        throw std::out_of_range("GridSolution::at: x outside the grid");
    const auto i = std::min(static_cast<std::size_t>(std::max(0.0, pos)),
                            static_cast<std::size_t>(grid.n - 2));
    const double f = pos - static_cast<double>(i);
    return values[k][i] * (1.0 - f) + values[k][i + 1] * f;
}

namespace {

GridSolution run_parabolic(const Tridiagonal& L, const std::vector<double>& potential,
                           const std::function<double(double)>& g, double T, const Grid1D& grid,
                           const SolverConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be positive");
    const int n = grid.n;
    const auto nsteps = static_cast<std::size_t>(std::llround(std::ceil(T / cfg.dt - 1e-12)));
    const double dt = T / static_cast<double>(nsteps);

    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) u[i] = g(grid.node(i));

    // exact half-step potential multiplier
    std::vector<double> emul(n);
    for (int i = 0; i < n; ++i) emul[i] = std::exp(0.5 * dt * potential[i]);

    const double theta = cfg.scheme == Scheme::crank_nicolson ? 0.5 : 1.0;
    // implicit matrix I - theta dt L and explicit matrix I + (1-theta) dt L
    std::vector<double> il(n), id(n), iu(n);
    for (int i = 0; i < n; ++i) {
        il[i] = -theta * dt * L.lower[i];
        id[i] = 1.0 - theta * dt * L.diag[i];
        iu[i] = -theta * dt * L.upper[i];
    }
    const bool dirichlet = cfg.boundary != BoundaryKind::reflecting;
    if (dirichlet) {
        id[0] = 1.0;
        iu[0] = 0.0;
        il[n - 1] = 0.0;
        id[n - 1] = 1.0;
    }

    GridSolution out;
    out.grid = grid;
    out.cn_positivity_bound_ok = true;
    if (cfg.scheme == Scheme::crank_nicolson) {
        double worst = 0.0;
        for (int i = 1; i + 1 < n; ++i) worst = std::max(worst, -L.diag[i]);
        out.cn_positivity_bound_ok = 0.5 * dt * worst <= 1.0 + 1e-12;
    }
    double min_u = u[0];
    std::vector<double> rhs(n), tmp(n);

    std::vector<double> want = cfg.record_times;
    std::sort(want.begin(), want.end());
    std::size_t want_idx = 0;
    auto record = [&](double t) {
        out.times.push_back(t);
        out.values.push_back(u);
    };

    if (cfg.boundary == BoundaryKind::dirichlet_data && (!cfg.left_data || !cfg.right_data))
        throw std::invalid_argument("SolverConfig: dirichlet_data needs boundary curves");

    for (std::size_t k = 0; k < nsteps; ++k) {
        const double t_new = dt * static_cast<double>(k + 1);
        for (int i = 0; i < n; ++i) u[i] *= emul[i];
        if (theta < 1.0) {
            // explicit part
            L.apply(u, tmp);
            for (int i = 0; i < n; ++i) rhs[i] = u[i] + (1.0 - theta) * dt * tmp[i];
        } else {
            rhs = u;
        }
        if (dirichlet) {
            double lv = 0.0, rv = 0.0;
            if (cfg.boundary == BoundaryKind::dirichlet_data) {
                // impose in split space: the trailing half-potential multiply
                // must land exactly on the data at t_new
                lv = cfg.left_data(t_new) / emul[0];
                rv = cfg.right_data(t_new) / emul[n - 1];
            }
            rhs[0] = lv;
            rhs[n - 1] = rv;
        }
        thomas_solve(il, id, iu, rhs);
        u = rhs;
        for (int i = 0; i < n; ++i) u[i] *= emul[i];
        for (double v : u) min_u = std::min(min_u, v);
        while (want_idx < want.size() && want[want_idx] <= t_new + 0.5 * dt) {
            record(t_new);
            ++want_idx;
        }
    }
    if (out.times.empty() || out.times.back() != T) record(T);
    out.min_value = min_u;
    return out;
}

}  // namespace

GridSolution solve_sampled_pde(const std::function<double(double)>& a_of_x,
                               const std::function<double(double)>& potential,
                               const std::function<double(double)>& g, double T,
                               const Grid1D& grid, const SolverConfig& cfg) {
    const Tridiagonal L = assemble_divergence(a_of_x, grid, cfg.boundary);
    std::vector<double> pot(grid.n);
    for (int i = 0; i < grid.n; ++i) pot[i] = potential(grid.node(i));
    return run_parabolic(L, pot, g, T, grid, cfg);
}

GridSolution solve_eps_pde(const FieldRealization& f, double eps,
                           const std::function<double(double)>& g, double T, const Grid1D& grid,
                           const SolverConfig& cfg) {
    if (!(eps > 0.0)) throw std::invalid_argument("solve_eps_pde: eps must be positive");
    grid.validate();
    if (grid.h() > eps / 16.0 + 1e-15)
        throw std::invalid_argument(
            "solve_eps_pde: grid too coarse for the fine scale (need h <= eps/16)");
    f.ensure_cover(grid.x_min / eps - 2.0, grid.x_max / eps + 2.0);
    const double inv_sqeps = 1.0 / std::sqrt(eps);
    return solve_sampled_pde([&](double x) { return f.eval_a(x / eps); },
                             [&](double x) { return inv_sqeps * f.eval_c(x / eps); }, g, T, grid,
                             cfg);
}

namespace {

double bump_raw(double y) { return std::abs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0; }

// normalization of the standard bump, int_{-1}^{1} e^{-1/(1-y^2)} dy
const double kBumpNorm = [] {
    // 64-panel composite Simpson is plenty for this C^inf integrand
    const int n = 128;
    const double h = 2.0 / n;
    double s = bump_raw(-1.0) + bump_raw(1.0);
    for (int i = 1; i < n; ++i) s += bump_raw(-1.0 + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}();

}  // namespace

MollifiedW mollify_on_grid(const WienerPath& W, int n_moll, const std::vector<double>& xs) {
    if (n_moll < 1) throw std::invalid_argument("mollify_on_grid: n_moll must be >= 1");
    if (W.delta() >= 1.0 / n_moll)
        throw std::invalid_argument(
            "mollify_on_grid: W grid must be finer than the mollification width 1/n");
    const double width = 1.0 / n_moll;
    // 48-point Gauss-Legendre over the support of rho_n
    static constexpr int kQ = 48;
    static const auto nodes = [] {
        // Newton iteration on Legendre P_48 roots
        std::array<std::pair<double, double>, kQ> nw{};
        const int m = kQ;
        for (int i = 0; i < m; ++i) {
            double x = std::cos(3.14159265358979323846 * (i + 0.75) / (m + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= m; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = m * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = m * (x * p1 - p0) / (x * x - 1.0);
            nw[static_cast<std::size_t>(i)] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
        }
        return nw;
    }();

    const double dW = W.delta();
    MollifiedW out;
    out.wn.resize(xs.size());
    out.wn_prime.resize(xs.size());
    const double clip = static_cast<double>(n_moll);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double v = 0.0, d = 0.0;
        for (const auto& [q, wq] : nodes) {
            const double s = q * width;                    // offset in [-1/n, 1/n]
            const double rho = bump_raw(q) / kBumpNorm;    // rho(q), scaled below
            const double z = xs[i] - s;
            v += wq * rho * W.value(z);
            // W' is piecewise constant: slope of the W segment containing z
            const double pos = (z - W.y_first()) / dW;
            const auto j = std::min(static_cast<std::size_t>(std::max(0.0, pos)), W.size() - 2);
            d += wq * rho * (W.values()[j + 1] - W.values()[j]) / dW;
        }
        // nodes/weights live on [-1,1]; rho_n(s) ds = rho(q) dq
        out.wn[i] = std::clamp(v, -clip, clip);
        out.wn_prime[i] = (std::abs(v) >= clip) ? 0.0 : d;
    }
    return out;
}

GridSolution solve_limit_pde(const WienerPath& W, int n_moll,
                             const std::function<double(double)>& g, double T, double M,
                             const SolverConfig& cfg, double a_bar, double c_bar, int refine) {
    if (!(M > 0.0)) throw std::invalid_argument("solve_limit_pde: need M > 0");
    if (refine < 1) throw std::invalid_argument("solve_limit_pde: refine must be >= 1");
    if (!W.covers(-M - 1.0 / n_moll, M + 1.0 / n_moll))
        throw std::invalid_argument("solve_limit_pde: W must cover [-M, M] plus the mollifier");
    // resolve the mollified potential: h at most 1/(8 n_moll)
    const double h_target = std::min(1.0 / (8.0 * n_moll), M / 64.0) / refine;
    const Grid1D grid = Grid1D::with_spacing(-M, M, h_target);
    std::vector<double> xs(static_cast<std::size_t>(grid.n));
    for (int i = 0; i < grid.n; ++i) xs[static_cast<std::size_t>(i)] = grid.node(i);
    const MollifiedW mw = mollify_on_grid(W, n_moll, xs);

    const Tridiagonal L = assemble_divergence([&](double) { return a_bar; }, grid, cfg.boundary);
    std::vector<double> pot(static_cast<std::size_t>(grid.n));
    for (int i = 0; i < grid.n; ++i)
        pot[static_cast<std::size_t>(i)] = c_bar * mw.wn_prime[static_cast<std::size_t>(i)];
    return run_parabolic(L, pot, g, T, grid, cfg);
}

double truncation_radius(double t, double tol, double a_hi) {
    if (!(tol > 0.0 && tol <= 1.0)) throw std::invalid_argument("truncation_radius: bad tol");
    return std::sqrt(2.0 * a_hi * t * std::log(1.0 / tol)) + 2.0;
}

}  // namespace homog
