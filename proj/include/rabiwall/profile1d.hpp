#pragma once

// Heteroclinic domain-wall profiles in one dimension: the boundary-value
// problem U'' = W_u(U,V), V'' = W_v(U,V) on [-L,L] with Dirichlet data
// (a,b) / (b,a), solved by damped Newton on the central-difference
// discretization, plus the exact alpha = 2 tanh profile used as oracle and
// initial guess.
//
// The truncated problem has a near-flat translation valley (the continuum
// family of shifted walls), so the converged iterate is only pinned up to an
// exponentially soft shift.  Output is therefore re-centered: the U = V
// crossing is moved to the middle node by fractional-shift resampling with an
// 8-point Lagrange interpolant.

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "rabiwall/common.hpp"
#include "rabiwall/grid.hpp"
#include "rabiwall/potential.hpp"

namespace rabiwall {

struct Profile1D {
    Grid1D grid;
    std::vector<double> U, V;
    double residual_inf = 0.0;
    int newton_iters = 0;
};

struct ProfileOptions {
    double tol = 1e-10;       // residual_inf convergence target
    int max_iters = 50;
    double mono_tol = 1e-12;  // tolerated forward-difference violation in flat tails
    bool recenter = true;
};

// Exact solution for alpha = 2, 0 < omega < 1:
//   U = (s + d*tanh(kappa t))/2,  V = (s - d*tanh(kappa t))/2
// with s = sqrt(1+omega), d = b - a = sqrt(1-omega), kappa = sqrt((1-omega)/2).
// u+v == s identically and (u-v)/d solves the scaled Allen-Cahn equation.
inline std::array<double, 2> analytic_profile_alpha2(double omega, double t) {
    if (!(omega > 0.0 && omega < 1.0))
        throw ParamsOutOfRange("analytic_profile_alpha2: require 0 < omega < 1");
    const double s = std::sqrt(1.0 + omega);
    const double d = std::sqrt(1.0 - omega);
    const double kappa = std::sqrt((1.0 - omega) / 2.0);
    const double th = std::tanh(kappa * t);
    return {0.5 * (s + d * th), 0.5 * (s - d * th)};
}

inline double analytic_profile_alpha2_du(double omega, double t) {
    const double d = std::sqrt(1.0 - omega);
    const double kappa = std::sqrt((1.0 - omega) / 2.0);
    const double c = std::cosh(kappa * t);
    return 0.5 * d * kappa / (c * c);
}

// Heuristic decay rate used for truncation checks and the seed shape:
// sqrt((1 - 2 omega/alpha)/2), the root-gap form; at alpha = 2 this is the
// exact tanh rate sqrt((1-omega)/2).
inline double profile_decay_rate(double alpha, double omega) {
    return std::sqrt(std::max(1.0 - 2.0 * omega / alpha, 1e-12) / 2.0);
}

// tanh ansatz rescaled to the (a,b) endpoints of the given parameters;
// exact for alpha = 2, a Newton seed otherwise.
inline Profile1D seed_profile(const Params& params, const Grid1D& grid, double shift = 0.0) {
    Profile1D p;
    p.grid = grid;
    p.U.resize(grid.n);
    p.V.resize(grid.n);
    const double s = params.a + params.b;
    const double d = params.b - params.a;
    const double kappa = profile_decay_rate(params.alpha, params.omega);
    for (int k = 0; k < grid.n; ++k) {
        const double th = std::tanh(kappa * (grid.t(k) - shift));
        p.U[k] = 0.5 * (s + d * th);
        p.V[k] = 0.5 * (s - d * th);
    }
    p.U.front() = params.a; p.V.front() = params.b;
    p.U.back() = params.b;  p.V.back() = params.a;
    return p;
}

namespace detail {

// Block-tridiagonal elimination for the Newton systems: 2x2 blocks, constant
// off-diagonal blocks (1/h^2) I.  Forward elimination, back substitution.
struct BlockTridiag {
    // diag blocks d[k] = [[duu, duv], [duv, dvv]], rhs pairs (ru, rv)
    std::vector<double> duu, duv, dvv, ru, rv;

    explicit BlockTridiag(int m) : duu(m), duv(m), dvv(m), ru(m), rv(m) {}

    // Solves the system in place; off-diagonal scalar coupling is off*I.
    void solve(double off) {
        const int m = static_cast<int>(duu.size());
        for (int k = 1; k < m; ++k) {
            // invert previous pivot block
            const double det = duu[k - 1] * dvv[k - 1] - duv[k - 1] * duv[k - 1];
            const double iuu = dvv[k - 1] / det, ivv = duu[k - 1] / det, iuv = -duv[k - 1] / det;
            // L = off*I * inv(pivot); subtract L * (off*I) from this diag block
            const double o2 = off * off;
            duu[k] -= o2 * iuu;
            duv[k] -= o2 * iuv;
            dvv[k] -= o2 * ivv;
            // rhs update: r_k -= off * inv(pivot) * r_{k-1}
            const double su = iuu * ru[k - 1] + iuv * rv[k - 1];
            const double sv = iuv * ru[k - 1] + ivv * rv[k - 1];
            ru[k] -= off * su;
            rv[k] -= off * sv;
        }
        for (int k = m - 1; k >= 0; --k) {
            if (k < m - 1) {
                ru[k] -= off * ru[k + 1];
                rv[k] -= off * rv[k + 1];
            }
            const double det = duu[k] * dvv[k] - duv[k] * duv[k];
            const double su = (dvv[k] * ru[k] - duv[k] * rv[k]) / det;
            const double sv = (-duv[k] * ru[k] + duu[k] * rv[k]) / det;
            ru[k] = su;
            rv[k] = sv;
        }
    }
};

inline void profile_residual(const Profile1D& p, const Params& params,
                             std::vector<double>& FU, std::vector<double>& FV) {
    const int n = p.grid.n;
    const double ih2 = 1.0 / sq(p.grid.h());
    FU.assign(n, 0.0);
    FV.assign(n, 0.0);
    for (int k = 1; k < n - 1; ++k) {
        const auto g = potential_gradient({p.U[k], p.V[k]}, params);
        FU[k] = (p.U[k - 1] - 2.0 * p.U[k] + p.U[k + 1]) * ih2 - g[0];
        FV[k] = (p.V[k - 1] - 2.0 * p.V[k] + p.V[k + 1]) * ih2 - g[1];
    }
}

inline double inf_norm2(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    for (double x : b) m = std::max(m, std::abs(x));
    return m;
}

inline double l2_norm2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (double x : a) s += x * x;
    for (double x : b) s += x * x;
    return std::sqrt(s);
}

// Value of the degree-7 Lagrange interpolant through y[i0..i0+7] at x
// (node-index units).
inline double lagrange8(const std::vector<double>& y, int i0, double x) {
    double val = 0.0;
    for (int j = 0; j < 8; ++j) {
        double lj = 1.0;
        for (int l = 0; l < 8; ++l)
            if (l != j) lj *= (x - (i0 + l)) / double(j - l);
        val += y[i0 + j] * lj;
    }
    return val;
}

} // namespace detail

// Extremal discrete slopes: (min forward difference of U, max forward
// difference of V).  Monotone profiles have min > 0 and max < 0.
inline std::array<double, 2> check_monotone(const Profile1D& p) {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < p.grid.n; ++k) {
        mn = std::min(mn, p.U[k + 1] - p.U[k]);
        mx = std::max(mx, p.V[k + 1] - p.V[k]);
    }
    return {mn, mx};
}

// Shift the profile so the U = V crossing sits at the middle node.  The shift
// is fractional: values are resampled with an 8-point Lagrange interpolant;
// nodes pushed past the window edge take the Dirichlet constants (the tails
// are exponentially flat there).
inline void recenter_profile(Profile1D& p, const Params& params) {
    const int n = p.grid.n;
    const int mid = p.grid.mid();
    std::vector<double> D(n);
    for (int k = 0; k < n; ++k) D[k] = p.U[k] - p.V[k];
    // bracket the crossing nearest the middle node (D runs from a-b<0 to b-a>0)
    int k0 = -1;
    for (int k = 0; k + 1 < n; ++k) {
        if (D[k] <= 0.0 && D[k + 1] > 0.0 &&
            (k0 < 0 || std::abs(k - mid) < std::abs(k0 - mid)))
            k0 = k;
    }
    if (k0 < 0) return; // no crossing: leave untouched (non-wall data)
    const int i0 = std::clamp(k0 - 3, 0, n - 8);
    double lo = k0, hi = k0 + 1;
    for (int it = 0; it < 80; ++it) {
        const double mid2 = 0.5 * (lo + hi);
        (detail::lagrange8(D, i0, mid2) <= 0.0 ? lo : hi) = mid2;
    }
    const double shift = 0.5 * (lo + hi) - mid; // node units
    if (shift == 0.0) return;
    auto resample = [&](const std::vector<double>& y, double endL, double endR) {
        std::vector<double> out(n);
        for (int k = 0; k < n; ++k) {
            const double x = k + shift;
            if (x <= 0.0) { out[k] = endL; continue; }
            if (x >= n - 1) { out[k] = endR; continue; }
            const int j0 = std::clamp(static_cast<int>(std::floor(x)) - 3, 0, n - 8);
            out[k] = detail::lagrange8(y, j0, x);
        }
        return out;
    };
    p.U = resample(p.U, params.a, params.b);
    p.V = resample(p.V, params.b, params.a);
    p.U.front() = params.a; p.V.front() = params.b;
    p.U.back() = params.b;  p.V.back() = params.a;
}

// Damped Newton iteration on the discretized BVP.  Initialization defaults to
// the rescaled tanh ansatz; an explicit `init` overrides it (its interior is
// copied, the Dirichlet rows are reimposed).
inline Profile1D solve_profile(const Params& params, const Grid1D& grid,
                               const std::optional<Profile1D>& init = std::nullopt,
                               const ProfileOptions& opts = {}) {
    Profile1D p = init ? *init : seed_profile(params, grid);
    if (init) {
        if (p.grid.n != grid.n) throw GridMismatch("solve_profile: init grid size mismatch");
        p.grid = grid;
        p.U.front() = params.a; p.V.front() = params.b;
        p.U.back() = params.b;  p.V.back() = params.a;
    }
    const int n = grid.n;
    const int m = n - 2;
    const double ih2 = 1.0 / sq(grid.h());
    std::vector<double> FU, FV, FU2, FV2;
    detail::profile_residual(p, params, FU, FV);
    double res = detail::inf_norm2(FU, FV);
    int it = 0;
    // When the window is long relative to the decay length, the translation
    // mode makes the Jacobian numerically singular; a Levenberg-Marquardt
    // shift is switched on only when the plain Newton step fails to decrease
    // the residual.
    double lm = 0.0;
    for (; it < opts.max_iters && res > opts.tol; ++it) {
        detail::BlockTridiag sys(m);
        for (int k = 0; k < m; ++k) {
            const auto H = potential_hessian({p.U[k + 1], p.V[k + 1]}, params);
            sys.duu[k] = -2.0 * ih2 - H.w_uu - lm;
            sys.duv[k] = -H.w_uv;
            sys.dvv[k] = -2.0 * ih2 - H.w_vv - lm;
            sys.ru[k] = -FU[k + 1];
            sys.rv[k] = -FV[k + 1];
        }
        sys.solve(ih2);
        // Armijo backtracking on the residual 2-norm
        const double f0 = detail::l2_norm2(FU, FV);
        Profile1D trial = p;
        double lambda = 1.0;
        bool improved = false;
        for (int halvings = 0; halvings <= 20; ++halvings) {
            for (int k = 0; k < m; ++k) {
                trial.U[k + 1] = p.U[k + 1] + lambda * sys.ru[k];
                trial.V[k + 1] = p.V[k + 1] + lambda * sys.rv[k];
            }
            detail::profile_residual(trial, params, FU2, FV2);
            const double f1 = detail::l2_norm2(FU2, FV2);
            if (finite(f1) && f1 <= (1.0 - 1e-4 * lambda) * f0) {
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) {
            lm = (lm == 0.0) ? 1e-8 * (2.0 * ih2 + 1.0) : lm * 100.0;
            if (lm > 1e6 * ih2)
                throw NoConvergence("solve_profile: line search stalled, residual " +
                                        std::to_string(res),
                                    res);
            continue;
        }
        lm *= 0.01;
        if (lm < 1e-8 * ih2) lm = 0.0;
        p.U.swap(trial.U);
        p.V.swap(trial.V);
        FU.swap(FU2);
        FV.swap(FV2);
        res = detail::inf_norm2(FU, FV);
        if (!finite(res)) throw NoConvergence("solve_profile: residual became non-finite", res);
    }
    if (res > opts.tol)
        throw NoConvergence("solve_profile: no convergence after " +
                                std::to_string(opts.max_iters) +
                                " iterations, residual " + std::to_string(res),
                            res);
    p.newton_iters = it;
    if (opts.recenter) recenter_profile(p, params);
    detail::profile_residual(p, params, FU, FV);
    p.residual_inf = detail::inf_norm2(FU, FV);
    const auto mono = check_monotone(p);
    if (mono[0] < -opts.mono_tol || mono[1] > opts.mono_tol)
        throw MonotonicityLost("solve_profile: converged iterate violates discrete monotonicity"
                               " (min dU=" + std::to_string(mono[0]) +
                               ", max dV=" + std::to_string(mono[1]) + ")");
    return p;
}

// Continuation in alpha with steps <= 0.25, seeded at alpha = 2 when omega
// permits (the exactly known case), otherwise just above the admissibility
// edge 2*omega.  Each step remaps the previous solution affinely onto the new
// (a,b) endpoints.
inline Profile1D solve_profile_continued(double alpha, double omega, const Grid1D& grid,
                                         const ProfileOptions& opts = {}) {
    validate_params(alpha, omega);
    double alpha0 = (omega < 1.0) ? 2.0 : std::min(alpha, 2.0 * omega * 1.05);
    Params cur = validate_params(alpha0, omega);
    Profile1D p = solve_profile(cur, grid, std::nullopt, opts);
    while (cur.alpha != alpha) {
        const double next = (alpha > cur.alpha) ? std::min(alpha, cur.alpha + 0.25)
                                                : std::max(alpha, cur.alpha - 0.25);
        const Params np = validate_params(next, omega);
        const double scale = (np.b - np.a) / (cur.b - cur.a);
        Profile1D seed = p;
        for (int k = 0; k < grid.n; ++k) {
            seed.U[k] = np.a + (p.U[k] - cur.a) * scale;
            seed.V[k] = np.b + (p.V[k] - cur.b) * scale;
        }
        p = solve_profile(np, grid, seed, opts);
        cur = np;
    }
    return p;
}

// 1D Ginzburg-Landau energy of the sampled profile: trapezoidal quadrature of
// (U'^2 + V'^2)/2 + W with central differences inside and one-sided ends.
inline double profile_energy(const Profile1D& p, const Params& params) {
    const int n = p.grid.n;
    const double h = p.grid.h();
    std::vector<double> dens(n);
    for (int k = 0; k < n; ++k) {
        double du, dv;
        if (k == 0) {
            du = (p.U[1] - p.U[0]) / h;
            dv = (p.V[1] - p.V[0]) / h;
        } else if (k == n - 1) {
            du = (p.U[n - 1] - p.U[n - 2]) / h;
            dv = (p.V[n - 1] - p.V[n - 2]) / h;
        } else {
            du = (p.U[k + 1] - p.U[k - 1]) / (2.0 * h);
            dv = (p.V[k + 1] - p.V[k - 1]) / (2.0 * h);
        }
        dens[k] = 0.5 * (du * du + dv * dv) + potential_value({p.U[k], p.V[k]}, params);
    }
    double e = 0.0;
    for (int k = 0; k + 1 < n; ++k) e += 0.5 * h * (dens[k] + dens[k + 1]);
    return e;
}

} // namespace rabiwall
