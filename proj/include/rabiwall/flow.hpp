#pragma once

// Gradient flow  u_t = Lap u - W_u,  v_t = Lap v - W_v  on a 2D grid, used to
// relax initial data toward solutions of the elliptic system, plus the
// diagnostics that probe one-dimensionality of the converged state: limiting
// profiles, slope-field constancy, the alpha = 2 decoupling identity and a
// level-set flatness metric.
//
// Time stepping is semi-implicit: the Laplacian is treated implicitly, the
// nonlinearity explicitly from the old state (both components use the same
// old state, which keeps the alpha = 2 sum identity exact).  The Helmholtz
// solve (I - dt Lap_h) is diagonalized along x1 by an FFT (periodic) or a
// DST-I (Dirichlet) and reduces to one precomputed tridiagonal solve per
// mode along x2.  x2 must be Dirichlet; boundary rows stay frozen at their
// initial values.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rabiwall/common.hpp"
#include "rabiwall/energy.hpp"
#include "rabiwall/grid.hpp"
#include "rabiwall/linearized.hpp"
#include "rabiwall/potential.hpp"

namespace rabiwall {

struct EnergySample {
    long step = 0;
    double time = 0.0;
    double J = 0.0;
};

struct FlowState {
    Field field;
    double time = 0.0;
    long step_count = 0;
    double dt = 0.1;
    std::vector<EnergySample> energy_history;
    std::vector<std::string> warnings;
};

struct FlowOptions {
    int energy_every = 10;            // sampling cadence in steps
    double energy_tol_per_step = 1e-10;
    double admissible_tol = 1e-6;
    bool check_energy = true;
};

namespace detail {

// Shared Helmholtz solver: (1 + dt*mu_k) along x1 modes, tridiagonal in x2.
class SpectralHelmholtz {
public:
    SpectralHelmholtz(const Field& f, double dt)
        : n1_(f.n1), n2_(f.n2), nj_(f.n2 - 2), h_(f.h), dt_(dt),
          periodic1_(f.bc1 == BcKind::Periodic) {
        if (f.dims != 2) throw GridMismatch("flow: 2D field required");
        if (f.bc2 != BcKind::Dirichlet)
            throw Error("flow: x2 boundary must be Dirichlet");
        if (!periodic1_ && f.bc1 != BcKind::Dirichlet)
            throw Error("flow: x1 boundary must be periodic or Dirichlet");
        if (nj_ < 1) throw GridMismatch("flow: grid too small");
        nm_ = periodic1_ ? n1_ / 2 + 1 : n1_ - 2;
        mw_ = periodic1_ ? n1_ : n1_ - 2; // transform width in real space
        real_ = fftw_alloc_real(static_cast<std::size_t>(nj_) * mw_);
        if (periodic1_) {
            cplx_ = fftw_alloc_complex(static_cast<std::size_t>(nj_) * nm_);
            int n = n1_;
            fwd_ = fftw_plan_many_dft_r2c(1, &n, nj_, real_, nullptr, 1, n1_,
                                          cplx_, nullptr, 1, nm_, FFTW_ESTIMATE);
            bwd_ = fftw_plan_many_dft_c2r(1, &n, nj_, cplx_, nullptr, 1, nm_,
                                          real_, nullptr, 1, n1_, FFTW_ESTIMATE);
        } else {
            int n = mw_;
            const fftw_r2r_kind kind = FFTW_RODFT00;
            fwd_ = fftw_plan_many_r2r(1, &n, nj_, real_, nullptr, 1, mw_,
                                      real_, nullptr, 1, mw_, &kind, FFTW_ESTIMATE);
            bwd_ = fwd_; // DST-I is its own inverse up to 2(m+1)
        }
        // mode eigenvalues of -d^2/dx1^2 and tridiagonal factors along x2
        mu_.resize(nm_);
        for (int k = 0; k < nm_; ++k) {
            const double angle = periodic1_ ? 2.0 * M_PI * k / n1_
                                            : M_PI * (k + 1) / (mw_ + 1);
            mu_[k] = (2.0 - 2.0 * std::cos(angle)) / (h_ * h_);
        }
        const double e = -dt_ / (h_ * h_); // off-diagonal
        off_ = e;
        cp_.assign(static_cast<std::size_t>(nm_) * nj_, 0.0);
        inv_.assign(static_cast<std::size_t>(nm_) * nj_, 0.0);
        for (int k = 0; k < nm_; ++k) {
            const double diag = 1.0 + dt_ * mu_[k] + 2.0 * dt_ / (h_ * h_);
            double* cp = &cp_[static_cast<std::size_t>(k) * nj_];
            double* iv = &inv_[static_cast<std::size_t>(k) * nj_];
            iv[0] = 1.0 / diag;
            cp[0] = e * iv[0];
            for (int j = 1; j < nj_; ++j) {
                iv[j] = 1.0 / (diag - e * cp[j - 1]);
                cp[j] = e * iv[j];
            }
        }
    }

    SpectralHelmholtz(const SpectralHelmholtz&) = delete;
    SpectralHelmholtz& operator=(const SpectralHelmholtz&) = delete;

    ~SpectralHelmholtz() {
        if (periodic1_) {
            fftw_destroy_plan(fwd_);
            fftw_destroy_plan(bwd_);
            fftw_free(cplx_);
        } else {
            fftw_destroy_plan(fwd_);
        }
        fftw_free(real_);
    }

    // Transform of a frozen boundary row (interior part for the DST case),
    // by direct summation; done once per solver.
    std::vector<std::complex<double>> boundary_modes(const std::vector<double>& comp,
                                                     const Field& f, int j) const {
        std::vector<std::complex<double>> out(nm_);
        if (periodic1_) {
            for (int k = 0; k < nm_; ++k) {
                std::complex<double> s(0.0, 0.0);
                for (int i = 0; i < n1_; ++i) {
                    const double ang = -2.0 * M_PI * double(k) * double(i) / n1_;
                    s += comp[f.idx(i, j)] * std::complex<double>(std::cos(ang), std::sin(ang));
                }
                out[k] = s;
            }
        } else {
            for (int k = 0; k < nm_; ++k) {
                double s = 0.0;
                for (int p = 0; p < mw_; ++p)
                    s += comp[f.idx(p + 1, j)] * std::sin(M_PI * (p + 1.0) * (k + 1.0) / (mw_ + 1));
                out[k] = 2.0 * s;
            }
        }
        return out;
    }

    // Solve (I - dt Lap_h) X = B for one component.  `rhs` holds B on the
    // interior block (built by the caller in this object's real buffer
    // layout), bm0/bm1 are the transformed frozen x2 rows.  The result is
    // written back into the field component's interior.
    void solve_component(Field& f, std::vector<double>& comp,
                         const std::vector<std::complex<double>>& bm0,
                         const std::vector<std::complex<double>>& bm1) {
        const double bc = dt_ / (h_ * h_);
        if (periodic1_) {
            fftw_execute(fwd_);
            auto* c = reinterpret_cast<std::complex<double>*>(cplx_);
            for (int k = 0; k < nm_; ++k) {
                c[k] += bc * bm0[k];
                c[static_cast<std::size_t>(nj_ - 1) * nm_ + k] += bc * bm1[k];
            }
            for (int k = 0; k < nm_; ++k) {
                const double* cp = &cp_[static_cast<std::size_t>(k) * nj_];
                const double* iv = &inv_[static_cast<std::size_t>(k) * nj_];
                std::complex<double> prev = c[k] * iv[0];
                c[k] = prev;
                for (int j = 1; j < nj_; ++j) {
                    auto& cur = c[static_cast<std::size_t>(j) * nm_ + k];
                    prev = (cur - off_ * prev) * iv[j];
                    cur = prev;
                }
                for (int j = nj_ - 2; j >= 0; --j) {
                    auto& cur = c[static_cast<std::size_t>(j) * nm_ + k];
                    cur -= cp[j] * c[static_cast<std::size_t>(j + 1) * nm_ + k];
                }
            }
            fftw_execute(bwd_);
            const double scale = 1.0 / n1_;
            for (int j = 0; j < nj_; ++j)
                for (int i = 0; i < n1_; ++i)
                    comp[f.idx(i, j + 1)] = real_[static_cast<std::size_t>(j) * n1_ + i] * scale;
        } else {
            fftw_execute(fwd_);
            for (int k = 0; k < nm_; ++k) {
                real_[k] += bc * bm0[k].real();
                real_[static_cast<std::size_t>(nj_ - 1) * mw_ + k] += bc * bm1[k].real();
            }
            for (int k = 0; k < nm_; ++k) {
                const double* cp = &cp_[static_cast<std::size_t>(k) * nj_];
                const double* iv = &inv_[static_cast<std::size_t>(k) * nj_];
                double prev = real_[k] * iv[0];
                real_[k] = prev;
                for (int j = 1; j < nj_; ++j) {
                    double& cur = real_[static_cast<std::size_t>(j) * mw_ + k];
                    prev = (cur - off_ * prev) * iv[j];
                    cur = prev;
                }
                for (int j = nj_ - 2; j >= 0; --j) {
                    double& cur = real_[static_cast<std::size_t>(j) * mw_ + k];
                    cur -= cp[j] * real_[static_cast<std::size_t>(j + 1) * mw_ + k];
                }
            }
            fftw_execute(fwd_); // inverse DST-I
            const double scale = 1.0 / (2.0 * (mw_ + 1));
            for (int j = 0; j < nj_; ++j)
                for (int p = 0; p < mw_; ++p)
                    comp[f.idx(p + 1, j + 1)] = real_[static_cast<std::size_t>(j) * mw_ + p] * scale;
        }
    }

    // Build B = comp - dt * reaction on the interior block in the real buffer.
    void load_rhs(const Field& f, const std::vector<double>& comp,
                  const std::vector<double>& reaction) {
        const double bc = dt_ / (h_ * h_);
        if (periodic1_) {
            for (int j = 0; j < nj_; ++j)
                for (int i = 0; i < n1_; ++i) {
                    const std::size_t id = f.idx(i, j + 1);
                    real_[static_cast<std::size_t>(j) * n1_ + i] = comp[id] - dt_ * reaction[id];
                }
        } else {
            for (int j = 0; j < nj_; ++j) {
                for (int p = 0; p < mw_; ++p) {
                    const std::size_t id = f.idx(p + 1, j + 1);
                    real_[static_cast<std::size_t>(j) * mw_ + p] = comp[id] - dt_ * reaction[id];
                }
                // frozen x1 boundary columns
                real_[static_cast<std::size_t>(j) * mw_] += bc * comp[f.idx(0, j + 1)];
                real_[static_cast<std::size_t>(j) * mw_ + mw_ - 1] += bc * comp[f.idx(f.n1 - 1, j + 1)];
            }
        }
    }

private:
    int n1_, n2_, nj_, nm_, mw_;
    double h_, dt_, off_ = 0.0;
    bool periodic1_;
    double* real_ = nullptr;
    fftw_complex* cplx_ = nullptr;
    fftw_plan fwd_{}, bwd_{};
    std::vector<double> mu_, cp_, inv_;
};

} // namespace detail

inline Window full_window(const Field& f) {
    return {f.origin[0], f.origin[0] + f.extent1(), f.origin[1], f.origin[1] + f.extent2()};
}

// Advance the flow by `steps` steps.  Appends an energy sample every
// opts.energy_every steps; throws StabilityViolation when the sampled energy
// increases beyond tolerance, NonFiniteError on overflow; records a warning
// when a sampled state leaves the admissible region by more than
// opts.admissible_tol.
inline void evolve(FlowState& state, int steps, const Params& params,
                   const FlowOptions& opts = {}) {
    Field& f = state.field;
    detail::SpectralHelmholtz solver(f, state.dt);
    const auto bm0_u = solver.boundary_modes(f.u, f, 0);
    const auto bm1_u = solver.boundary_modes(f.u, f, f.n2 - 1);
    const auto bm0_v = solver.boundary_modes(f.v, f, 0);
    const auto bm1_v = solver.boundary_modes(f.v, f, f.n2 - 1);

    std::vector<double> wu(f.size()), wv(f.size());
    if (state.energy_history.empty() && opts.check_energy)
        state.energy_history.push_back({state.step_count, state.time,
                                        gl_energy(f, full_window(f), params)});
    double last_J = state.energy_history.empty() ? 0.0 : state.energy_history.back().J;
    long last_J_step = state.energy_history.empty() ? state.step_count
                                                    : state.energy_history.back().step;
    for (int s = 0; s < steps; ++s) {
        // reaction from the old state for both components (keeps the
        // alpha = 2 sum identity exact)
        parallel_rows(f.n2, [&](int i2) {
            for (int i1 = 0; i1 < f.n1; ++i1) {
                const std::size_t i = f.idx(i1, i2);
                const auto g = potential_gradient({f.u[i], f.v[i]}, params);
                wu[i] = g[0];
                wv[i] = g[1];
            }
        });
        solver.load_rhs(f, f.u, wu);
        solver.solve_component(f, f.u, bm0_u, bm1_u);
        // note: v's rhs uses the old u through wv, computed above
        solver.load_rhs(f, f.v, wv);
        solver.solve_component(f, f.v, bm0_v, bm1_v);
        ++state.step_count;
        state.time += state.dt;

        if (opts.check_energy && state.step_count % opts.energy_every == 0) {
            f.check_finite("flow");
            const double J = gl_energy(f, full_window(f), params);
            const long gap = state.step_count - last_J_step;
            if (J > last_J + opts.energy_tol_per_step * gap * (1.0 + std::abs(last_J)))
                throw StabilityViolation("flow: energy increased from " + std::to_string(last_J) +
                                         " to " + std::to_string(J) + " over " +
                                         std::to_string(gap) + " steps (dt too large?)");
            state.energy_history.push_back({state.step_count, state.time, J});
            last_J = J;
            last_J_step = state.step_count;
            bool admissible = true;
            for (std::size_t i = 0; i < f.size() && admissible; ++i)
                admissible = in_admissible_region({f.u[i], f.v[i]}, params, opts.admissible_tol);
            if (!admissible)
                state.warnings.push_back("step " + std::to_string(state.step_count) +
                                         ": state left the admissible region (tol " +
                                         std::to_string(opts.admissible_tol) + ")");
        }
    }
}

// Sup-norm of the elliptic residual (Lap u - W_u, Lap v - W_v) over interior nodes.
inline double elliptic_residual(const Field& f, const Params& params) {
    const double ih2 = 1.0 / sq(f.h);
    double r = 0.0;
    for (int i2 = 0; i2 < f.n2; ++i2) {
        for (int i1 = 0; i1 < f.n1; ++i1) {
            if (!detail::interior_node(f, i1, i2)) continue;
            const std::size_t id = f.idx(i1, i2);
            const int l = (f.bc1 == BcKind::Periodic) ? detail::wrap(i1 - 1, f.n1) : i1 - 1;
            const int rr = (f.bc1 == BcKind::Periodic) ? detail::wrap(i1 + 1, f.n1) : i1 + 1;
            double lap_u = (f.u[f.idx(l, i2)] - 2.0 * f.u[id] + f.u[f.idx(rr, i2)]) * ih2;
            double lap_v = (f.v[f.idx(l, i2)] - 2.0 * f.v[id] + f.v[f.idx(rr, i2)]) * ih2;
            if (f.dims == 2) {
                lap_u += (f.u[f.idx(i1, i2 - 1)] - 2.0 * f.u[id] + f.u[f.idx(i1, i2 + 1)]) * ih2;
                lap_v += (f.v[f.idx(i1, i2 - 1)] - 2.0 * f.v[id] + f.v[f.idx(i1, i2 + 1)]) * ih2;
            }
            const auto g = potential_gradient({f.u[id], f.v[id]}, params);
            r = std::max(r, std::max(std::abs(lap_u - g[0]), std::abs(lap_v - g[1])));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct LimitingProfiles {
    std::vector<double> upper_u, upper_v; // x2 -> +inf surrogate (top rows)
    std::vector<double> lower_u, lower_v; // x2 -> -inf surrogate (bottom rows)
    std::vector<std::string> warnings;
};

// Averages of the top/bottom `margin` rows as finite-height stand-ins for the
// x2 -> +/-inf limits.  Non-monotone columns only produce a warning.
inline LimitingProfiles limiting_profiles(const Field& f, int margin) {
    if (f.dims != 2) throw GridMismatch("limiting_profiles: 2D field required");
    if (margin < 1 || 2 * margin > f.n2) throw Error("limiting_profiles: bad margin");
    LimitingProfiles lp;
    lp.upper_u.assign(f.n1, 0.0);
    lp.upper_v.assign(f.n1, 0.0);
    lp.lower_u.assign(f.n1, 0.0);
    lp.lower_v.assign(f.n1, 0.0);
    double worst = 0.0;
    for (int i1 = 0; i1 < f.n1; ++i1) {
        for (int j = 0; j < margin; ++j) {
            lp.lower_u[i1] += f.u[f.idx(i1, j)];
            lp.lower_v[i1] += f.v[f.idx(i1, j)];
            lp.upper_u[i1] += f.u[f.idx(i1, f.n2 - 1 - j)];
            lp.upper_v[i1] += f.v[f.idx(i1, f.n2 - 1 - j)];
        }
        lp.lower_u[i1] /= margin;
        lp.lower_v[i1] /= margin;
        lp.upper_u[i1] /= margin;
        lp.upper_v[i1] /= margin;
        for (int j = 0; j + 1 < f.n2; ++j)
            worst = std::min(worst, f.u[f.idx(i1, j + 1)] - f.u[f.idx(i1, j)]);
    }
    if (worst < -1e-8)
        lp.warnings.push_back("field is not monotone in x2 (min du = " + std::to_string(worst) + ")");
    return lp;
}

struct SlopeReport {
    double mean_sigma = 0.0, std_sigma = 0.0;
    double mean_tau = 0.0, std_tau = 0.0;
    double sup_abs_diff = 0.0; // sup |sigma - tau| over the evaluation set
    std::size_t n_eval = 0;
    std::size_t n_sign_violations = 0;
};

// sigma_1 = d1u / d2u, tau_1 = d1v / d2v on nodes where the monotone-direction
// derivatives exceed `threshold` times their maxima.  Throws ReferenceNotSigned
// when clearly wrong-signed d2-derivatives cover more than 1% of the interior.
inline std::pair<SlopePair, SlopeReport> slope_fields(const Field& f, double threshold = 1e-6) {
    if (f.dims != 2) throw GridMismatch("slope_fields: 2D field required");
    const std::size_t n = f.size();
    std::vector<double> d1u(n, 0.0), d1v(n, 0.0), d2u(n, 0.0), d2v(n, 0.0);
    double max2u = 0.0, max2v = 0.0;
    std::size_t interior = 0;
    for (int i2 = 1; i2 < f.n2 - 1; ++i2) {
        for (int i1 = 0; i1 < f.n1; ++i1) {
            if (!detail::interior_node(f, i1, i2)) continue;
            ++interior;
            const std::size_t id = f.idx(i1, i2);
            const int l = (f.bc1 == BcKind::Periodic) ? detail::wrap(i1 - 1, f.n1) : i1 - 1;
            const int r = (f.bc1 == BcKind::Periodic) ? detail::wrap(i1 + 1, f.n1) : i1 + 1;
            d1u[id] = (f.u[f.idx(r, i2)] - f.u[f.idx(l, i2)]) / (2.0 * f.h);
            d1v[id] = (f.v[f.idx(r, i2)] - f.v[f.idx(l, i2)]) / (2.0 * f.h);
            d2u[id] = (f.u[f.idx(i1, i2 + 1)] - f.u[f.idx(i1, i2 - 1)]) / (2.0 * f.h);
            d2v[id] = (f.v[f.idx(i1, i2 + 1)] - f.v[f.idx(i1, i2 - 1)]) / (2.0 * f.h);
            max2u = std::max(max2u, std::abs(d2u[id]));
            max2v = std::max(max2v, std::abs(d2v[id]));
        }
    }
    SlopePair sp;
    sp.sigma.assign(n, 0.0);
    sp.tau.assign(n, 0.0);
    sp.valid.assign(n, 0);
    SlopeReport rep;
    const double thr_u = threshold * max2u, thr_v = threshold * max2v;
    double s1 = 0, s2 = 0, t1 = 0, t2 = 0;
    for (int i2 = 1; i2 < f.n2 - 1; ++i2) {
        for (int i1 = 0; i1 < f.n1; ++i1) {
            if (!detail::interior_node(f, i1, i2)) continue;
            const std::size_t id = f.idx(i1, i2);
            if (d2u[id] < -thr_u || d2v[id] > thr_v) ++rep.n_sign_violations;
            if (d2u[id] < thr_u || d2v[id] > -thr_v) continue;
            sp.sigma[id] = d1u[id] / d2u[id];
            sp.tau[id] = d1v[id] / d2v[id];
            sp.valid[id] = 1;
            ++rep.n_eval;
            s1 += sp.sigma[id];
            s2 += sq(sp.sigma[id]);
            t1 += sp.tau[id];
            t2 += sq(sp.tau[id]);
            rep.sup_abs_diff = std::max(rep.sup_abs_diff, std::abs(sp.sigma[id] - sp.tau[id]));
        }
    }
    if (interior > 0 && rep.n_sign_violations * 100 > interior)
        throw ReferenceNotSigned("slope_fields: monotonicity fails on more than 1% of interior nodes");
    if (rep.n_eval > 0) {
        const double ne = static_cast<double>(rep.n_eval);
        rep.mean_sigma = s1 / ne;
        rep.std_sigma = std::sqrt(std::max(0.0, s2 / ne - sq(rep.mean_sigma)));
        rep.mean_tau = t1 / ne;
        rep.std_tau = std::sqrt(std::max(0.0, t2 / ne - sq(rep.mean_tau)));
    }
    return {std::move(sp), rep};
}

struct DecouplingResult {
    double sup_dev = 0.0;  // sup |u + v - sqrt(1+omega)|
    double s_energy = 0.0; // int |grad S|^2 + 2 omega S^2 over the largest centered window
};

inline DecouplingResult decoupling_check(const Field& f, const Params& params) {
    if (params.alpha != 2.0) throw WrongAlpha("decoupling_check: requires alpha = 2 exactly");
    const double s = std::sqrt(1.0 + params.omega);
    DecouplingResult res;
    std::vector<double> S(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        S[i] = f.u[i] + f.v[i] - s;
        res.sup_dev = std::max(res.sup_dev, std::abs(S[i]));
    }
    if (f.dims == 1) {
        for (int c = 0; c + 1 < f.n1; ++c) {
            const double ds = (S[c + 1] - S[c]) / f.h;
            res.s_energy += f.h * (ds * ds + 2.0 * params.omega * 0.5 * (sq(S[c]) + sq(S[c + 1])));
        }
        return res;
    }
    // largest centered square window, assembled cell-wise like gl_energy
    const int ic = (f.bc1 == BcKind::Periodic) ? f.n1 / 2 : (f.n1 - 1) / 2;
    const int jc = (f.n2 - 1) / 2;
    const int max1 = (f.bc1 == BcKind::Periodic) ? f.n1 : f.n1 - 1;
    const int rc = std::min(std::min(ic, max1 - ic), std::min(jc, f.n2 - 1 - jc));
    double e = 0.0;
    for (int c2 = jc - rc; c2 < jc + rc; ++c2) {
        for (int c1 = ic - rc; c1 < ic + rc; ++c1) {
            const int i0 = detail::wrap(c1, f.n1), i1 = detail::wrap(c1 + 1, f.n1);
            const std::size_t a = f.idx(i0, c2), b = f.idx(i1, c2);
            const std::size_t c = f.idx(i0, c2 + 1), d = f.idx(i1, c2 + 1);
            const double dsx = (S[b] - S[a] + S[d] - S[c]) / (2.0 * f.h);
            const double dsy = (S[c] - S[a] + S[d] - S[b]) / (2.0 * f.h);
            const double s2 = 0.25 * (sq(S[a]) + sq(S[b]) + sq(S[c]) + sq(S[d]));
            e += dsx * dsx + dsy * dsy + 2.0 * params.omega * s2;
        }
    }
    res.s_energy = e * f.h * f.h;
    return res;
}

// Max deviation of the per-column {u = v} crossings from their least-squares
// line, normalized by the domain height.
inline double flatness_metric(const Field& f) {
    if (f.dims != 2) throw GridMismatch("flatness_metric: 2D field required");
    std::vector<double> cross(f.n1);
    for (int i1 = 0; i1 < f.n1; ++i1) {
        bool found = false;
        for (int j = 0; j + 1 < f.n2; ++j) {
            const double d0 = f.u[f.idx(i1, j)] - f.v[f.idx(i1, j)];
            const double d1 = f.u[f.idx(i1, j + 1)] - f.v[f.idx(i1, j + 1)];
            if (d0 <= 0.0 && d1 > 0.0) {
                cross[i1] = f.x2(j) + f.h * (-d0) / (d1 - d0);
                found = true;
                break;
            }
        }
        if (!found)
            throw LevelSetMissing("flatness_metric: column " + std::to_string(i1) +
                                  " has no u = v crossing");
    }
    // least-squares line cross ~ p + q*x1
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i1 = 0; i1 < f.n1; ++i1) {
        sx += f.x1(i1);
        sy += cross[i1];
        sxx += sq(f.x1(i1));
        sxy += f.x1(i1) * cross[i1];
    }
    const double n = f.n1;
    const double q = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double p = (sy - q * sx) / n;
    double dev = 0.0;
    for (int i1 = 0; i1 < f.n1; ++i1)
        dev = std::max(dev, std::abs(cross[i1] - (p + q * f.x1(i1))));
    return dev / f.extent2();
}

} // namespace rabiwall
