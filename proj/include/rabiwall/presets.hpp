#pragma once

// Field constructors for the standard experiments: planar, tilted and
// sinusoidally bent walls built from the alpha = 2 closed form, the extension
// of a solved 1D profile, and constant fields.

#include <cmath>

#include "rabiwall/grid.hpp"
#include "rabiwall/potential.hpp"
#include "rabiwall/profile1d.hpp"

namespace rabiwall {

// 2D field u(x) = U(x2), v(x) = V(x2) from the alpha = 2 closed form.
// x2 spans [-half2, half2]; x1 starts at 0 when periodic, else [-half1, half1].
inline Field planar_wall_field(double omega, int n1, int n2, double h,
                               BcKind bc1 = BcKind::Periodic, BcKind bc2 = BcKind::Dirichlet) {
    const double o1 = (bc1 == BcKind::Periodic) ? 0.0 : -0.5 * (n1 - 1) * h;
    Field f(2, n1, n2, h, {o1, -0.5 * (n2 - 1) * h}, bc1, bc2);
    for (int i2 = 0; i2 < n2; ++i2) {
        const auto uv = analytic_profile_alpha2(omega, f.x2(i2));
        for (int i1 = 0; i1 < n1; ++i1) {
            f.u[f.idx(i1, i2)] = uv[0];
            f.v[f.idx(i1, i2)] = uv[1];
        }
    }
    return f;
}

// Wall along the rotated coordinate t = sin(theta) x1 + cos(theta) x2,
// Dirichlet on all sides (values frozen from the analytic field).
inline Field tilted_wall_field(double omega, double theta, int n1, int n2, double h) {
    Field f(2, n1, n2, h, {-0.5 * (n1 - 1) * h, -0.5 * (n2 - 1) * h},
            BcKind::Dirichlet, BcKind::Dirichlet);
    const double s = std::sin(theta), c = std::cos(theta);
    for (int i2 = 0; i2 < n2; ++i2)
        for (int i1 = 0; i1 < n1; ++i1) {
            const auto uv = analytic_profile_alpha2(omega, s * f.x1(i1) + c * f.x2(i2));
            f.u[f.idx(i1, i2)] = uv[0];
            f.v[f.idx(i1, i2)] = uv[1];
        }
    return f;
}

// Sinusoidally bent wall: u = U(x2 - A sin(2 pi p x1 / width)), periodic in
// x1; the x2 Dirichlet rows carry the exact constants (a,b) / (b,a).
inline Field bent_wall_field(const Params& params, double amplitude, int periods,
                             int n1, int n2, double h) {
    Field f(2, n1, n2, h, {0.0, -0.5 * (n2 - 1) * h}, BcKind::Periodic, BcKind::Dirichlet);
    const double width = n1 * h;
    for (int i2 = 0; i2 < n2; ++i2)
        for (int i1 = 0; i1 < n1; ++i1) {
            const double t = f.x2(i2) -
                             amplitude * std::sin(2.0 * M_PI * periods * f.x1(i1) / width);
            const auto uv = analytic_profile_alpha2(params.omega, t);
            f.u[f.idx(i1, i2)] = uv[0];
            f.v[f.idx(i1, i2)] = uv[1];
        }
    for (int i1 = 0; i1 < n1; ++i1) {
        f.u[f.idx(i1, 0)] = params.a;
        f.v[f.idx(i1, 0)] = params.b;
        f.u[f.idx(i1, n2 - 1)] = params.b;
        f.v[f.idx(i1, n2 - 1)] = params.a;
    }
    return f;
}

// Extend a solved 1D profile along x1 (u(x) = U(x2) on the profile's grid).
inline Field field_from_profile(const Profile1D& p, int n1,
                                BcKind bc1 = BcKind::Periodic) {
    const double h = p.grid.h();
    const double o1 = (bc1 == BcKind::Periodic) ? 0.0 : -0.5 * (n1 - 1) * h;
    Field f(2, n1, p.grid.n, h, {o1, -p.grid.L}, bc1, BcKind::Dirichlet);
    for (int i2 = 0; i2 < p.grid.n; ++i2)
        for (int i1 = 0; i1 < n1; ++i1) {
            f.u[f.idx(i1, i2)] = p.U[i2];
            f.v[f.idx(i1, i2)] = p.V[i2];
        }
    return f;
}

inline Field constant_field(const StatePoint& s, int dims, int n1, int n2, double h,
                            BcKind bc1 = BcKind::Free, BcKind bc2 = BcKind::Free) {
    const double o1 = (bc1 == BcKind::Periodic) ? 0.0 : -0.5 * (n1 - 1) * h;
    const double o2 = (dims == 2) ? -0.5 * (n2 - 1) * h : 0.0;
    Field f(dims, n1, n2, h, {o1, o2}, bc1, bc2);
    std::fill(f.u.begin(), f.u.end(), s.u);
    std::fill(f.v.begin(), f.v.end(), s.v);
    return f;
}

// 1D field sampling the alpha = 2 closed form on [-L, L].
inline Field wall_field_1d(double omega, int n, double h) {
    Field f(1, n, 1, h, {-0.5 * (n - 1) * h, 0.0}, BcKind::Free, BcKind::Free);
    for (int i = 0; i < n; ++i) {
        const auto uv = analytic_profile_alpha2(omega, f.x1(i));
        f.u[i] = uv[0];
        f.v[i] = uv[1];
    }
    return f;
}

} // namespace rabiwall
