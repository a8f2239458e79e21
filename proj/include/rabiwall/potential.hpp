#pragma once

// Pointwise potential W(u,v), its derivatives, parameter validation and the
// steady states of the coupled system
//
//   Delta u = u(u^2+v^2-1) + v(alpha*u*v - omega) = W_u(u,v)
//   Delta v = v(u^2+v^2-1) + u(alpha*u*v - omega) = W_v(u,v)
//
// with W(u,v) = (1-u^2-v^2)^2/4 + (omega - alpha*u*v)^2/(2*alpha).

#include <array>
#include <string>
#include <vector>

#include "rabiwall/common.hpp"

namespace rabiwall {

struct StatePoint {
    double u = 0.0;
    double v = 0.0;
};

// Symmetric Hessian of W; the single off-diagonal w_uv is stored once.
struct HessianW {
    double w_uu = 0.0;
    double w_uv = 0.0;
    double w_vv = 0.0;
};

// Validated parameter pair (alpha, omega) with the derived constants of the
// steady-state picture: 0 < a < b solve a^2+b^2 = 1, a*b = omega/alpha, and
// c = sqrt((1+omega)/(2+alpha)) is the symmetric unstable state value.
struct Params {
    double alpha = 0.0;
    double omega = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

// Requires alpha > 0 and 0 < omega < alpha/2.  The roots a, b come from
// x^2 - s*x + q = 0 with s = sqrt(1 + 2q), q = omega/alpha; the larger root is
// taken from the quadratic formula (no cancellation since both terms are
// positive) and the smaller one from the product identity a*b = q.
inline Params validate_params(double alpha, double omega) {
    if (!finite(alpha) || !finite(omega))
        throw ParamsOutOfRange("validate_params: alpha/omega must be finite");
    if (!(alpha > 0.0))
        throw ParamsOutOfRange("validate_params: require alpha > 0, got alpha=" +
                               std::to_string(alpha));
    if (!(omega > 0.0 && omega < alpha / 2.0))
        throw ParamsOutOfRange("validate_params: require 0 < omega < alpha/2, got omega=" +
                               std::to_string(omega) + ", alpha/2=" + std::to_string(alpha / 2.0));
    Params p;
    p.alpha = alpha;
    p.omega = omega;
    const double q = omega / alpha;
    const double s = std::sqrt(1.0 + 2.0 * q);
    const double disc = 1.0 - 2.0 * q; // positive because omega < alpha/2
    p.b = 0.5 * (s + std::sqrt(disc));
    p.a = q / p.b;
    p.c = std::sqrt((1.0 + omega) / (2.0 + alpha));
    return p;
}

inline double potential_value(const StatePoint& p, const Params& params) {
    const double r = 1.0 - p.u * p.u - p.v * p.v;
    const double m = params.omega - params.alpha * p.u * p.v;
    return 0.25 * r * r + m * m / (2.0 * params.alpha);
}

// (W_u, W_v); identical to the right-hand side of the system.
inline std::array<double, 2> potential_gradient(const StatePoint& p, const Params& params) {
    const double r = p.u * p.u + p.v * p.v - 1.0;
    const double m = params.alpha * p.u * p.v - params.omega;
    return {p.u * r + p.v * m, p.v * r + p.u * m};
}

// The diagonal entries follow by differentiating W_u, W_v; the cross term is
// kept as the literal expression (2 + 2*alpha)*u*v - omega.
inline HessianW potential_hessian(const StatePoint& p, const Params& params) {
    HessianW h;
    const double u2 = p.u * p.u, v2 = p.v * p.v;
    h.w_uu = 3.0 * u2 + v2 - 1.0 + params.alpha * v2;
    h.w_vv = u2 + 3.0 * v2 - 1.0 + params.alpha * u2;
    h.w_uv = (2.0 + 2.0 * params.alpha) * p.u * p.v - params.omega;
    return h;
}

// Admissible region between the unit circle and the hyperbola u*v = omega/alpha.
inline bool in_admissible_region(const StatePoint& p, const Params& params,
                                 double tol = 1e-10) {
    if (!(tol >= 0.0)) throw Error("in_admissible_region: tol must be >= 0");
    return p.u > -tol && p.v > -tol &&
           p.u * p.u + p.v * p.v <= 1.0 + tol &&
           p.u * p.v >= params.omega / params.alpha - tol;
}

// The three constant solutions: (a,b), (b,a) stable, (c,c) unstable.
inline std::vector<StatePoint> steady_states(const Params& params) {
    return {{params.a, params.b}, {params.b, params.a}, {params.c, params.c}};
}

// Uniform sample of the admissible region by rejection from (0,1)^2.
inline StatePoint sample_admissible(const Params& params, Rng& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (;;) {
        StatePoint p{uni(rng), uni(rng)};
        if (p.u * p.u + p.v * p.v <= 1.0 && p.u * p.v >= params.omega / params.alpha)
            return p;
    }
}

} // namespace rabiwall
