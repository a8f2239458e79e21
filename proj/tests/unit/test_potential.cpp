#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rabiwall/potential.hpp"

using namespace rabiwall;

namespace {

// independent central-difference oracles for the derivatives of W
std::array<double, 2> fd_gradient(const StatePoint& s, const Params& p, double step) {
    return {(potential_value({s.u + step, s.v}, p) - potential_value({s.u - step, s.v}, p)) /
                (2 * step),
            (potential_value({s.u, s.v + step}, p) - potential_value({s.u, s.v - step}, p)) /
                (2 * step)};
}

double rel(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

} // namespace

TEST_CASE("validate_params produces the Figure-1 constants", "[potential]") {
    // closed-form quadratic-root oracle: x^2 - sqrt(1.6) x + 0.3 has roots
    // 1/sqrt(10) and 3/sqrt(10); c = sqrt(0.4)
    const Params p = validate_params(2.0, 0.6);
    CHECK(p.a == Catch::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-15));
    CHECK(p.b == Catch::Approx(3.0 / std::sqrt(10.0)).epsilon(1e-15));
    CHECK(p.c == Catch::Approx(std::sqrt(0.4)).epsilon(1e-15));
    CHECK(std::abs(p.a * p.a + p.b * p.b - 1.0) <= 1e-14);
    CHECK(std::abs(p.a * p.b - 0.3) <= 1e-14);

    const Params p4 = validate_params(4.0, 1.0);
    CHECK(std::abs(p4.a * p4.b - 0.25) <= 1e-14);
    CHECK(std::abs(p4.a * p4.a + p4.b * p4.b - 1.0) <= 1e-14);
    CHECK(p4.a < p4.b);
}

TEST_CASE("validate_params rejects out-of-range parameters", "[potential]") {
    CHECK_THROWS_AS(validate_params(2.0, 1.0), ParamsOutOfRange);  // omega = alpha/2
    CHECK_THROWS_AS(validate_params(2.0, 0.0), ParamsOutOfRange);
    CHECK_THROWS_AS(validate_params(2.0, -0.1), ParamsOutOfRange);
    CHECK_THROWS_AS(validate_params(-1.0, 0.1), ParamsOutOfRange);
    CHECK_THROWS_AS(validate_params(2.0, std::nan("")), ParamsOutOfRange);
}

TEST_CASE("potential value at anchor points", "[potential]") {
    const Params p = validate_params(2.0, 0.6);
    CHECK(potential_value({p.a, p.b}, p) <= 1e-30);
    CHECK(potential_value({p.b, p.a}, p) <= 1e-30);
    CHECK(potential_value({0.0, 0.0}, p) == Catch::Approx(0.34).epsilon(1e-15));
    CHECK(potential_value({0.7, 0.2}, p) >= 0.0);
}

TEST_CASE("gradient vanishes at all three steady states", "[potential]") {
    for (auto [al, om] : {std::pair{2.0, 0.6}, {3.0, 1.2}, {4.0, 0.5}}) {
        const Params p = validate_params(al, om);
        const auto states = steady_states(p);
        REQUIRE(states.size() == 3);
        for (const auto& s : states) {
            const auto g = potential_gradient(s, p);
            CHECK(std::hypot(g[0], g[1]) <= 1e-12);
            CHECK(in_admissible_region(s, p, 1e-12));
        }
    }
}

TEST_CASE("small-omega limit pushes the roots to the axes", "[potential]") {
    const Params p = validate_params(2.0, 1e-9);
    CHECK(p.a <= 1e-8);
    CHECK(p.b == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("gradient and Hessian match finite differences on random admissible points",
          "[potential]") {
    const Params p = validate_params(2.7, 0.9);
    Rng rng(2024);
    const double step = 1e-5;
    for (int k = 0; k < 1000; ++k) {
        const StatePoint s = sample_admissible(p, rng);
        const auto g = potential_gradient(s, p);
        const auto fg = fd_gradient(s, p, step);
        CHECK(rel(g[0], fg[0]) <= 1e-6);
        CHECK(rel(g[1], fg[1]) <= 1e-6);
        const HessianW H = potential_hessian(s, p);
        const auto gu_p = potential_gradient({s.u + step, s.v}, p);
        const auto gu_m = potential_gradient({s.u - step, s.v}, p);
        const auto gv_p = potential_gradient({s.u, s.v + step}, p);
        const auto gv_m = potential_gradient({s.u, s.v - step}, p);
        CHECK(rel(H.w_uu, (gu_p[0] - gu_m[0]) / (2 * step)) <= 1e-6);
        CHECK(rel(H.w_vv, (gv_p[1] - gv_m[1]) / (2 * step)) <= 1e-6);
        CHECK(rel(H.w_uv, (gv_p[0] - gv_m[0]) / (2 * step)) <= 1e-6);
        CHECK(rel(H.w_uv, (gu_p[1] - gu_m[1]) / (2 * step)) <= 1e-6);
    }
}

TEST_CASE("w_uv is the literal closed formula and respects the lower bound", "[potential]") {
    for (auto [al, om] : {std::pair{2.0, 0.6}, {3.0, 1.2}, {4.0, 0.5}}) {
        const Params p = validate_params(al, om);
        Rng rng(7);
        const double bound = (2.0 / al + 1.0) * om;
        for (int k = 0; k < 1000; ++k) {
            const StatePoint s = sample_admissible(p, rng);
            const HessianW H = potential_hessian(s, p);
            CHECK(H.w_uv == (2.0 + 2.0 * al) * s.u * s.v - om); // bit-exact expression
            CHECK(H.w_uv >= bound - 1e-12);
        }
        // equality exactly on the hyperbola u v = omega/alpha
        const HessianW Hab = potential_hessian({p.a, p.b}, p);
        CHECK(Hab.w_uv == Catch::Approx(bound).epsilon(1e-13));
    }
    const Params p2 = validate_params(2.0, 0.6);
    CHECK(potential_hessian({p2.a, p2.b}, p2).w_uv == Catch::Approx(1.2).epsilon(1e-14));
}

TEST_CASE("swap symmetry of W, gradient and Hessian", "[potential]") {
    const Params p = validate_params(3.3, 1.1);
    Rng rng(99);
    for (int k = 0; k < 1000; ++k) {
        const StatePoint s = sample_admissible(p, rng);
        const StatePoint sw{s.v, s.u};
        CHECK(potential_value(s, p) == Catch::Approx(potential_value(sw, p)).margin(1e-15));
        const auto g = potential_gradient(s, p);
        const auto gw = potential_gradient(sw, p);
        CHECK(g[0] == Catch::Approx(gw[1]).margin(1e-15));
        CHECK(g[1] == Catch::Approx(gw[0]).margin(1e-15));
        const auto H = potential_hessian(s, p);
        const auto Hw = potential_hessian(sw, p);
        CHECK(H.w_uu == Catch::Approx(Hw.w_vv).margin(1e-15));
        // (2+2a)*u*v and (2+2a)*v*u associate differently: 1-ulp slack
        CHECK(H.w_uv == Catch::Approx(Hw.w_uv).margin(1e-14));
    }
}

TEST_CASE("admissible region predicate", "[potential]") {
    const Params p = validate_params(2.0, 0.6);
    CHECK(in_admissible_region({p.a, p.b}, p, 0.0));
    CHECK_FALSE(in_admissible_region({1.0, 1.0}, p, 0.0)); // outside the circle
    CHECK_FALSE(in_admissible_region({0.9, 0.1}, p, 0.0)); // below the hyperbola
    CHECK(in_admissible_region({p.c, p.c}, p, 0.0));       // checked numerically per params
    CHECK_FALSE(in_admissible_region({-0.1, 0.9}, p, 0.0));
    // tolerance admits slightly violating points
    CHECK(in_admissible_region({p.a, p.b + 1e-11}, p, 1e-10));
    CHECK_THROWS_AS(in_admissible_region({0.5, 0.5}, p, -1.0), Error);
}

TEST_CASE("steady state stability labels from the Hessian", "[potential]") {
    const Params p = validate_params(2.0, 0.6);
    const auto Hab = potential_hessian({p.a, p.b}, p);
    CHECK(Hab.w_uu * Hab.w_vv - Hab.w_uv * Hab.w_uv > 0.0); // (a,b) is a minimum
    CHECK(Hab.w_uu + Hab.w_vv > 0.0);
    const auto Hcc = potential_hessian({p.c, p.c}, p);
    CHECK(Hcc.w_uu * Hcc.w_vv - Hcc.w_uv * Hcc.w_uv < 0.0); // (c,c) is a saddle
}
