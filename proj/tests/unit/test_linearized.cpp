#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rabiwall/linearized.hpp"
#include "rabiwall/presets.hpp"

using namespace rabiwall;

namespace {

// compactly supported random pair: uniform values on nodes at least `margin`
// nodes away from every non-periodic boundary and inside |x| <= R when R > 0
PerturbationPair random_supported(const Field& f, Rng& rng, int margin, double R = -1.0) {
    PerturbationPair p(f.size());
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i2 = 0; i2 < f.n2; ++i2)
        for (int i1 = 0; i1 < f.n1; ++i1) {
            const bool in1 = f.bc1 == BcKind::Periodic || (i1 >= margin && i1 <= f.n1 - 1 - margin);
            const bool in2 = f.dims == 1 || f.bc2 == BcKind::Periodic ||
                             (i2 >= margin && i2 <= f.n2 - 1 - margin);
            if (!in1 || !in2) continue;
            if (R > 0.0 && sq(f.x1(i1)) + sq(f.dims == 2 ? f.x2(i2) : 0.0) > R * R) continue;
            p.xi[f.idx(i1, i2)] = uni(rng);
            p.eta[f.idx(i1, i2)] = uni(rng);
        }
    return p;
}

PerturbationPair wall_derivative_pair(const Field& f, double omega) {
    PerturbationPair d(f.size());
    for (int i2 = 0; i2 < f.n2; ++i2) {
        const double du = analytic_profile_alpha2_du(omega, f.x2(i2));
        for (int i1 = 0; i1 < f.n1; ++i1) {
            d.xi[f.idx(i1, i2)] = du;
            d.eta[f.idx(i1, i2)] = -du;
        }
    }
    return d;
}

PerturbationPair discrete_d2_pair(const Field& f) {
    PerturbationPair d(f.size());
    for (int i2 = 1; i2 < f.n2 - 1; ++i2)
        for (int i1 = 0; i1 < f.n1; ++i1) {
            const std::size_t id = f.idx(i1, i2);
            d.xi[id] = (f.u[f.idx(i1, i2 + 1)] - f.u[f.idx(i1, i2 - 1)]) / (2 * f.h);
            d.eta[id] = (f.v[f.idx(i1, i2 + 1)] - f.v[f.idx(i1, i2 - 1)]) / (2 * f.h);
        }
    return d;
}

} // namespace

TEST_CASE("apply_L basics: zero input, constant background", "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    Field f = constant_field({p.a, p.b}, 2, 32, 32, 0.25, BcKind::Periodic, BcKind::Periodic);
    const PerturbationPair zero(f.size());
    const auto Lz = apply_L(f, zero, p);
    for (double x : Lz.xi) CHECK(x == 0.0);

    PerturbationPair ones(f.size());
    std::fill(ones.xi.begin(), ones.xi.end(), 1.0);
    const auto L1 = apply_L(f, ones, p);
    const HessianW H = potential_hessian({p.a, p.b}, p);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(L1.xi[i] == Catch::Approx(H.w_uu).margin(1e-12));
        CHECK(L1.eta[i] == Catch::Approx(H.w_uv).margin(1e-12));
    }
    PerturbationPair bad(f.size() + 1);
    CHECK_THROWS_AS(apply_L(f, bad, p), GridMismatch);
}

TEST_CASE("derivative of the exact wall is a second-order kernel element", "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    std::vector<double> res;
    for (double h : {0.2, 0.1, 0.05, 0.025}) {
        const int n2 = 2 * static_cast<int>(std::lround(14.0 / h)) + 1;
        const Field f = planar_wall_field(0.6, 8, n2, h);
        const auto Ld = apply_L(f, wall_derivative_pair(f, 0.6), p);
        double sup = 0.0;
        for (std::size_t i = 0; i < Ld.xi.size(); ++i)
            sup = std::max({sup, std::abs(Ld.xi[i]), std::abs(Ld.eta[i])});
        res.push_back(sup);
    }
    for (std::size_t k = 0; k + 1 < res.size(); ++k) {
        CHECK(res[k] / res[k + 1] >= 3.5);
        CHECK(res[k] / res[k + 1] <= 4.5);
    }
}

TEST_CASE("discrete operator is symmetric", "[linearized]") {
    const Params p = validate_params(2.5, 0.7);
    const Field f = planar_wall_field(0.6, 24, 81, 0.25);
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_supported(f, rng, 2);
        const auto b = random_supported(f, rng, 2);
        const double lhs = inner_product(f, a, apply_L(f, b, p));
        const double rhs = inner_product(f, apply_L(f, a, p), b);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("quadratic form equals the operator inner product on supported pairs",
          "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    const Field f = planar_wall_field(0.6, 24, 81, 0.25);
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_supported(f, rng, 2);
        const double form = quadratic_form(f, a, p);
        const double ip = inner_product(f, a, apply_L(f, a, p));
        CHECK(std::abs(form - ip) <= 1e-10 * std::max(1.0, std::abs(form)));
    }
    PerturbationPair touching(f.size());
    touching.xi[f.idx(5, 0)] = 1.0; // on the x2 boundary
    CHECK_THROWS_AS(quadratic_form(f, touching, p), SupportTouchesBoundary);
}

TEST_CASE("quadratic form is nonnegative on the monotone wall background", "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    const Field f = planar_wall_field(0.6, 24, 121, 0.25);
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_supported(f, rng, 2);
        CHECK(quadratic_form(f, a, p) >= -1e-8);
    }
    const PerturbationPair zero(f.size());
    CHECK(quadratic_form(f, zero, p) == 0.0);
}

TEST_CASE("1D dense matrix agrees with the quadratic form", "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    Field f = wall_field_1d(0.6, 21, 0.5); // nodes at -5..5
    const DiscMask mask = disc_mask(f, 4.51, {0.0, 0.0});
    REQUIRE(mask.nodes.size() == 19); // every interior node
    const Eigen::MatrixXd A = assemble_L_dense(f, mask, p);
    Rng rng(14);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd x(2 * mask.nodes.size());
        PerturbationPair pp(f.size());
        for (std::size_t k = 0; k < mask.nodes.size(); ++k) {
            x[k] = uni(rng);
            x[k + mask.nodes.size()] = uni(rng);
            pp.xi[mask.nodes[k]] = x[k];
            pp.eta[mask.nodes[k]] = x[k + mask.nodes.size()];
        }
        const double dense_val = x.dot(A * x) * f.h;
        const double form = quadratic_form(f, pp, p);
        CHECK(form == Catch::Approx(dense_val).epsilon(1e-10));
    }
}

TEST_CASE("principal eigenpair on a constant background matches the dense solve",
          "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    const Field f = constant_field({p.a, p.b}, 2, 41, 41, 0.25);
    const double R = 4.0;
    const EigenPair ep = principal_eigenpair(f, R, p);
    // Dirichlet truncation only adds to the bottom of D2W's spectrum
    const HessianW H = potential_hessian({p.a, p.b}, p);
    const double tr = H.w_uu + H.w_vv;
    const double disc = std::sqrt(sq(H.w_uu - H.w_vv) / 4.0 + sq(H.w_uv));
    CHECK(ep.lambda >= tr / 2.0 - disc - 1e-10);
    const DiscMask mask = disc_mask(f, R, {0.0, 0.0});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(assemble_L_dense(f, mask, p),
                                                      Eigen::EigenvaluesOnly);
    CHECK(std::abs(ep.lambda - es.eigenvalues()[0]) <= 1e-8);
    // sign structure and normalization
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(ep.phi[i] >= -1e-12);
        CHECK(ep.psi[i] <= 1e-12);
    }
    CHECK(ep.normalization == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eigenvalue ladder on the planar wall", "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    const double h = 0.25;
    const int n = 2 * static_cast<int>(std::lround(7.0 / h)) + 1;
    const Field f = planar_wall_field(0.6, n, n, h, BcKind::Free, BcKind::Free);
    std::vector<double> lams;
    for (double R : {3.0, 4.5, 6.0}) {
        const EigenPair ep = principal_eigenpair(f, R, p);
        lams.push_back(ep.lambda);
        CHECK(ep.lambda >= -1e-8);
        // Rayleigh bound: supported trial pairs cannot beat the minimum
        Rng rng(31);
        for (int trial = 0; trial < 50; ++trial) {
            const auto a = random_supported(f, rng, 1, R * 0.9);
            const double norm2 = inner_product(f, a, a);
            if (norm2 == 0.0) continue;
            CHECK(quadratic_form(f, a, p) / norm2 >= ep.lambda - 1e-8);
        }
    }
    CHECK(lams[1] <= lams[0] + 1e-12);
    CHECK(lams[2] <= lams[1] + 1e-12);
}

TEST_CASE("sign replacement does not increase the quadratic form", "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    const Field f = planar_wall_field(0.6, 24, 81, 0.25);
    Rng rng(15);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = random_supported(f, rng, 2);
        PerturbationPair rep = a;
        for (std::size_t i = 0; i < rep.xi.size(); ++i) {
            rep.xi[i] = std::abs(rep.xi[i]);
            rep.eta[i] = -std::abs(rep.eta[i]);
        }
        CHECK(quadratic_form(f, rep, p) <= quadratic_form(f, a, p) + 1e-12);
    }
}

TEST_CASE("the two Q-form expressions agree to second order", "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    std::vector<double> diffs;
    for (int n : {48, 96}) {
        const double h = 2.0 * M_PI / n;
        Field f(2, n, n, h, {0.0, 0.0}, BcKind::Periodic, BcKind::Periodic);
        PerturbationPair ref(f.size());
        SlopePair sl;
        sl.sigma.assign(f.size(), 0.0);
        sl.tau.assign(f.size(), 0.0);
        sl.valid.assign(f.size(), 1);
        for (int i2 = 0; i2 < n; ++i2)
            for (int i1 = 0; i1 < n; ++i1) {
                const double x = f.x1(i1), y = f.x2(i2);
                const std::size_t id = f.idx(i1, i2);
                ref.xi[id] = 2.0 + std::sin(x) * std::cos(y);
                ref.eta[id] = -2.0 - std::cos(x) * std::sin(y);
                sl.sigma[id] = std::sin(x + 0.5 * y);
                sl.tau[id] = std::cos(0.3 * x - y);
            }
        const QFormResult qa = q_ratio_form(f, ref, sl, p);
        const QFormResult qb = q_ratio_form_laplacian(f, ref, sl, p);
        double worst = 0.0;
        for (std::size_t i = 0; i < qa.values.size(); ++i)
            if (qa.valid[i] && qb.valid[i])
                worst = std::max(worst, std::abs(qa.values[i] - qb.values[i]));
        diffs.push_back(worst);
    }
    const double order = std::log2(diffs[0] / diffs[1]);
    CHECK(order >= 1.5);
    CHECK(order <= 2.8);
}

TEST_CASE("Q vanishes for constant slopes and x1-invariant fields", "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    const Field f = planar_wall_field(0.6, 24, 161, 0.1);
    const auto ref = discrete_d2_pair(f);
    SlopePair sl;
    sl.sigma.assign(f.size(), 0.7);
    sl.tau.assign(f.size(), 0.7);
    sl.valid.assign(f.size(), 1);
    const QFormResult q = q_ratio_form(f, ref, sl, p);
    REQUIRE(q.n_valid > 0);
    for (std::size_t i = 0; i < q.values.size(); ++i)
        if (q.valid[i]) CHECK(q.values[i] == 0.0);

    // sigma = d1u / d2u is identically zero here
    SlopePair sz = sl;
    std::fill(sz.sigma.begin(), sz.sigma.end(), 0.0);
    std::fill(sz.tau.begin(), sz.tau.end(), 0.0);
    const QFormResult qz = q_ratio_form(f, ref, sz, p);
    for (std::size_t i = 0; i < qz.values.size(); ++i)
        if (qz.valid[i]) CHECK(qz.values[i] == 0.0);
}

TEST_CASE("reference sign violations are rejected", "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    const Field f = planar_wall_field(0.6, 16, 81, 0.25);
    auto ref = discrete_d2_pair(f);
    SlopePair sl;
    sl.sigma.assign(f.size(), 0.0);
    sl.tau.assign(f.size(), 0.0);
    sl.valid.assign(f.size(), 1);
    ref.xi[f.idx(8, 40)] = -0.5; // large negative phi in the bulk
    CHECK_THROWS_AS(q_ratio_form(f, ref, sl, p), ReferenceNotSigned);
}

TEST_CASE("caccioppoli integral vanishes for the exact wall and warns on small domains",
          "[linearized]") {
    const Field f = planar_wall_field(0.6, 48, 161, 0.25);
    const auto ref = discrete_d2_pair(f);
    SlopePair sl;
    sl.sigma.assign(f.size(), 0.0);
    sl.tau.assign(f.size(), 0.0);
    sl.valid.assign(f.size(), 1);
    const auto decay = caccioppoli_decay(f, ref, sl, {3.0, 4.0, 5.0}, 1e-10,
                                         {f.origin[0] + 0.5 * f.extent1(), 0.0});
    for (double I : decay.I) CHECK(I == 0.0);
    CHECK(decay.domain_warning); // R^2 = 25 exceeds the half extent
    CHECK_THROWS_AS(caccioppoli_decay(f, ref, sl, {4.0, 3.0}, 1e-10), Error);
    CHECK_THROWS_AS(caccioppoli_decay(f, ref, sl, {1.0, 3.0}, 1e-10), Error);
}

TEST_CASE("quadratic growth check over discs", "[linearized]") {
    const Params p = validate_params(2.0, 0.6);
    const double h = 0.25;
    const int n = 2 * static_cast<int>(std::lround(17.0 / h)) + 1;
    const Field f = planar_wall_field(0.6, n, n, h, BcKind::Free, BcKind::Free);
    // x1-invariant wall: no mass in the e1 direction
    for (const auto& row : check_quadratic_growth(f, {4.0, 8.0, 16.0}, 0))
        CHECK(row.mass <= 1e-28);
    // e2 direction: mass grows like R, so mass/R is flat (spread <= 10%)
    const auto rows = check_quadratic_growth(f, {4.0, 8.0, 16.0}, 1);
    double lo = 1e300, hi = 0.0;
    for (const auto& row : rows) {
        lo = std::min(lo, row.mass / row.R);
        hi = std::max(hi, row.mass / row.R);
        CHECK(row.ratio <= rows.front().ratio + 1e-12); // ratios bounded, decaying
    }
    CHECK((hi - lo) / hi <= 0.10);

    // constant field: all zero
    const Field fc = constant_field({p.a, p.b}, 2, 65, 65, 0.5);
    for (const auto& row : check_quadratic_growth(fc, {4.0, 8.0, 12.0}, 0))
        CHECK(row.ratio == 0.0);

    // radial bump: derivative mass saturates, ratios fall like 1/R^2
    Field fb = constant_field({0.5, 0.5}, 2, 129, 129, 0.25);
    for (int i2 = 0; i2 < fb.n2; ++i2)
        for (int i1 = 0; i1 < fb.n1; ++i1) {
            const double r2 = sq(fb.x1(i1)) + sq(fb.x2(i2));
            fb.u[fb.idx(i1, i2)] = 0.5 + 0.2 * std::exp(-r2);
        }
    const auto bump = check_quadratic_growth(fb, {4.0, 8.0, 16.0}, 0);
    CHECK(bump[1].ratio == Catch::Approx(bump[0].ratio / 4.0).epsilon(0.05));
    CHECK(bump[2].ratio == Catch::Approx(bump[1].ratio / 4.0).epsilon(0.05));
}
