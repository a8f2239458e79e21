#pragma once

// The linearized Schrodinger operator along a background field,
//
//   L (xi, eta) = ( -Lap xi + W_uu xi + W_uv eta,
//                   -Lap eta + W_vu xi + W_vv eta ),
//
// evaluated with the 3/5-point stencil, its quadratic form, principal
// eigenpairs on disc truncations, the ratio quadratic form
//   Q(sigma,tau) = -sigma div(phi^2 grad sigma) - tau div(psi^2 grad tau),
// and the Caccioppoli / quadratic-growth diagnostics.
//
// Conventions: on non-periodic axes the outermost layer carries boundary
// rows, apply_L writes zeros there; disc masks must stay inside the interior.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rabiwall/common.hpp"
#include "rabiwall/grid.hpp"
#include "rabiwall/potential.hpp"

namespace rabiwall {

struct PerturbationPair {
    std::vector<double> xi, eta;

    PerturbationPair() = default;
    explicit PerturbationPair(std::size_t n) : xi(n, 0.0), eta(n, 0.0) {}
};

struct EigenPair {
    double lambda = 0.0;
    std::vector<double> phi, psi; // full-grid arrays, zero outside the disc
    double R = 0.0;
    double normalization = 0.0;   // phi(center) - psi(center) after scaling (== 1)
};

// Slope fields sigma = xi/phi, tau = eta/psi with a validity mask (division
// is fenced where the reference pair is below threshold).
struct SlopePair {
    std::vector<double> sigma, tau;
    std::vector<unsigned char> valid;
};

namespace detail {

inline bool interior_node(const Field& f, int i1, int i2) {
    const bool ok1 = (f.bc1 == BcKind::Periodic) || (i1 >= 1 && i1 <= f.n1 - 2);
    const bool ok2 = f.dims == 1 || (f.bc2 == BcKind::Periodic) || (i2 >= 1 && i2 <= f.n2 - 2);
    return ok1 && ok2;
}

inline int wrap(int i, int n) { return (i % n + n) % n; }

} // namespace detail

// Matrix-free application of L.  Output rows on non-periodic boundaries are
// zero (those nodes are boundary rows, not operator rows).
inline PerturbationPair apply_L(const Field& f, const PerturbationPair& p, const Params& params) {
    if (p.xi.size() != f.size() || p.eta.size() != f.size())
        throw GridMismatch("apply_L: perturbation size does not match the field grid");
    PerturbationPair out(f.size());
    const double ih2 = 1.0 / sq(f.h);
    const int n1 = f.n1, n2 = f.n2;
    for (int i2 = 0; i2 < n2; ++i2) {
        for (int i1 = 0; i1 < n1; ++i1) {
            if (!detail::interior_node(f, i1, i2)) continue;
            const std::size_t id = f.idx(i1, i2);
            const int l = (f.bc1 == BcKind::Periodic) ? detail::wrap(i1 - 1, n1) : i1 - 1;
            const int r = (f.bc1 == BcKind::Periodic) ? detail::wrap(i1 + 1, n1) : i1 + 1;
            double lap_xi = (p.xi[f.idx(l, i2)] - 2.0 * p.xi[id] + p.xi[f.idx(r, i2)]) * ih2;
            double lap_eta = (p.eta[f.idx(l, i2)] - 2.0 * p.eta[id] + p.eta[f.idx(r, i2)]) * ih2;
            if (f.dims == 2) {
                const int d = (f.bc2 == BcKind::Periodic) ? detail::wrap(i2 - 1, n2) : i2 - 1;
                const int u = (f.bc2 == BcKind::Periodic) ? detail::wrap(i2 + 1, n2) : i2 + 1;
                lap_xi += (p.xi[f.idx(i1, d)] - 2.0 * p.xi[id] + p.xi[f.idx(i1, u)]) * ih2;
                lap_eta += (p.eta[f.idx(i1, d)] - 2.0 * p.eta[id] + p.eta[f.idx(i1, u)]) * ih2;
            }
            const auto H = potential_hessian({f.u[id], f.v[id]}, params);
            out.xi[id] = -lap_xi + H.w_uu * p.xi[id] + H.w_uv * p.eta[id];
            out.eta[id] = -lap_eta + H.w_uv * p.xi[id] + H.w_vv * p.eta[id];
        }
    }
    return out;
}

inline double inner_product(const Field& f, const PerturbationPair& a, const PerturbationPair& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.xi.size(); ++i) s += a.xi[i] * b.xi[i] + a.eta[i] * b.eta[i];
    return s * std::pow(f.h, f.dims);
}

// Quadratic form  int |grad xi|^2 + |grad eta|^2 + (xi,eta) D2W (xi,eta)^T.
// Gradients are summed over faces, so for pairs vanishing on the boundary
// layer this equals <p, L p> * h^dims exactly (discrete Green identity).
inline double quadratic_form(const Field& f, const PerturbationPair& p, const Params& params) {
    if (p.xi.size() != f.size() || p.eta.size() != f.size())
        throw GridMismatch("quadratic_form: perturbation size mismatch");
    const int n1 = f.n1, n2 = f.n2;
    auto boundary_nonzero = [&](int i1, int i2) {
        const std::size_t id = f.idx(i1, i2);
        return p.xi[id] != 0.0 || p.eta[id] != 0.0;
    };
    if (f.bc1 != BcKind::Periodic)
        for (int i2 = 0; i2 < n2; ++i2)
            if (boundary_nonzero(0, i2) || boundary_nonzero(n1 - 1, i2))
                throw SupportTouchesBoundary("quadratic_form: support touches an x1 boundary");
    if (f.dims == 2 && f.bc2 != BcKind::Periodic)
        for (int i1 = 0; i1 < n1; ++i1)
            if (boundary_nonzero(i1, 0) || boundary_nonzero(i1, n2 - 1))
                throw SupportTouchesBoundary("quadratic_form: support touches an x2 boundary");

    const double ih = 1.0 / f.h;
    double grad = 0.0, pot = 0.0;
    for (int i2 = 0; i2 < n2; ++i2) {
        for (int i1 = 0; i1 < n1; ++i1) {
            const std::size_t id = f.idx(i1, i2);
            // faces in +x1 / +x2 direction
            if (f.bc1 == BcKind::Periodic || i1 + 1 < n1) {
                const std::size_t jd = f.idx((i1 + 1) % n1, i2);
                grad += sq((p.xi[jd] - p.xi[id]) * ih) + sq((p.eta[jd] - p.eta[id]) * ih);
            }
            if (f.dims == 2 && (f.bc2 == BcKind::Periodic || i2 + 1 < n2)) {
                const std::size_t jd = f.idx(i1, (i2 + 1) % n2);
                grad += sq((p.xi[jd] - p.xi[id]) * ih) + sq((p.eta[jd] - p.eta[id]) * ih);
            }
            const auto H = potential_hessian({f.u[id], f.v[id]}, params);
            pot += H.w_uu * sq(p.xi[id]) + 2.0 * H.w_uv * p.xi[id] * p.eta[id] +
                   H.w_vv * sq(p.eta[id]);
        }
    }
    return (grad + pot) * std::pow(f.h, f.dims);
}

// ---------------------------------------------------------------------------
// Disc-truncated eigenproblem
// ---------------------------------------------------------------------------

struct DiscMask {
    std::vector<long> node_of;  // grid index -> unknown index or -1
    std::vector<std::size_t> nodes; // unknown index -> grid index
    std::size_t center_node = 0;    // unknown index of the node nearest the center
};

inline DiscMask disc_mask(const Field& f, double R, std::array<double, 2> center) {
    DiscMask m;
    m.node_of.assign(f.size(), -1);
    double best = std::numeric_limits<double>::infinity();
    for (int i2 = 0; i2 < f.n2; ++i2) {
        for (int i1 = 0; i1 < f.n1; ++i1) {
            const double dx = f.x1(i1) - center[0];
            const double dy = (f.dims == 2) ? f.x2(i2) - center[1] : 0.0;
            const double r2 = dx * dx + dy * dy;
            if (r2 > R * R) continue;
            if (!detail::interior_node(f, i1, i2))
                throw WindowOutOfDomain("disc_mask: disc of radius " + std::to_string(R) +
                                        " is not inside the grid interior");
            const std::size_t id = f.idx(i1, i2);
            m.node_of[id] = static_cast<long>(m.nodes.size());
            m.nodes.push_back(id);
            if (r2 < best) {
                best = r2;
                m.center_node = m.nodes.size() - 1;
            }
        }
    }
    if (m.nodes.empty()) throw WindowOutOfDomain("disc_mask: empty mask");
    return m;
}

// Sparse matrix of L restricted to the masked nodes (Dirichlet outside):
// unknowns [xi_0..xi_{m-1}, eta_0..eta_{m-1}].
inline Eigen::SparseMatrix<double> assemble_L(const Field& f, const DiscMask& mask,
                                              const Params& params) {
    const long m = static_cast<long>(mask.nodes.size());
    const double ih2 = 1.0 / sq(f.h);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(m) * 12);
    for (long p = 0; p < m; ++p) {
        const std::size_t id = mask.nodes[p];
        const int i1 = static_cast<int>(id % f.n1);
        const int i2 = static_cast<int>(id / f.n1);
        const double diag = (f.dims == 2 ? 4.0 : 2.0) * ih2;
        const auto H = potential_hessian({f.u[id], f.v[id]}, params);
        trips.emplace_back(p, p, diag + H.w_uu);
        trips.emplace_back(p + m, p + m, diag + H.w_vv);
        trips.emplace_back(p, p + m, H.w_uv);
        trips.emplace_back(p + m, p, H.w_uv);
        const int nbrs1[2] = {i1 - 1, i1 + 1};
        for (int j1 : nbrs1) {
            const int jj = (f.bc1 == BcKind::Periodic) ? detail::wrap(j1, f.n1) : j1;
            if (jj < 0 || jj >= f.n1) continue;
            const long q = mask.node_of[f.idx(jj, i2)];
            if (q < 0) continue;
            trips.emplace_back(p, q, -ih2);
            trips.emplace_back(p + m, q + m, -ih2);
        }
        if (f.dims == 2) {
            const int nbrs2[2] = {i2 - 1, i2 + 1};
            for (int j2 : nbrs2) {
                const int jj = (f.bc2 == BcKind::Periodic) ? detail::wrap(j2, f.n2) : j2;
                if (jj < 0 || jj >= f.n2) continue;
                const long q = mask.node_of[f.idx(i1, jj)];
                if (q < 0) continue;
                trips.emplace_back(p, q, -ih2);
                trips.emplace_back(p + m, q + m, -ih2);
            }
        }
    }
    Eigen::SparseMatrix<double> A(2 * m, 2 * m);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

inline Eigen::MatrixXd assemble_L_dense(const Field& f, const DiscMask& mask,
                                        const Params& params) {
    return Eigen::MatrixXd(assemble_L(f, mask, params));
}

struct EigenOptions {
    double tol = 1e-10;
    int max_iters = 500;
    std::array<double, 2> center{0.0, 0.0};
};

// Smallest eigenvalue and eigenvector of L on the disc of radius R by shifted
// inverse iteration with a direct sparse factorization.  The initial shift is
// min(0, Gershgorin lower bound) - 1; when the Rayleigh quotient settles
// slowly (clustered low modes at large R) the shift is pulled up just below
// the current quotient and the factorization redone.  The converged vector is
// sign-replaced (|phi|, -|psi|) before the final Rayleigh quotient and scaled
// so that phi(center) - psi(center) = 1.
inline EigenPair principal_eigenpair(const Field& f, double R, const Params& params,
                                     const EigenOptions& opts = {}) {
    const DiscMask mask = disc_mask(f, R, opts.center);
    const Eigen::SparseMatrix<double> A = assemble_L(f, mask, params);
    const long m = static_cast<long>(mask.nodes.size());

    double glb = std::numeric_limits<double>::infinity();
    for (int k = 0; k < A.outerSize(); ++k) {
        double diag = 0.0, off = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            if (it.row() == it.col()) diag = it.value();
            else off += std::abs(it.value());
        }
        glb = std::min(glb, diag - off);
    }
    double shift = std::min(0.0, glb) - 1.0;

    Eigen::SparseMatrix<double> I(2 * m, 2 * m);
    I.setIdentity();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(A - shift * I);
    if (solver.info() != Eigen::Success)
        throw IterationStall("principal_eigenpair: factorization failed");

    Eigen::VectorXd x(2 * m);
    for (long p = 0; p < m; ++p) { x[p] = 1.0; x[p + m] = -1.0; }
    x.normalize();
    double rho = x.dot(A * x);
    bool converged = false;
    int refactors = 0;
    for (int it = 1; it <= opts.max_iters; ++it) {
        Eigen::VectorXd y = solver.solve(x);
        y.normalize();
        const double rho_new = y.dot(A * y);
        const double drho = std::abs(rho_new - rho);
        x.swap(y);
        rho = rho_new;
        if (drho <= opts.tol * std::max(1.0, std::abs(rho))) {
            converged = true;
            break;
        }
        // slow settling: move the shift just below the current quotient
        if (it % 20 == 0 && refactors < 5 && drho < 1e-3) {
            shift = rho - std::max(8.0 * drho, 1e-8);
            solver.compute(A - shift * I);
            if (solver.info() != Eigen::Success)
                throw IterationStall("principal_eigenpair: refactorization failed");
            ++refactors;
        }
    }
    if (!converged)
        throw IterationStall("principal_eigenpair: Rayleigh quotient did not settle in " +
                             std::to_string(opts.max_iters) + " iterations");

    // global sign so the phi part is the nonnegative one, then (|phi|, -|psi|)
    double gap_probe = x[static_cast<long>(mask.center_node)] -
                       x[static_cast<long>(mask.center_node) + m];
    if (gap_probe < 0.0) x = -x;
    for (long p = 0; p < m; ++p) {
        x[p] = std::abs(x[p]);
        x[p + m] = -std::abs(x[p + m]);
    }
    const double lambda = x.dot(A * x) / x.squaredNorm();

    const double gap = x[static_cast<long>(mask.center_node)] -
                       x[static_cast<long>(mask.center_node) + m];
    if (gap <= 1e-14)
        throw ZeroCenterGap("principal_eigenpair: phi(center) - psi(center) <= 1e-14");
    x /= gap;

    EigenPair out;
    out.lambda = lambda;
    out.R = R;
    out.phi.assign(f.size(), 0.0);
    out.psi.assign(f.size(), 0.0);
    for (long p = 0; p < m; ++p) {
        out.phi[mask.nodes[p]] = x[p];
        out.psi[mask.nodes[p]] = x[p + m];
    }
    out.normalization = out.phi[mask.nodes[mask.center_node]] -
                        out.psi[mask.nodes[mask.center_node]];
    return out;
}

// ---------------------------------------------------------------------------
// Ratio form Q and decay diagnostics
// ---------------------------------------------------------------------------

struct QFormResult {
    std::vector<double> values; // pointwise Q, NaN where masked
    std::vector<unsigned char> valid;
    double total = 0.0;         // h^dims * sum over valid nodes
    std::size_t n_valid = 0;
};

namespace detail {

// validity of the reference pair per node: interior, above magnitude
// threshold; throws ReferenceNotSigned if a node passes the magnitude test
// with the wrong sign.
inline std::vector<unsigned char> reference_mask(const Field& f, const PerturbationPair& ref,
                                                 double threshold) {
    if (ref.xi.size() != f.size() || ref.eta.size() != f.size())
        throw GridMismatch("reference_mask: reference size mismatch");
    double mphi = 0.0, mpsi = 0.0;
    for (std::size_t i = 0; i < ref.xi.size(); ++i) {
        mphi = std::max(mphi, std::abs(ref.xi[i]));
        mpsi = std::max(mpsi, std::abs(ref.eta[i]));
    }
    const double thr_phi = threshold * mphi, thr_psi = threshold * mpsi;
    std::vector<unsigned char> ok(f.size(), 0);
    for (int i2 = 0; i2 < f.n2; ++i2) {
        for (int i1 = 0; i1 < f.n1; ++i1) {
            if (!interior_node(f, i1, i2)) continue;
            const std::size_t id = f.idx(i1, i2);
            if (std::abs(ref.xi[id]) < thr_phi || std::abs(ref.eta[id]) < thr_psi) continue;
            if (ref.xi[id] <= 0.0 || ref.eta[id] >= 0.0)
                throw ReferenceNotSigned("reference pair violates phi > 0 > psi on the evaluation set");
            ok[id] = 1;
        }
    }
    return ok;
}

} // namespace detail

// Divergence form: Q = -sigma div(phi^2 grad sigma) - tau div(psi^2 grad tau),
// with face-averaged phi^2 and all five stencil nodes required valid.
inline QFormResult q_ratio_form(const Field& f, const PerturbationPair& ref,
                                const SlopePair& slopes, const Params& /*params*/,
                                double threshold = 1e-10) {
    if (slopes.sigma.size() != f.size() || slopes.valid.size() != f.size())
        throw GridMismatch("q_ratio_form: slope pair size mismatch");
    const auto ok = detail::reference_mask(f, ref, threshold);
    QFormResult res;
    res.values.assign(f.size(), std::numeric_limits<double>::quiet_NaN());
    res.valid.assign(f.size(), 0);
    const double ih2 = 1.0 / sq(f.h);
    auto at = [&](const std::vector<double>& a, int i1, int i2) {
        return a[f.idx(detail::wrap(i1, f.n1), detail::wrap(i2, f.n2))];
    };
    auto usable = [&](int i1, int i2) {
        if (f.bc1 != BcKind::Periodic && (i1 < 0 || i1 >= f.n1)) return false;
        if (f.dims == 2 && f.bc2 != BcKind::Periodic && (i2 < 0 || i2 >= f.n2)) return false;
        const std::size_t id = f.idx(detail::wrap(i1, f.n1), detail::wrap(i2, f.n2));
        return ok[id] != 0 && slopes.valid[id] != 0;
    };
    for (int i2 = 0; i2 < f.n2; ++i2) {
        for (int i1 = 0; i1 < f.n1; ++i1) {
            if (!usable(i1, i2)) continue;
            bool nb = usable(i1 - 1, i2) && usable(i1 + 1, i2);
            if (f.dims == 2) nb = nb && usable(i1, i2 - 1) && usable(i1, i2 + 1);
            if (!nb) continue;
            const std::size_t id = f.idx(i1, i2);
            auto div_term = [&](const std::vector<double>& w, const std::vector<double>& sl) {
                const double w0 = sq(w[id]);
                double acc = 0.0;
                const double wl = sq(at(w, i1 - 1, i2)), wr = sq(at(w, i1 + 1, i2));
                acc += 0.5 * (wr + w0) * (at(sl, i1 + 1, i2) - sl[id]) -
                       0.5 * (w0 + wl) * (sl[id] - at(sl, i1 - 1, i2));
                if (f.dims == 2) {
                    const double wd = sq(at(w, i1, i2 - 1)), wu = sq(at(w, i1, i2 + 1));
                    acc += 0.5 * (wu + w0) * (at(sl, i1, i2 + 1) - sl[id]) -
                           0.5 * (w0 + wd) * (sl[id] - at(sl, i1, i2 - 1));
                }
                return acc * ih2;
            };
            const double q = -slopes.sigma[id] * div_term(ref.xi, slopes.sigma) -
                             slopes.tau[id] * div_term(ref.eta, slopes.tau);
            res.values[id] = q;
            res.valid[id] = 1;
            res.total += q;
            ++res.n_valid;
        }
    }
    res.total *= std::pow(f.h, f.dims);
    return res;
}

// Laplacian form of the same object:
//   Q = -xi Lap xi + sigma^2 phi Lap phi - eta Lap eta + tau^2 psi Lap psi,
// with (xi,eta) = (phi sigma, psi tau).  Agrees with the divergence form to
// O(h^2) on smooth inputs.
inline QFormResult q_ratio_form_laplacian(const Field& f, const PerturbationPair& ref,
                                          const SlopePair& slopes, const Params& /*params*/,
                                          double threshold = 1e-10) {
    if (slopes.sigma.size() != f.size() || slopes.valid.size() != f.size())
        throw GridMismatch("q_ratio_form_laplacian: slope pair size mismatch");
    const auto ok = detail::reference_mask(f, ref, threshold);
    QFormResult res;
    res.values.assign(f.size(), std::numeric_limits<double>::quiet_NaN());
    res.valid.assign(f.size(), 0);
    const double ih2 = 1.0 / sq(f.h);
    auto usable = [&](int i1, int i2) {
        if (f.bc1 != BcKind::Periodic && (i1 < 0 || i1 >= f.n1)) return false;
        if (f.dims == 2 && f.bc2 != BcKind::Periodic && (i2 < 0 || i2 >= f.n2)) return false;
        const std::size_t id = f.idx(detail::wrap(i1, f.n1), detail::wrap(i2, f.n2));
        return ok[id] != 0 && slopes.valid[id] != 0;
    };
    auto id_of = [&](int i1, int i2) {
        return f.idx(detail::wrap(i1, f.n1), detail::wrap(i2, f.n2));
    };
    for (int i2 = 0; i2 < f.n2; ++i2) {
        for (int i1 = 0; i1 < f.n1; ++i1) {
            if (!usable(i1, i2)) continue;
            bool nb = usable(i1 - 1, i2) && usable(i1 + 1, i2);
            if (f.dims == 2) nb = nb && usable(i1, i2 - 1) && usable(i1, i2 + 1);
            if (!nb) continue;
            const std::size_t id = f.idx(i1, i2);
            auto lap = [&](auto&& value) {
                double acc = value(id_of(i1 - 1, i2)) - 2.0 * value(id) + value(id_of(i1 + 1, i2));
                if (f.dims == 2)
                    acc += value(id_of(i1, i2 - 1)) - 2.0 * value(id) + value(id_of(i1, i2 + 1));
                return acc * ih2;
            };
            const double sg = slopes.sigma[id], ta = slopes.tau[id];
            const double lap_xi = lap([&](std::size_t j) { return ref.xi[j] * slopes.sigma[j]; });
            const double lap_eta = lap([&](std::size_t j) { return ref.eta[j] * slopes.tau[j]; });
            const double lap_phi = lap([&](std::size_t j) { return ref.xi[j]; });
            const double lap_psi = lap([&](std::size_t j) { return ref.eta[j]; });
            const double q = -(ref.xi[id] * sg) * lap_xi + sg * sg * ref.xi[id] * lap_phi -
                             (ref.eta[id] * ta) * lap_eta + ta * ta * ref.eta[id] * lap_psi;
            res.values[id] = q;
            res.valid[id] = 1;
            res.total += q;
            ++res.n_valid;
        }
    }
    res.total *= std::pow(f.h, f.dims);
    return res;
}

struct DecayResult {
    std::vector<double> I;   // I(R) per requested radius
    bool domain_warning = false; // some R^2 exceeded the domain extent
};

// I(R) = int_{B_R} phi^2 |grad sigma|^2 + psi^2 |grad tau|^2, assembled over
// faces whose endpoints are both valid and inside the disc.
inline DecayResult caccioppoli_decay(const Field& f, const PerturbationPair& ref,
                                     const SlopePair& slopes, const std::vector<double>& radii,
                                     double threshold = 1e-10,
                                     std::array<double, 2> center = {0.0, 0.0}) {
    for (std::size_t k = 0; k + 1 < radii.size(); ++k)
        if (radii[k + 1] <= radii[k]) throw Error("caccioppoli_decay: radii must be increasing");
    if (!radii.empty() && radii.front() <= 2.0)
        throw Error("caccioppoli_decay: radii must exceed 2");
    const auto ok = detail::reference_mask(f, ref, threshold);
    DecayResult out;
    const double half_extent = 0.5 * std::min(f.extent1(), f.dims == 2 ? f.extent2() : f.extent1());
    auto pos = [&](int i1, int i2) {
        return std::array<double, 2>{f.x1(i1) - center[0],
                                     f.dims == 2 ? f.x2(i2) - center[1] : 0.0};
    };
    for (double R : radii) {
        if (R * R > half_extent) out.domain_warning = true;
        double I = 0.0;
        for (int i2 = 0; i2 < f.n2; ++i2) {
            for (int i1 = 0; i1 < f.n1; ++i1) {
                const std::size_t id = f.idx(i1, i2);
                if (!ok[id] || !slopes.valid[id]) continue;
                const auto p0 = pos(i1, i2);
                if (p0[0] * p0[0] + p0[1] * p0[1] > R * R) continue;
                auto face = [&](int j1, int j2) {
                    if (f.bc1 != BcKind::Periodic && (j1 < 0 || j1 >= f.n1)) return;
                    if (f.dims == 2 && f.bc2 != BcKind::Periodic && (j2 < 0 || j2 >= f.n2)) return;
                    const std::size_t jd =
                        f.idx(detail::wrap(j1, f.n1), detail::wrap(j2, f.n2));
                    if (!ok[jd] || !slopes.valid[jd]) return;
                    const auto p1 = pos(detail::wrap(j1, f.n1), detail::wrap(j2, f.n2));
                    if (p1[0] * p1[0] + p1[1] * p1[1] > R * R) return;
                    const double gphi = 0.5 * (sq(ref.xi[id]) + sq(ref.xi[jd])) *
                                        sq((slopes.sigma[jd] - slopes.sigma[id]) / f.h);
                    const double gpsi = 0.5 * (sq(ref.eta[id]) + sq(ref.eta[jd])) *
                                        sq((slopes.tau[jd] - slopes.tau[id]) / f.h);
                    I += gphi + gpsi;
                };
                face(i1 + 1, i2);
                if (f.dims == 2) face(i1, i2 + 1);
            }
        }
        out.I.push_back(I * std::pow(f.h, f.dims));
    }
    return out;
}

struct GrowthCheckRow {
    double R = 0.0;
    double mass = 0.0;  // int_{B_R} (xi^2 + eta^2)
    double ratio = 0.0; // mass / R^2
};

// Quadratic-growth hypothesis check: directional-derivative mass over discs.
// direction: 0 -> d/dx1, 1 -> d/dx2.
inline std::vector<GrowthCheckRow> check_quadratic_growth(const Field& f,
                                                          const std::vector<double>& radii,
                                                          int direction = 0,
                                                          std::array<double, 2> center = {0.0, 0.0}) {
    std::vector<GrowthCheckRow> rows;
    const double i2h = 1.0 / (2.0 * f.h);
    for (double R : radii) {
        GrowthCheckRow row;
        row.R = R;
        double s = 0.0;
        for (int i2 = 0; i2 < f.n2; ++i2) {
            for (int i1 = 0; i1 < f.n1; ++i1) {
                if (!detail::interior_node(f, i1, i2)) continue;
                const double dx = f.x1(i1) - center[0];
                const double dy = (f.dims == 2) ? f.x2(i2) - center[1] : 0.0;
                if (dx * dx + dy * dy > R * R) continue;
                double xi, eta;
                if (direction == 0) {
                    const int l = (f.bc1 == BcKind::Periodic) ? detail::wrap(i1 - 1, f.n1) : i1 - 1;
                    const int r = (f.bc1 == BcKind::Periodic) ? detail::wrap(i1 + 1, f.n1) : i1 + 1;
                    xi = (f.u[f.idx(r, i2)] - f.u[f.idx(l, i2)]) * i2h;
                    eta = (f.v[f.idx(r, i2)] - f.v[f.idx(l, i2)]) * i2h;
                } else {
                    const int d = (f.bc2 == BcKind::Periodic) ? detail::wrap(i2 - 1, f.n2) : i2 - 1;
                    const int u = (f.bc2 == BcKind::Periodic) ? detail::wrap(i2 + 1, f.n2) : i2 + 1;
                    xi = (f.u[f.idx(i1, u)] - f.u[f.idx(i1, d)]) * i2h;
                    eta = (f.v[f.idx(i1, u)] - f.v[f.idx(i1, d)]) * i2h;
                }
                s += xi * xi + eta * eta;
            }
        }
        row.mass = s * std::pow(f.h, f.dims);
        row.ratio = row.mass / (R * R);
        rows.push_back(row);
    }
    return rows;
}

} // namespace rabiwall
