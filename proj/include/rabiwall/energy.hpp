#pragma once

// Ginzburg-Landau energy J(u,v,window) = int (|grad u|^2 + |grad v|^2)/2 + W,
// the cube-translation scan E(t) and the growth-exponent fit against R^(n-1).
//
// Quadrature convention: the energy is assembled cell-wise.  On each grid
// cell the gradient components are face-centered differences of the corner
// values and the potential is the average of the four corners.  A window is
// then an exact union of cells, which makes partition additivity hold to
// machine precision.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "rabiwall/common.hpp"
#include "rabiwall/grid.hpp"
#include "rabiwall/potential.hpp"

namespace rabiwall {

struct EnergyScan {
    double R = 0.0;
    std::vector<double> t_samples;
    std::vector<double> E;
    double total_variation = 0.0;
};

struct GrowthRow {
    double R = 0.0;
    double J = 0.0;
    double ratio = 0.0; // J / R^(dims-1)
};

struct GrowthFit {
    bool degenerate = false; // some window had J = 0 (constant field)
    double exponent = 0.0;   // log-log least-squares slope; NaN when degenerate
    std::vector<GrowthRow> rows;
};

namespace detail {

struct CellRange {
    int lo1 = 0, n1 = 0; // first cell index and number of cells per axis
    int lo2 = 0, n2 = 0;
};

inline CellRange window_cells(const Field& f, const Window& w) {
    CellRange r;
    const int max1 = (f.bc1 == BcKind::Periodic) ? f.n1 : f.n1 - 1;
    r.lo1 = snap_index(w.lo1, f.origin[0], f.h, max1, "gl_energy");
    const int hi1 = snap_index(w.hi1, f.origin[0], f.h, max1, "gl_energy");
    r.n1 = hi1 - r.lo1;
    if (f.dims == 2) {
        const int max2 = (f.bc2 == BcKind::Periodic) ? f.n2 : f.n2 - 1;
        r.lo2 = snap_index(w.lo2, f.origin[1], f.h, max2, "gl_energy");
        const int hi2 = snap_index(w.hi2, f.origin[1], f.h, max2, "gl_energy");
        r.n2 = hi2 - r.lo2;
        if (r.n2 < 1) throw WindowOutOfDomain("gl_energy: empty window along x2");
    }
    if (r.n1 < 1) throw WindowOutOfDomain("gl_energy: empty window along x1");
    return r;
}

} // namespace detail

inline double gl_energy(const Field& f, const Window& w, const Params& params) {
    const auto cells = detail::window_cells(f, w);
    const double h = f.h;
    if (f.dims == 1) {
        double e = 0.0;
        for (int c = cells.lo1; c < cells.lo1 + cells.n1; ++c) {
            const int a = c, b = (c + 1) % f.n1;
            const double du = (f.u[b] - f.u[a]) / h;
            const double dv = (f.v[b] - f.v[a]) / h;
            const double wa = potential_value({f.u[a], f.v[a]}, params);
            const double wb = potential_value({f.u[b], f.v[b]}, params);
            e += h * (0.5 * (du * du + dv * dv) + 0.5 * (wa + wb));
        }
        return e;
    }
    // per-row partial sums combined in row order: results are bit-identical
    // for any worker count
    std::vector<double> rowsum(cells.n2, 0.0);
    parallel_rows(cells.n2, [&](int r) {
        const int c2 = cells.lo2 + r;
        const int j0 = c2, j1 = c2 + 1;
        double row = 0.0;
        for (int c1 = cells.lo1; c1 < cells.lo1 + cells.n1; ++c1) {
            const int i0 = c1, i1 = (c1 + 1) % f.n1;
            const std::size_t a = f.idx(i0, j0), b = f.idx(i1, j0);
            const std::size_t c = f.idx(i0, j1), d = f.idx(i1, j1);
            const double dux = (f.u[b] - f.u[a] + f.u[d] - f.u[c]) / (2.0 * h);
            const double duy = (f.u[c] - f.u[a] + f.u[d] - f.u[b]) / (2.0 * h);
            const double dvx = (f.v[b] - f.v[a] + f.v[d] - f.v[c]) / (2.0 * h);
            const double dvy = (f.v[c] - f.v[a] + f.v[d] - f.v[b]) / (2.0 * h);
            const double wavg = 0.25 * (potential_value({f.u[a], f.v[a]}, params) +
                                        potential_value({f.u[b], f.v[b]}, params) +
                                        potential_value({f.u[c], f.v[c]}, params) +
                                        potential_value({f.u[d], f.v[d]}, params));
            row += 0.5 * (dux * dux + duy * duy + dvx * dvx + dvy * dvy) + wavg;
        }
        rowsum[r] = row;
    });
    double e = 0.0;
    for (double r : rowsum) e += r;
    return e * h * h;
}

// E(t) = J over the translated cube [c1-R, c1+R] x [t-R, t+R]; t samples are
// snapped to the grid.  total_variation is sum |E_{k+1} - E_k|.
inline EnergyScan energy_translation_scan(const Field& f, double R, double t_min,
                                          double t_max, int steps, const Params& params) {
    if (f.dims != 2) throw GridMismatch("energy_translation_scan: 2D field required");
    if (steps < 2) throw Error("energy_translation_scan: need at least 2 samples");
    EnergyScan scan;
    scan.R = R;
    const double c1 = f.origin[0] + 0.5 * f.extent1();
    for (int k = 0; k < steps; ++k) {
        const double t_raw = t_min + (t_max - t_min) * k / (steps - 1);
        // snap the cube face, hence t itself, to the grid
        const int jlo = snap_index(t_raw - R, f.origin[1], f.h, f.n2 - 1,
                                   "energy_translation_scan");
        const double t = f.origin[1] + jlo * f.h + R;
        if (!scan.t_samples.empty() && t <= scan.t_samples.back())
            throw Error("energy_translation_scan: sample spacing finer than the grid "
                        "(t_samples must be strictly increasing)");
        Window w{c1 - R, c1 + R, t - R, t + R};
        scan.t_samples.push_back(t);
        scan.E.push_back(gl_energy(f, w, params));
    }
    for (std::size_t k = 0; k + 1 < scan.E.size(); ++k)
        scan.total_variation += std::abs(scan.E[k + 1] - scan.E[k]);
    return scan;
}

// Check of the boundary-integral identity behind the scan:
//   dE/dt = oint_{dQ_t} { d2u * du/dnu + d2v * dv/dnu }.
// Returns {centered difference of E, discrete surface integral}.
inline std::array<double, 2> scan_derivative_identity(const Field& f, double R, double t,
                                                      double delta, const Params& params) {
    if (f.dims != 2) throw GridMismatch("scan_derivative_identity: 2D field required");
    const double c1 = f.origin[0] + 0.5 * f.extent1();
    auto E_at = [&](double tc) {
        Window w{c1 - R, c1 + R, tc - R, tc + R};
        return gl_energy(f, w, params);
    };
    const double lhs = (E_at(t + delta) - E_at(t - delta)) / (2.0 * delta);

    const int ilo = snap_index(c1 - R, f.origin[0], f.h, f.n1 - 1, "scan identity");
    const int ihi = snap_index(c1 + R, f.origin[0], f.h, f.n1 - 1, "scan identity");
    const int jlo = snap_index(t - R, f.origin[1], f.h, f.n2 - 1, "scan identity");
    const int jhi = snap_index(t + R, f.origin[1], f.h, f.n2 - 1, "scan identity");
    if (ilo < 1 || jlo < 1 || ihi > f.n1 - 2 || jhi > f.n2 - 2)
        throw WindowOutOfDomain("scan_derivative_identity: cube touches the grid edge");
    auto d1 = [&](const std::vector<double>& a, int i, int j) {
        return (a[f.idx(i + 1, j)] - a[f.idx(i - 1, j)]) / (2.0 * f.h);
    };
    auto d2 = [&](const std::vector<double>& a, int i, int j) {
        return (a[f.idx(i, j + 1)] - a[f.idx(i, j - 1)]) / (2.0 * f.h);
    };
    // top and bottom faces: nu = +/- e2, integrand +/- ((d2u)^2 + (d2v)^2)
    auto horiz = [&](int j) {
        double s = 0.0;
        for (int i = ilo; i <= ihi; ++i) {
            const double g = sq(d2(f.u, i, j)) + sq(d2(f.v, i, j));
            s += (i == ilo || i == ihi) ? 0.5 * g : g;
        }
        return s * f.h;
    };
    // left and right faces: nu = -/+ e1, integrand -/+ (d2u*d1u + d2v*d1v)
    auto vert = [&](int i) {
        double s = 0.0;
        for (int j = jlo; j <= jhi; ++j) {
            const double g = d2(f.u, i, j) * d1(f.u, i, j) + d2(f.v, i, j) * d1(f.v, i, j);
            s += (j == jlo || j == jhi) ? 0.5 * g : g;
        }
        return s * f.h;
    };
    const double rhs = horiz(jhi) - horiz(jlo) + vert(ihi) - vert(ilo);
    return {lhs, rhs};
}

// Least-squares fit of log J against log R over centered square windows, plus
// the per-radius ratios J / R^(dims-1).
inline GrowthFit energy_growth_exponent(const Field& f, const std::vector<double>& radii,
                                        const Params& params) {
    if (radii.size() < 3) throw Error("energy_growth_exponent: need at least 3 radii");
    GrowthFit fit;
    const int nm1 = f.dims - 1;
    for (double R : radii) {
        GrowthRow row;
        row.R = R;
        row.J = gl_energy(f, Window::centered_square(f, R), params);
        // constant steady fields produce roundoff-level J, not an exact zero
        if (row.J <= 1e-20) fit.degenerate = true;
        row.ratio = row.J / std::pow(R, nm1);
        fit.rows.push_back(row);
    }
    if (fit.degenerate) {
        fit.exponent = std::numeric_limits<double>::quiet_NaN();
        for (auto& r : fit.rows) r.ratio = 0.0;
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(fit.rows.size());
    for (const auto& r : fit.rows) {
        const double x = std::log(r.R), y = std::log(r.J);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return fit;
}

} // namespace rabiwall
