#pragma once

// Grid containers: the symmetric 1D grid used by the profile solver and the
// two-component grid function (Field) used by the 2D machinery.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "rabiwall/common.hpp"

namespace rabiwall {

// Symmetric 1D grid on [-L, L] with an odd node count so the middle node sits
// exactly at t = 0.
struct Grid1D {
    double L = 0.0;
    int n = 0;

    Grid1D() = default;
    Grid1D(double half_length, int nodes) : L(half_length), n(nodes) {
        if (!(L > 0.0)) throw Error("Grid1D: half length must be positive");
        if (n < 3 || n % 2 == 0) throw Error("Grid1D: node count must be odd and >= 3");
    }
    double h() const { return 2.0 * L / (n - 1); }
    int mid() const { return (n - 1) / 2; }
    double t(int k) const { return (k - mid()) * h(); }
};

enum class BcKind { Dirichlet, Periodic, Free };

inline std::string bc_name(BcKind b) {
    switch (b) {
        case BcKind::Dirichlet: return "dirichlet";
        case BcKind::Periodic: return "periodic";
        default: return "free";
    }
}

inline BcKind bc_from_name(const std::string& s) {
    if (s == "dirichlet") return BcKind::Dirichlet;
    if (s == "periodic") return BcKind::Periodic;
    if (s == "free") return BcKind::Free;
    throw Error("unknown boundary tag '" + s + "'");
}

// Two-component grid function on a uniform 1D or 2D rectangular grid.
// Storage is row-major with x1 fastest: index = i2*n1 + i1.  On a periodic
// axis node n-1 connects back to node 0 and the physical extent is n*h; on a
// non-periodic axis the extent is (n-1)*h and the outermost nodes are
// boundary nodes (Dirichlet: frozen values; Free: no constraint).
struct Field {
    int dims = 2;
    int n1 = 0, n2 = 1;
    double h = 0.0;
    std::array<double, 2> origin{0.0, 0.0};
    BcKind bc1 = BcKind::Free, bc2 = BcKind::Free;
    std::vector<double> u, v;

    Field() = default;
    Field(int dims_, int n1_, int n2_, double h_, std::array<double, 2> origin_,
          BcKind bc1_, BcKind bc2_)
        : dims(dims_), n1(n1_), n2(n2_), h(h_), origin(origin_), bc1(bc1_), bc2(bc2_) {
        if (dims != 1 && dims != 2) throw Error("Field: dims must be 1 or 2");
        if (dims == 1) n2 = 1;
        if (n1 < 2 || n2 < 1 || (dims == 2 && n2 < 2)) throw Error("Field: bad shape");
        if (!(h > 0.0)) throw Error("Field: spacing must be positive");
        u.assign(size(), 0.0);
        v.assign(size(), 0.0);
    }

    std::size_t size() const { return static_cast<std::size_t>(n1) * n2; }
    std::size_t idx(int i1, int i2) const { return static_cast<std::size_t>(i2) * n1 + i1; }
    double x1(int i1) const { return origin[0] + i1 * h; }
    double x2(int i2) const { return origin[1] + i2 * h; }
    // extent along an axis (length covered by cells)
    double extent1() const { return (bc1 == BcKind::Periodic ? n1 : n1 - 1) * h; }
    double extent2() const { return dims == 2 ? (bc2 == BcKind::Periodic ? n2 : n2 - 1) * h : 0.0; }

    bool same_grid(const Field& o) const {
        return dims == o.dims && n1 == o.n1 && n2 == o.n2 && h == o.h &&
               origin == o.origin && bc1 == o.bc1 && bc2 == o.bc2;
    }

    void check_finite(const char* what) const {
        for (double x : u) if (!finite(x)) throw NonFiniteError(std::string(what) + ": non-finite u value");
        for (double x : v) if (!finite(x)) throw NonFiniteError(std::string(what) + ": non-finite v value");
    }
};

// Axis-aligned evaluation window in physical coordinates (1D uses lo1/hi1 only).
struct Window {
    double lo1 = 0.0, hi1 = 0.0;
    double lo2 = 0.0, hi2 = 0.0;

    static Window centered_square(const Field& f, double R) {
        const double c1 = f.origin[0] + 0.5 * f.extent1();
        if (f.dims == 1) return {c1 - R, c1 + R, 0.0, 0.0};
        const double c2 = f.origin[1] + 0.5 * f.extent2();
        return {c1 - R, c1 + R, c2 - R, c2 + R};
    }
};

// Snap a physical coordinate to the nearest node index along an axis; the
// caller is expected to use node-aligned windows, small mismatch is absorbed.
inline int snap_index(double x, double origin, double h, int n, const char* what) {
    const double fi = (x - origin) / h;
    const int i = static_cast<int>(std::lround(fi));
    if (i < 0 || i > n)
        throw WindowOutOfDomain(std::string(what) + ": coordinate " + std::to_string(x) +
                                " outside the grid");
    return i;
}

} // namespace rabiwall
