#pragma once

// File output for profiles, scans, spectra and flow snapshots.  Every writer
// goes through atomic_write (temp file + rename) so interrupted runs never
// leave truncated files.  Doubles are printed with 17 significant digits,
// which round-trips IEEE doubles exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rabiwall/common.hpp"
#include "rabiwall/energy.hpp"
#include "rabiwall/grid.hpp"
#include "rabiwall/linearized.hpp"
#include "rabiwall/profile1d.hpp"

namespace rabiwall {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("rename to " + path + " failed: " + ec.message());
}

inline void write_profile_csv(const std::string& path, const Profile1D& p) {
    std::ostringstream out;
    out << "t,U,V\n";
    for (int k = 0; k < p.grid.n; ++k)
        out << fmt17(p.grid.t(k)) << ',' << fmt17(p.U[k]) << ',' << fmt17(p.V[k]) << '\n';
    atomic_write(path, out.str());
}

inline void write_scan_csv(const std::string& path, const EnergyScan& scan) {
    std::ostringstream out;
    out << "t,E\n";
    for (std::size_t k = 0; k < scan.E.size(); ++k)
        out << fmt17(scan.t_samples[k]) << ',' << fmt17(scan.E[k]) << '\n';
    atomic_write(path, out.str());
}

inline void write_growth_csv(const std::string& path, const GrowthFit& fit) {
    std::ostringstream out;
    out << "R,J,J_over_R_pow\n";
    for (const auto& r : fit.rows)
        out << fmt17(r.R) << ',' << fmt17(r.J) << ',' << fmt17(r.ratio) << '\n';
    atomic_write(path, out.str());
}

// Eigenpair snapshot: sidecar line with the eigenvalue, then x1,x2,phi,psi rows.
inline void write_eigenpair_csv(const std::string& path, const Field& f, const EigenPair& ep) {
    std::ostringstream out;
    out << "lambda_R=" << fmt17(ep.lambda) << '\n';
    out << "x1,x2,phi,psi\n";
    for (int i2 = 0; i2 < f.n2; ++i2)
        for (int i1 = 0; i1 < f.n1; ++i1) {
            const std::size_t id = f.idx(i1, i2);
            out << fmt17(f.x1(i1)) << ',' << fmt17(f.x2(i2)) << ','
                << fmt17(ep.phi[id]) << ',' << fmt17(ep.psi[id]) << '\n';
        }
    atomic_write(path, out.str());
}

inline void write_decay_csv(const std::string& path, const std::vector<double>& radii,
                            const std::vector<double>& I) {
    std::ostringstream out;
    out << "R,I\n";
    for (std::size_t k = 0; k < radii.size(); ++k)
        out << fmt17(radii[k]) << ',' << fmt17(I[k]) << '\n';
    atomic_write(path, out.str());
}

// Snapshot: header `dims nx ny h ox oy bc_x1 bc_x2`, then row-major u, then v.
inline void write_snapshot(const std::string& path, const Field& f) {
    std::ostringstream out;
    out << f.dims << ' ' << f.n1 << ' ' << f.n2 << ' ' << fmt17(f.h) << ' '
        << fmt17(f.origin[0]) << ' ' << fmt17(f.origin[1]) << ' '
        << bc_name(f.bc1) << ' ' << bc_name(f.bc2) << '\n';
    for (std::size_t i = 0; i < f.size(); ++i) out << fmt17(f.u[i]) << '\n';
    for (std::size_t i = 0; i < f.size(); ++i) out << fmt17(f.v[i]) << '\n';
    atomic_write(path, out.str());
}

inline Field read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open snapshot " + path);
    int dims, n1, n2;
    double h, ox, oy;
    std::string b1, b2;
    if (!(in >> dims >> n1 >> n2 >> h >> ox >> oy >> b1 >> b2))
        throw IoError("malformed snapshot header in " + path);
    Field f(dims, n1, n2, h, {ox, oy}, bc_from_name(b1), bc_from_name(b2));
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!(in >> f.u[i])) throw IoError("truncated snapshot (u block) in " + path);
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!(in >> f.v[i])) throw IoError("truncated snapshot (v block) in " + path);
    return f;
}

} // namespace rabiwall
