// Command-line driver: steady-state reports, 1D profile solves, energy scans,
// eigenvalue ladders, 2D flow experiments and the `verify` invariant suite.
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure,
// >= 3 verify failures (the verify report carries the exact count).

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rabiwall/config.hpp"
#include "rabiwall/energy.hpp"
#include "rabiwall/flow.hpp"
#include "rabiwall/io.hpp"
#include "rabiwall/linearized.hpp"
#include "rabiwall/potential.hpp"
#include "rabiwall/presets.hpp"
#include "rabiwall/profile1d.hpp"
#include "rabiwall/verify.hpp"

namespace rw = rabiwall;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    std::uint64_t seed = 12345;
    std::vector<std::string> sets;
    bool out_set = false, threads_set = false, seed_set = false;
};

// Config file + --set overrides; [global] keys fill in whatever the
// command-line flags did not pin.
rw::ConfigFile load_config(GlobalArgs& g, const std::string& command) {
    rw::ConfigFile cfg;
    if (!g.config_path.empty()) cfg = rw::parse_config_file(g.config_path);
    rw::apply_overrides(cfg, g.sets, command);
    rw::check_known_sections(cfg, {"global", "steady", "profile", "energy-scan", "spectrum",
                                   "flow", "verify"});
    rw::SectionView glob(cfg, "global");
    if (!g.out_set) g.out_dir = glob.get_string("out", g.out_dir);
    else glob.get_string("out", g.out_dir);
    if (!g.threads_set) g.threads = static_cast<int>(glob.get_int("threads", g.threads));
    else glob.get_int("threads", g.threads);
    if (!g.seed_set) g.seed = static_cast<std::uint64_t>(glob.get_int("seed",
                                                         static_cast<long>(g.seed)));
    else glob.get_int("seed", static_cast<long>(g.seed));
    glob.finish();
    rw::worker_threads() = std::max(1, g.threads);
    return cfg;
}

std::string path_in(const GlobalArgs& g, const std::string& name) {
    return g.out_dir + "/" + name;
}

int cmd_steady(GlobalArgs g) {
    rw::ConfigFile cfg = load_config(g, "steady");
    rw::SectionView sec(cfg, "steady");
    const double alpha = sec.require_double("alpha");
    const double omega = sec.require_double("omega");
    sec.finish();
    const rw::Params p = rw::validate_params(alpha, omega);
    std::ostringstream out;
    out << "alpha=" << rw::fmt17(p.alpha) << " omega=" << rw::fmt17(p.omega) << "\n";
    out << "a=" << rw::fmt17(p.a) << " b=" << rw::fmt17(p.b) << " c=" << rw::fmt17(p.c) << "\n";
    out << "a^2+b^2-1=" << rw::fmt17(p.a * p.a + p.b * p.b - 1.0)
        << " ab-omega/alpha=" << rw::fmt17(p.a * p.b - omega / alpha) << "\n\n";
    out << "state,u,v,grad_norm,wuu,wuv,wvv,eig_lo,eig_hi,stability,admissible\n";
    const char* names[3] = {"(a,b)", "(b,a)", "(c,c)"};
    int i = 0;
    for (const auto& s : rw::steady_states(p)) {
        const auto gvec = rw::potential_gradient(s, p);
        const auto H = rw::potential_hessian(s, p);
        const double tr = H.w_uu + H.w_vv;
        const double det = H.w_uu * H.w_vv - H.w_uv * H.w_uv;
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        const double lo = tr / 2.0 - disc, hi = tr / 2.0 + disc;
        out << names[i++] << ',' << rw::fmt17(s.u) << ',' << rw::fmt17(s.v) << ','
            << rw::fmt17(std::hypot(gvec[0], gvec[1])) << ',' << rw::fmt17(H.w_uu) << ','
            << rw::fmt17(H.w_uv) << ',' << rw::fmt17(H.w_vv) << ',' << rw::fmt17(lo) << ','
            << rw::fmt17(hi) << ',' << (lo > 0.0 ? "stable" : "unstable") << ','
            << (rw::in_admissible_region(s, p, 1e-12) ? "yes" : "no") << '\n';
    }
    rw::atomic_write(path_in(g, "steady_report.txt"), out.str());
    std::cout << out.str();
    return 0;
}

int cmd_profile(GlobalArgs g) {
    rw::ConfigFile cfg = load_config(g, "profile");
    rw::SectionView sec(cfg, "profile");
    const double alpha = sec.require_double("alpha");
    const double omega = sec.require_double("omega");
    const rw::Params p = rw::validate_params(alpha, omega);
    const double L_default = std::ceil(20.0 / rw::profile_decay_rate(alpha, omega));
    const double L = sec.get_double("L", L_default);
    const long n = sec.get_int("n", 4001);
    rw::ProfileOptions opts;
    opts.tol = sec.get_double("tol", 1e-10);
    opts.max_iters = static_cast<int>(sec.get_int("max_iters", 50));
    sec.finish();
    if (n < 3 || n % 2 == 0)
        throw rw::ConfigError("[profile]: n must be odd and >= 3, got " + std::to_string(n));
    const rw::Grid1D grid(L, static_cast<int>(n));
    const rw::Profile1D prof = (alpha == 2.0)
                                   ? rw::solve_profile(p, grid, std::nullopt, opts)
                                   : rw::solve_profile_continued(alpha, omega, grid, opts);
    rw::write_profile_csv(path_in(g, "profile.csv"), prof);
    const auto mono = rw::check_monotone(prof);
    std::ostringstream out;
    out << "alpha=" << rw::fmt17(alpha) << " omega=" << rw::fmt17(omega)
        << " L=" << rw::fmt17(L) << " n=" << n << "\n";
    out << "residual_inf=" << rw::fmt17(prof.residual_inf) << "\n";
    out << "newton_iters=" << prof.newton_iters << "\n";
    out << "energy=" << rw::fmt17(rw::profile_energy(prof, p)) << "\n";
    out << "min_dU=" << rw::fmt17(mono[0]) << " max_dV=" << rw::fmt17(mono[1]) << "\n";
    out << "endpoint_err=" << rw::fmt17(std::max(std::abs(prof.U.front() - p.a),
                                                 std::abs(prof.U.back() - p.b))) << "\n";
    if (alpha == 2.0) {
        double sup = 0.0;
        for (int k = 0; k < grid.n; ++k) {
            const auto uv = rw::analytic_profile_alpha2(omega, grid.t(k));
            sup = std::max({sup, std::abs(prof.U[k] - uv[0]), std::abs(prof.V[k] - uv[1])});
        }
        out << "sup_err_vs_analytic=" << rw::fmt17(sup) << "\n";
    }
    rw::atomic_write(path_in(g, "profile_summary.txt"), out.str());
    std::cout << out.str();
    return 0;
}

rw::Field build_planar_background(double alpha, double omega, double half1, double half2,
                                  double h, rw::BcKind bc1, const rw::ProfileOptions& popts) {
    const int n1 = 2 * static_cast<int>(std::lround(half1 / h)) + 1;
    const int n2 = 2 * static_cast<int>(std::lround(half2 / h)) + 1;
    if (alpha == 2.0) {
        rw::Field f = rw::planar_wall_field(omega, n1, n2, h, bc1, rw::BcKind::Dirichlet);
        if (bc1 == rw::BcKind::Periodic) f.origin[0] = -0.5 * f.extent1();
        return f;
    }
    const rw::Grid1D grid(0.5 * (n2 - 1) * h, n2);
    const rw::Profile1D prof = rw::solve_profile_continued(alpha, omega, grid, popts);
    rw::Field f = rw::field_from_profile(prof, n1, bc1);
    if (bc1 == rw::BcKind::Periodic) f.origin[0] = -0.5 * f.extent1();
    else f.origin[0] = -0.5 * (n1 - 1) * h;
    return f;
}

int cmd_energy_scan(GlobalArgs g) {
    rw::ConfigFile cfg = load_config(g, "energy-scan");
    rw::SectionView sec(cfg, "energy-scan");
    const double alpha = sec.get_double("alpha", 2.0);
    const double omega = sec.require_double("omega");
    const double h = sec.get_double("h", 0.05);
    const double R = sec.get_double("R", 3.0);
    const double t_min = sec.get_double("t_min", -12.0);
    const double t_max = sec.get_double("t_max", 20.0);
    const long steps = sec.get_int("steps", 65);
    const auto growth_radii = sec.get_list("growth_radii", {});
    sec.finish();
    const rw::Params p = rw::validate_params(alpha, omega);
    double gmax = 0.0;
    for (double r : growth_radii) gmax = std::max(gmax, r);
    const double half1 = std::max(R + 2.0, gmax + 1.0);
    const double half2 = std::max(std::abs(t_min), std::abs(t_max)) + R + 2.0;
    rw::Field f = build_planar_background(alpha, omega, half1, std::max(half2, gmax + 1.0), h,
                                          rw::BcKind::Free, {});
    const rw::EnergyScan scan =
        rw::energy_translation_scan(f, R, t_min, t_max, static_cast<int>(steps), p);
    rw::write_scan_csv(path_in(g, "scan.csv"), scan);
    std::ostringstream out;
    out << "R=" << rw::fmt17(R) << " samples=" << scan.E.size() << "\n";
    out << "total_variation=" << rw::fmt17(scan.total_variation) << "\n";
    const double t_mid = 0.5 * (t_min + t_max);
    const auto id = rw::scan_derivative_identity(f, R, t_mid, h, p);
    out << "dE_dt_centered=" << rw::fmt17(id[0]) << " surface_integral=" << rw::fmt17(id[1])
        << "\n";
    if (!growth_radii.empty()) {
        const rw::GrowthFit fit = rw::energy_growth_exponent(f, growth_radii, p);
        rw::write_growth_csv(path_in(g, "growth.csv"), fit);
        out << "growth_exponent=" << rw::fmt17(fit.exponent) << "\n";
    }
    rw::atomic_write(path_in(g, "scan_summary.txt"), out.str());
    std::cout << out.str();
    return 0;
}

int cmd_spectrum(GlobalArgs g) {
    rw::ConfigFile cfg = load_config(g, "spectrum");
    rw::SectionView sec(cfg, "spectrum");
    const double alpha = sec.get_double("alpha", 2.0);
    const double omega = sec.require_double("omega");
    const double h = sec.get_double("h", 0.25);
    const auto radii = sec.get_list("radii", {});
    const std::string background = sec.get_string("background", "planar");
    const bool dense_check = sec.get_int("dense_check", 0) != 0;
    sec.finish();
    if (radii.empty()) throw rw::ConfigError("[spectrum]: radii list is required");
    const rw::Params p = rw::validate_params(alpha, omega);
    const double half = *std::max_element(radii.begin(), radii.end()) + 1.0;
    rw::Field f;
    if (background == "planar") {
        f = build_planar_background(alpha, omega, half, half, h, rw::BcKind::Free, {});
    } else if (background == "constant") {
        const int n = 2 * static_cast<int>(std::lround(half / h)) + 1;
        f = rw::constant_field({p.a, p.b}, 2, n, n, h);
    } else {
        throw rw::ConfigError("[spectrum]: background must be planar or constant");
    }
    std::ostringstream out;
    out << "R,lambda,status,dmin_subwindow,dmax_subwindow\n";
    int idx = 0;
    for (double R : radii) {
        ++idx;
        try {
            const rw::EigenPair ep = rw::principal_eigenpair(f, R, p);
            // D_R = phi - psi on the subwindow |x| <= min(2, R/2): empirical
            // Harnack-type spread, reported only
            double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
            const double rho = std::min(2.0, R / 2.0);
            for (int i2 = 0; i2 < f.n2; ++i2)
                for (int i1 = 0; i1 < f.n1; ++i1)
                    if (rw::sq(f.x1(i1)) + rw::sq(f.x2(i2)) <= rho * rho) {
                        const double d = ep.phi[f.idx(i1, i2)] - ep.psi[f.idx(i1, i2)];
                        dmin = std::min(dmin, d);
                        dmax = std::max(dmax, d);
                    }
            out << rw::fmt17(R) << ',' << rw::fmt17(ep.lambda) << ",ok," << rw::fmt17(dmin)
                << ',' << rw::fmt17(dmax) << '\n';
            rw::write_eigenpair_csv(path_in(g, "eigenpair_" + std::to_string(idx) + ".csv"),
                                    f, ep);
        } catch (const rw::Error& e) {
            out << rw::fmt17(R) << ",nan,failed: " << e.what() << ",nan,nan\n";
        }
    }
    if (dense_check) {
        const double R0 = *std::min_element(radii.begin(), radii.end());
        const rw::DiscMask mask = rw::disc_mask(f, R0, {0.0, 0.0});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rw::assemble_L_dense(f, mask, p),
                                                          Eigen::EigenvaluesOnly);
        out << "# dense_lambda_R" << rw::fmt17(R0) << "=" << rw::fmt17(es.eigenvalues()[0])
            << '\n';
    }
    rw::atomic_write(path_in(g, "ladder.csv"), out.str());
    std::cout << out.str();
    return 0;
}

int cmd_flow(GlobalArgs g) {
    rw::ConfigFile cfg = load_config(g, "flow");
    rw::SectionView sec(cfg, "flow");
    const double alpha = sec.get_double("alpha", 2.0);
    const double omega = sec.require_double("omega");
    const std::string preset = sec.get_string("preset", "bent");
    const long n1 = sec.get_int("n1", 256);
    const long n2 = sec.get_int("n2", 256);
    const double h = sec.get_double("h", 0.08);
    const double dt = sec.get_double("dt", 0.1);
    const long steps = sec.get_int("steps", 1200);
    const double amplitude = sec.get_double("amplitude", 0.1);
    const long periods = sec.get_int("periods", 1);
    const double theta = sec.get_double("theta", 0.3);
    const long snapshot_every = sec.get_int("snapshot_every", 0);
    const long diag_every = sec.get_int("diag_every", 20);
    const double R_decay = sec.get_double("R_decay", 0.35 * std::min(n1, n2) * h);
    const std::string resume = sec.get_string("resume", "");
    sec.finish();
    const rw::Params p = rw::validate_params(alpha, omega);

    rw::FlowState st;
    st.dt = dt;
    if (!resume.empty()) {
        st.field = rw::read_snapshot(resume);
    } else if (preset == "bent") {
        if (alpha != 2.0) throw rw::ConfigError("[flow]: bent preset requires alpha = 2");
        st.field = rw::bent_wall_field(p, amplitude, static_cast<int>(periods),
                                       static_cast<int>(n1), static_cast<int>(n2), h);
    } else if (preset == "planar") {
        if (alpha != 2.0) throw rw::ConfigError("[flow]: planar preset requires alpha = 2");
        st.field = rw::planar_wall_field(omega, static_cast<int>(n1), static_cast<int>(n2), h);
    } else if (preset == "tilted") {
        if (alpha != 2.0) throw rw::ConfigError("[flow]: tilted preset requires alpha = 2");
        st.field = rw::tilted_wall_field(omega, theta, static_cast<int>(n1),
                                         static_cast<int>(n2), h);
    } else {
        throw rw::ConfigError("[flow]: preset must be bent, planar or tilted (or use resume)");
    }

    std::ostringstream diag;
    diag << "step,time,J,flatness,slope_std,sup_sigma_minus_tau,decoupling_sup,I_R\n";
    auto sample_diag = [&]() {
        const double J = rw::gl_energy(st.field, rw::full_window(st.field), p);
        double flat = std::numeric_limits<double>::quiet_NaN();
        try {
            flat = rw::flatness_metric(st.field);
        } catch (const rw::LevelSetMissing&) {}
        const auto [slopes, rep] = rw::slope_fields(st.field, 1e-6);
        double dec = std::numeric_limits<double>::quiet_NaN();
        if (alpha == 2.0) dec = rw::decoupling_check(st.field, p).sup_dev;
        rw::PerturbationPair ref(st.field.size());
        const rw::Field& f = st.field;
        for (int i2 = 1; i2 < f.n2 - 1; ++i2)
            for (int i1 = 0; i1 < f.n1; ++i1) {
                const std::size_t id = f.idx(i1, i2);
                ref.xi[id] = (f.u[f.idx(i1, i2 + 1)] - f.u[f.idx(i1, i2 - 1)]) / (2 * f.h);
                ref.eta[id] = (f.v[f.idx(i1, i2 + 1)] - f.v[f.idx(i1, i2 - 1)]) / (2 * f.h);
            }
        double IR = std::numeric_limits<double>::quiet_NaN();
        try {
            const auto decay = rw::caccioppoli_decay(f, ref, slopes, {R_decay}, 1e-6,
                                                     {f.origin[0] + 0.5 * f.extent1(),
                                                      f.origin[1] + 0.5 * f.extent2()});
            IR = decay.I.front();
        } catch (const rw::Error&) {}
        diag << st.step_count << ',' << rw::fmt17(st.time) << ',' << rw::fmt17(J) << ','
             << rw::fmt17(flat) << ',' << rw::fmt17(std::max(rep.std_sigma, rep.std_tau)) << ','
             << rw::fmt17(rep.sup_abs_diff) << ',' << rw::fmt17(dec) << ',' << rw::fmt17(IR)
             << '\n';
    };

    sample_diag();
    long done = 0;
    rw::Field last_good = st.field;
    try {
        while (done < steps) {
            const long chunk = std::min(diag_every, steps - done);
            rw::evolve(st, static_cast<int>(chunk), p, {});
            done += chunk;
            last_good = st.field;
            sample_diag();
            if (snapshot_every > 0 && done % snapshot_every == 0) {
                char name[64];
                std::snprintf(name, sizeof(name), "snapshot_%08ld.txt", st.step_count);
                rw::write_snapshot(path_in(g, name), st.field);
            }
        }
    } catch (const rw::Error& e) {
        rw::write_snapshot(path_in(g, "last_good_snapshot.txt"), last_good);
        rw::atomic_write(path_in(g, "diagnostics.csv"), diag.str());
        std::cerr << "flow aborted: " << e.what() << "\n";
        return 2;
    }
    rw::write_snapshot(path_in(g, "final_snapshot.txt"), st.field);
    rw::atomic_write(path_in(g, "diagnostics.csv"), diag.str());
    // decay ladder on the final field
    {
        std::vector<double> radii;
        for (double s : {0.5, 0.75, 1.0})
            if (s * R_decay > 2.0) radii.push_back(s * R_decay);
        if (!radii.empty()) {
            const auto [slopes, rep] = rw::slope_fields(st.field, 1e-6);
            rw::PerturbationPair ref(st.field.size());
            const rw::Field& f = st.field;
            for (int i2 = 1; i2 < f.n2 - 1; ++i2)
                for (int i1 = 0; i1 < f.n1; ++i1) {
                    const std::size_t id = f.idx(i1, i2);
                    ref.xi[id] = (f.u[f.idx(i1, i2 + 1)] - f.u[f.idx(i1, i2 - 1)]) / (2 * f.h);
                    ref.eta[id] = (f.v[f.idx(i1, i2 + 1)] - f.v[f.idx(i1, i2 - 1)]) / (2 * f.h);
                }
            const auto decay = rw::caccioppoli_decay(f, ref, slopes, radii, 1e-6,
                                                     {f.origin[0] + 0.5 * f.extent1(),
                                                      f.origin[1] + 0.5 * f.extent2()});
            rw::write_decay_csv(path_in(g, "decay.csv"), radii, decay.I);
        }
    }
    std::ostringstream eh;
    eh << "step,time,J\n";
    for (const auto& s : st.energy_history)
        eh << s.step << ',' << rw::fmt17(s.time) << ',' << rw::fmt17(s.J) << '\n';
    rw::atomic_write(path_in(g, "energy_history.csv"), eh.str());
    for (const auto& w : st.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "flow finished: steps=" << st.step_count << " time=" << st.time
              << " residual=" << rw::elliptic_residual(st.field, p) << "\n";
    return 0;
}

int cmd_verify(GlobalArgs g) {
    rw::ConfigFile cfg = load_config(g, "verify");
    rw::SectionView sec(cfg, "verify");
    const std::string mutation_name = sec.get_string("mutation", "none");
    sec.finish();
    const rw::Mutation mutation = rw::mutation_from_name(mutation_name);
    const auto results = rw::run_verify(g.seed, mutation);
    rw::atomic_write(path_in(g, "verify_report.csv"), rw::verify_report_csv(results));
    int fails = 0;
    for (const auto& r : results) {
        std::cout << (r.pass ? "pass" : "FAIL") << "  " << r.name << "  value=" << r.value
                  << " tol=" << r.tolerance;
        if (!r.note.empty()) std::cout << "  (" << r.note << ")";
        std::cout << "\n";
        if (!r.pass) ++fails;
    }
    std::cout << fails << " of " << results.size() << " checks failed\n";
    if (fails == 0) return 0;
    return std::min(255, std::max(3, fails));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rabiwall: numerical toolkit for Rabi-coupled condensate domain walls"};
    app.require_subcommand(1);
    GlobalArgs g;
    app.add_option("--config", g.config_path, "path to a key = value config file");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--threads", g.threads, "worker threads for grid sweeps");
    app.add_option("--seed", g.seed, "seed for randomized checks");
    app.add_option("--set", g.sets, "override config keys (key=value or section.key=value)");

    auto* steady = app.add_subcommand("steady", "steady states, gradients, Hessian signs");
    auto* profile = app.add_subcommand("profile", "solve the 1D domain-wall profile");
    auto* escan = app.add_subcommand("energy-scan", "cube-translation energy scan");
    auto* spectrum = app.add_subcommand("spectrum", "principal eigenvalue ladder");
    auto* flow = app.add_subcommand("flow", "2D gradient-flow experiment");
    auto* verify = app.add_subcommand("verify", "run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    g.out_set = app.count("--out") > 0;
    g.threads_set = app.count("--threads") > 0;
    g.seed_set = app.count("--seed") > 0;
    rw::worker_threads() = std::max(1, g.threads);

    try {
        if (steady->parsed()) return cmd_steady(g);
        if (profile->parsed()) return cmd_profile(g);
        if (escan->parsed()) return cmd_energy_scan(g);
        if (spectrum->parsed()) return cmd_spectrum(g);
        if (flow->parsed()) return cmd_flow(g);
        if (verify->parsed()) return cmd_verify(g);
    } catch (const rw::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const rw::ParamsOutOfRange& e) {
        // physical parameters are validated before any solve
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const rw::Error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
