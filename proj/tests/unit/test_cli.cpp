// End-to-end runs of the command-line tool: output files, determinism, exit
// codes.  Each run goes through std::system against the built binary.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string log;
};

const char* cli_path() { return RABIWALL_CLI_PATH; }

CliRun run_cli(const std::string& args, const fs::path& dir) {
    const std::string logfile = (dir / "run.log").string();
    const std::string cmd = std::string(cli_path()) + " " + args + " > " + logfile + " 2>&1";
    const int rc = std::system(cmd.c_str());
    CliRun out;
    out.exit_code = WEXITSTATUS(rc);
    std::ifstream in(logfile);
    std::ostringstream ss;
    ss << in.rdbuf();
    out.log = ss.str();
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TmpDir {
    fs::path path;
    TmpDir() {
        path = fs::temp_directory_path() / ("rabiwall_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TmpDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("steady command writes a byte-stable report", "[cli]") {
    TmpDir tmp;
    const std::string out1 = (tmp.path / "a").string();
    const std::string out2 = (tmp.path / "b").string();
    const std::string args = "--set alpha=2 --set omega=0.6 steady";
    CHECK(run_cli("--out " + out1 + " " + args, tmp.path).exit_code == 0);
    CHECK(run_cli("--out " + out2 + " " + args, tmp.path).exit_code == 0);
    const std::string r1 = slurp(out1 + "/steady_report.txt");
    CHECK(r1 == slurp(out2 + "/steady_report.txt"));
    CHECK(r1.find("0.31622776601683794") != std::string::npos);
    CHECK(r1.find("stable") != std::string::npos);
    CHECK(r1.find("unstable") != std::string::npos);
}

TEST_CASE("invalid parameters give a config error with the constraint named", "[cli]") {
    TmpDir tmp;
    const auto r = run_cli("--out " + (tmp.path / "x").string() +
                               " --set alpha=2 --set omega=1.0 steady",
                           tmp.path);
    CHECK(r.exit_code == 1);
    CHECK(r.log.find("omega < alpha/2") != std::string::npos);
}

TEST_CASE("profile command emits the CSV and the analytic error line", "[cli]") {
    TmpDir tmp;
    const std::string out = (tmp.path / "p").string();
    const auto r = run_cli("--out " + out +
                               " --set alpha=2 --set omega=0.6 --set L=20 --set n=2001 profile",
                           tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(r.log.find("sup_err_vs_analytic=") != std::string::npos);
    const std::string csv = slurp(out + "/profile.csv");
    CHECK(csv.rfind("t,U,V\n", 0) == 0);
    // even n is a config error
    const auto bad = run_cli("--out " + out +
                                 " --set alpha=2 --set omega=0.6 --set n=2000 profile",
                             tmp.path);
    CHECK(bad.exit_code == 1);
}

TEST_CASE("profile continuation run has a summary without the analytic line", "[cli]") {
    TmpDir tmp;
    const std::string out = (tmp.path / "p35").string();
    const auto r = run_cli("--out " + out +
                               " --set alpha=3.5 --set omega=0.5 --set L=24 --set n=1201 profile",
                           tmp.path);
    CHECK(r.exit_code == 0);
    const std::string summary = slurp(out + "/profile_summary.txt");
    CHECK(summary.find("residual_inf=") != std::string::npos);
    CHECK(summary.find("sup_err_vs_analytic") == std::string::npos);
}

TEST_CASE("energy-scan command writes scan and growth files", "[cli]") {
    TmpDir tmp;
    const std::string out = (tmp.path / "e").string();
    const auto r = run_cli(
        "--out " + out +
            " --set omega=0.6 --set h=0.1 --set R=3 --set t_min=-10 --set t_max=14"
            " --set steps=25 --set growth_radii=3,4.5,6 energy-scan",
        tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(slurp(out + "/scan.csv").rfind("t,E\n", 0) == 0);
    CHECK(slurp(out + "/growth.csv").rfind("R,J,J_over_R_pow\n", 0) == 0);
}

TEST_CASE("spectrum command produces the ladder and per-radius snapshots", "[cli]") {
    TmpDir tmp;
    const std::string out = (tmp.path / "s").string();
    const auto r = run_cli("--out " + out +
                               " --set omega=0.6 --set h=0.3 --set radii=3,4.5 spectrum",
                           tmp.path);
    CHECK(r.exit_code == 0);
    const std::string ladder = slurp(out + "/ladder.csv");
    CHECK(ladder.rfind("R,lambda,status", 0) == 0);
    CHECK(ladder.find(",ok,") != std::string::npos);
    CHECK(fs::exists(out + "/eigenpair_1.csv"));
    // empty radius list is a config error
    const auto bad =
        run_cli("--out " + out + " --set omega=0.6 --set radii= spectrum", tmp.path);
    CHECK(bad.exit_code == 1);
}

TEST_CASE("flow command runs, snapshots, resumes bit-identically", "[cli]") {
    TmpDir tmp;
    const std::string out1 = (tmp.path / "f1").string();
    const std::string base = " --set omega=0.6 --set n1=48 --set n2=49 --set h=0.3"
                             " --set dt=0.1 --set amplitude=0.1 flow";
    const auto r1 = run_cli("--out " + out1 + " --set steps=80 --set snapshot_every=40" + base,
                            tmp.path);
    CHECK(r1.exit_code == 0);
    CHECK(fs::exists(out1 + "/final_snapshot.txt"));
    CHECK(fs::exists(out1 + "/diagnostics.csv"));
    CHECK(fs::exists(out1 + "/energy_history.csv"));
    CHECK(fs::exists(out1 + "/snapshot_00000040.txt"));
    CHECK(slurp(out1 + "/decay.csv").rfind("R,I\n", 0) == 0);
    CHECK(slurp(out1 + "/energy_history.csv").rfind("step,time,J\n", 0) == 0);

    // resume from the mid snapshot: final state must match byte for byte
    const std::string out2 = (tmp.path / "f2").string();
    const auto r2 = run_cli("--out " + out2 + " --set steps=40 --set resume=" + out1 +
                                "/snapshot_00000040.txt" + base,
                            tmp.path);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(out1 + "/final_snapshot.txt") == slurp(out2 + "/final_snapshot.txt"));
}

TEST_CASE("unstable flow aborts with the last good snapshot saved", "[cli]") {
    TmpDir tmp;
    const std::string out = (tmp.path / "boom").string();
    const auto r = run_cli("--out " + out +
                               " --set omega=0.6 --set n1=32 --set n2=33 --set h=0.3"
                               " --set dt=3.0 --set steps=200 --set diag_every=5 flow",
                           tmp.path);
    CHECK(r.exit_code == 2);
    CHECK(fs::exists(out + "/last_good_snapshot.txt"));
    CHECK(fs::exists(out + "/diagnostics.csv"));
}

TEST_CASE("unknown config keys are rejected", "[cli]") {
    TmpDir tmp;
    std::ofstream cfg(tmp.path / "bad.cfg");
    cfg << "[steady]\nalpha = 2\nomega = 0.6\nwhatsthis = 1\n";
    cfg.close();
    const auto r = run_cli("--config " + (tmp.path / "bad.cfg").string() + " --out " +
                               (tmp.path / "o").string() + " steady",
                           tmp.path);
    CHECK(r.exit_code == 1);
    CHECK(r.log.find("whatsthis") != std::string::npos);
    CHECK(r.log.find("line 4") != std::string::npos);
}
