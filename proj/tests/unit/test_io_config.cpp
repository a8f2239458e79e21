#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rabiwall/config.hpp"
#include "rabiwall/io.hpp"
#include "rabiwall/presets.hpp"
#include "rabiwall/profile1d.hpp"

using namespace rabiwall;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
    fs::path path;
    TmpDir() {
        path = fs::temp_directory_path() / ("rabiwall_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TmpDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("config parsing: sections, comments, values", "[io_config]") {
    const std::string text =
        "# comment\n"
        "[profile]\n"
        "alpha = 2\n"
        "omega = 0.6\n"
        "n = 4001\n"
        "\n"
        "[flow]\n"
        "radii = 5, 10, 20\n";
    ConfigFile cfg = parse_config_text(text);
    SectionView prof(cfg, "profile");
    CHECK(prof.require_double("alpha") == 2.0);
    CHECK(prof.get_double("omega", 0.0) == 0.6);
    CHECK(prof.get_int("n", 0) == 4001);
    CHECK(prof.get_double("absent", 7.5) == 7.5);
    prof.finish();
    SectionView flow(cfg, "flow");
    const auto radii = flow.get_list("radii", {});
    REQUIRE(radii.size() == 3);
    CHECK(radii[1] == 10.0);
    flow.finish();
}

TEST_CASE("config errors carry line numbers", "[io_config]") {
    CHECK_THROWS_WITH(parse_config_text("[a]\nkey value\n"),
                      Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(parse_config_text("key = 1\n"),
                      Catch::Matchers::ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config_text("[a]\nx = 1\nx = 2\n"),
                      Catch::Matchers::ContainsSubstring("duplicate"));
    ConfigFile cfg = parse_config_text("[a]\nx = nope\n");
    SectionView a(cfg, "a");
    CHECK_THROWS_WITH(a.get_double("x", 0.0), Catch::Matchers::ContainsSubstring("line 2"));

    // unknown keys are rejected by finish()
    ConfigFile cfg2 = parse_config_text("[a]\ngood = 1\nmystery = 2\n");
    SectionView a2(cfg2, "a");
    a2.get_double("good", 0.0);
    CHECK_THROWS_WITH(a2.finish(), Catch::Matchers::ContainsSubstring("mystery"));

    CHECK_THROWS_AS(check_known_sections(parse_config_text("[nope]\nx=1\n"), {"a"}),
                    ConfigError);
}

TEST_CASE("command-line overrides", "[io_config]") {
    ConfigFile cfg = parse_config_text("[profile]\nalpha = 2\n");
    apply_overrides(cfg, {"alpha=3", "global.seed=42"}, "profile");
    SectionView prof(cfg, "profile");
    CHECK(prof.require_double("alpha") == 3.0);
    SectionView glob(cfg, "global");
    CHECK(glob.get_int("seed", 0) == 42);
    CHECK_THROWS_AS(apply_overrides(cfg, {"novaluehere"}, "profile"), ConfigError);
}

TEST_CASE("atomic write leaves no temp files and overwrites cleanly", "[io_config]") {
    TmpDir tmp;
    const std::string p = tmp.file("sub/data.txt");
    atomic_write(p, "first\n");
    atomic_write(p, "second\n");
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    CHECK(line == "second");
    CHECK_FALSE(fs::exists(p + ".tmp"));
}

TEST_CASE("snapshot round trip is bit exact", "[io_config]") {
    TmpDir tmp;
    const Params params = validate_params(2.0, 0.6);
    const Field f = bent_wall_field(params, 0.1, 1, 16, 17, 0.37);
    const std::string p = tmp.file("snap.txt");
    write_snapshot(p, f);
    const Field g = read_snapshot(p);
    CHECK(g.dims == f.dims);
    CHECK(g.n1 == f.n1);
    CHECK(g.n2 == f.n2);
    CHECK(g.h == f.h);
    CHECK(g.origin == f.origin);
    CHECK(g.bc1 == f.bc1);
    CHECK(g.bc2 == f.bc2);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(g.u[i] == f.u[i]);
        CHECK(g.v[i] == f.v[i]);
    }
    CHECK_THROWS_AS(read_snapshot(tmp.file("missing.txt")), IoError);
}

TEST_CASE("csv writers produce the documented headers", "[io_config]") {
    TmpDir tmp;
    const Params params = validate_params(2.0, 0.6);
    const Profile1D prof = solve_profile(params, Grid1D(10.0, 101));
    write_profile_csv(tmp.file("profile.csv"), prof);
    std::ifstream in(tmp.file("profile.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,U,V");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 101);

    EnergyScan scan;
    scan.R = 2.0;
    scan.t_samples = {0.0, 1.0};
    scan.E = {0.5, 0.25};
    scan.total_variation = 0.25;
    write_scan_csv(tmp.file("scan.csv"), scan);
    std::ifstream sin(tmp.file("scan.csv"));
    std::getline(sin, header);
    CHECK(header == "t,E");

    GrowthFit fit;
    fit.rows = {{1.0, 2.0, 2.0}, {2.0, 4.0, 2.0}};
    write_growth_csv(tmp.file("growth.csv"), fit);
    std::ifstream gin(tmp.file("growth.csv"));
    std::getline(gin, header);
    CHECK(header == "R,J,J_over_R_pow");
}

TEST_CASE("eigenpair export carries the lambda sidecar line", "[io_config]") {
    TmpDir tmp;
    const Field f = constant_field({0.3, 0.9}, 2, 4, 4, 0.5);
    EigenPair ep;
    ep.lambda = 0.5;
    ep.R = 1.0;
    ep.phi.assign(f.size(), 1.0);
    ep.psi.assign(f.size(), -1.0);
    write_eigenpair_csv(tmp.file("eig.csv"), f, ep);
    std::ifstream in(tmp.file("eig.csv"));
    std::string l1, l2;
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(l1 == "lambda_R=0.5");
    CHECK(l2 == "x1,x2,phi,psi");
}

TEST_CASE("fmt17 round-trips doubles exactly", "[io_config]") {
    Rng rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double x = uni(rng) * std::pow(10.0, int(uni(rng) * 30));
        CHECK(std::stod(fmt17(x)) == x);
    }
}
