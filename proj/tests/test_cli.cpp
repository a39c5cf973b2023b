#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hfsim/checkpoint.hpp"
#include "hfsim/config.hpp"
#include "hfsim/experiments.hpp"
#include "hfsim/report.hpp"

using namespace hfsim;
namespace fs = std::filesystem;

namespace {

const char* minimal_simulate = R"(
[experiment]
kind = simulate
seed = 42

[model]
gamma = 0.5
kappa = -1

[grid]
L = 32
M = 128

[solve]
T = 0.05
dt = 0.005
)";

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hfsim_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string cli() {
    const char* p = std::getenv("HFSIM_CLI");
    return p ? p : "";
}

int run_cli(const std::string& args) { return std::system((cli() + " " + args + " > /dev/null").c_str()); }

}  // namespace

TEST_CASE("minimal simulate config round trips") {
    const ExperimentConfig c = parse_config(minimal_simulate);
    CHECK(c.kind == ExperimentKind::simulate);
    CHECK(c.model.kappa == -1.0);
    CHECK(c.grid.M == 128);
    CHECK(c.resolved_seed() == 42);
    const std::string text = serialize(c);
    CHECK(serialize(parse_config(text)) == text);
    CHECK(config_hash(parse_config(text)) == config_hash(c));
    ExperimentConfig moved = c;
    moved.output = "elsewhere";
    CHECK(config_hash(moved) == config_hash(c));
}

TEST_CASE("every experiment kind round trips") {
    for (const char* kind : {"simulate", "verify-factorization", "verify-trilinear", "norms", "illposedness-scan",
                             "counterexample"}) {
        const ExperimentConfig c = parse_config(std::string("[experiment]\nkind = ") + kind + "\n");
        CHECK(to_string(c.kind) == kind);
        CHECK(serialize(parse_config(serialize(c))) == serialize(c));
    }
}

TEST_CASE("gamma outside the cone is a named violation") {
    const std::string text = "[experiment]\nkind = simulate\n[model]\ngamma = 1.2\na = 1\n[regime]\nname = hat_lp_high\np = 4\n";
    try {
        parse_config(text);
        FAIL("expected a violation");
    } catch (const ConfigError& e) {
        bool found = false;
        for (const auto& v : e.violations)
            found = found || v == "gamma=1.2 violates 0<gamma<2d(1/2-1/p)=0.5 for p=4, d=1 (L^p-hat, a>0)";
        CHECK(found);
    }
}

TEST_CASE("regime cones") {
    auto violations = [](const std::string& body) {
        try {
            parse_config("[experiment]\nkind = simulate\n" + body);
            return std::vector<std::string>{};
        } catch (const ConfigError& e) {
            return e.violations;
        }
    };
    CHECK(violations("[model]\ngamma = 0.4\n[regime]\nname = lp\np = 1\n").empty());
    CHECK(violations("[model]\ngamma = 0.6\n[regime]\nname = lp\np = 1.2\n").empty());  // bound 2/3
    CHECK(violations("[model]\ngamma = 0.7\n[regime]\nname = lp\np = 1.2\n").size() == 1);
    CHECK(violations("[model]\ngamma = 0.4\n[regime]\nname = ill_posed\np = inf\n").empty());
    CHECK(violations("[model]\ngamma = 0.4\na = 1\n[regime]\nname = ill_posed\np = inf\n").size() == 1);
    CHECK(violations("[model]\ngamma = 0.9\n[regime]\nname = improved_1d\np = 3\n").empty());
    CHECK(violations("[model]\ngamma = 0.9\n[regime]\nname = improved_1d\np = 5\n").size() == 1);
    CHECK(violations("[monitor]\npairs = 2:2\n").size() == 1);
    CHECK(violations("[monitor]\npairs = 8:4, inf:2\n").empty());
}

TEST_CASE("missing seed is defaulted and recorded") {
    const ExperimentConfig c = parse_config("[experiment]\nkind = counterexample\n");
    CHECK_FALSE(c.seed.has_value());
    CHECK(c.resolved_seed() == ExperimentConfig::default_seed);
    CHECK(serialize(c).find("seed = 1\n") != std::string::npos);
    const fs::path out = scratch("seed");
    const ScanReport r = run_experiment(c, out);
    CHECK(r.seed == ExperimentConfig::default_seed);
    CHECK(r.notes.at("seed_source") == "default");
    const auto j = nlohmann::ordered_json::parse(slurp(out / "report.json"));
    CHECK(j.at("seed") == 1);
    CHECK(j.at("config_hash") == config_hash(c));
}

TEST_CASE("parse errors carry line numbers") {
    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("[experiment]\nkind = simulate\n[grid]\nM = many\n").find("line 4") == 0);
    CHECK(message("[experiment]\nkind = simulate\nbogus = 1\n").find("line 3: unknown key") == 0);
    CHECK(message("[experiment\n").find("line 1") == 0);
    CHECK(message("[experiment]\nkind = simulate\nkind = norms\n").find("line 3: duplicate key") == 0);
    CHECK(message("kind = simulate\n").find("line 1: key outside") == 0);
    CHECK(message("[model]\ngamma = 0.5\n") == "missing [experiment] kind");
}

TEST_CASE("subcommand must match the config kind") {
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = norms\n", ExperimentKind::simulate), ConfigError);
    CHECK(parse_config("[model]\ngamma = 0.3\n", ExperimentKind::counterexample).kind == ExperimentKind::counterexample);
}

TEST_CASE("simulate emits the documented CSV schema") {
    const fs::path out = scratch("schema");
    run_experiment(parse_config(minimal_simulate), out);
    const std::string csv = slurp(out / "norms.csv");
    CHECK(csv.rfind("t,l2_1,lp_1,hat_lp_1,drift_1,l2_2,lp_2,hat_lp_2,drift_2\n", 0) == 0);
    const auto j = nlohmann::ordered_json::parse(slurp(out / "report.json"));
    CHECK(j.at("kind") == "simulate");
    CHECK(j.at("scalars").at("max_drift").get<double>() < 1e-12);
}

TEST_CASE("scan report JSON round trips") {
    ScanReport r;
    r.kind = "k";
    r.seed = 5;
    r.config_hash = "abc";
    r.scalars["x"] = 0.1;
    r.scalars["inf"] = INFINITY;
    r.series["s"] = {1.0, -INFINITY};
    r.notes["n"] = "v";
    r.flags = {"f"};
    const ScanReport back = ScanReport::from_json(nlohmann::ordered_json::parse(r.to_json().dump()));
    CHECK(back.to_json() == r.to_json());
    CHECK(std::isinf(back.scalars.at("inf")));
}

TEST_CASE("CSV uses 17 significant digits") {
    CsvTable t({"a", "b"});
    t.add_row({0.1, 1.0 / 3.0});
    CHECK(t.str() == "a,b\n0.10000000000000001,0.33333333333333331\n");
    CHECK_THROWS(t.add_row({1.0}));
}

TEST_CASE("trajectory checkpoints round trip") {
    auto g = std::make_shared<const SpectralGrid>(1, 8.0, 16);
    Trajectory traj;
    traj.grid = g;
    traj.alpha = 1.5;
    for (int i = 0; i < 3; ++i) {
        traj.times.push_back(0.1 * i);
        Field a(16), b(16);
        for (int n = 0; n < 16; ++n) {
            a[n] = cplx(std::sin(0.3 * n + i), 1.0 / (n + 1.0));
            b[n] = cplx(-n * 1e-300, 1e300);
        }
        traj.states.push_back({a, b});
        traj.nonlinearity.push_back({b, a});
    }
    const fs::path dir = scratch("ckpt");
    write_checkpoint(dir / "traj", traj);
    const Trajectory back = read_checkpoint(dir / "traj.json");
    CHECK(back.alpha == 1.5);
    CHECK(back.times == traj.times);
    CHECK(back.states == traj.states);
    CHECK(back.nonlinearity == traj.nonlinearity);
    CHECK(fs::file_size(dir / "traj.bin") == 2 * 3 * 2 * 16 * 16);

    traj.nonlinearity.clear();
    traj.states[0][1] = traj.states[0][0];
    write_checkpoint(dir / "single", traj, Precision::complex64);
    const Trajectory low = read_checkpoint(dir / "single");
    CHECK(fs::file_size(dir / "single.bin") == 3 * 2 * 16 * 8);
    CHECK_FALSE(low.has_nonlinearity());
    for (int n = 0; n < 16; ++n) CHECK(std::abs(low.states[2][0][n] - traj.states[2][0][n]) < 1e-6);
}

TEST_CASE("checkpoint bytes are little endian") {
    auto g = std::make_shared<const SpectralGrid>(1, 8.0, 8);
    Trajectory traj;
    traj.grid = g;
    traj.times = {0.0};
    Field f(8, cplx(0.0));
    f[0] = cplx(1.0, 0.0);
    traj.states = {{f}};
    const fs::path dir = scratch("endian");
    write_checkpoint(dir / "t", traj);
    const std::string bytes = slurp(dir / "t.bin");
    // 1.0 = 0x3FF0000000000000
    CHECK(static_cast<unsigned char>(bytes[7]) == 0x3F);
    CHECK(static_cast<unsigned char>(bytes[6]) == 0xF0);
    CHECK(bytes[0] == 0);
}

TEST_CASE("CLI reruns are byte-identical") {
    REQUIRE_FALSE(cli().empty());
    const fs::path dir = scratch("determinism");
    {
        std::ofstream(dir / "tri.ini") << "[experiment]\nkind = verify-trilinear\n[model]\ngamma = 0.2\n"
                                          "[trilinear]\nestimate = le2\np = 4\nsamples = 4\npoints = 256\n"
                                          "identity_points = 128\nidentity_triples = 3\n";
    }
    const std::string cfg = (dir / "tri.ini").string();
    REQUIRE(run_cli("verify-trilinear --config " + cfg + " --out " + (dir / "a").string() + " --seed 9") == 0);
    REQUIRE(run_cli("verify-trilinear --config " + cfg + " --out " + (dir / "b").string() + " --seed 9") == 0);
    REQUIRE(run_cli("verify-trilinear --config " + cfg + " --out " + (dir / "c").string() + " --seed 10") == 0);
    CHECK(slurp(dir / "a" / "estimate.csv") == slurp(dir / "b" / "estimate.csv"));
    CHECK(slurp(dir / "a" / "identity.csv") == slurp(dir / "b" / "identity.csv"));
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    CHECK(slurp(dir / "a" / "estimate.csv") != slurp(dir / "c" / "estimate.csv"));
    const auto j = nlohmann::ordered_json::parse(slurp(dir / "a" / "report.json"));
    CHECK(j.at("seed") == 9);
}

TEST_CASE("CLI failures write machine-readable error JSON") {
    REQUIRE_FALSE(cli().empty());
    const fs::path dir = scratch("errors");
    std::ofstream(dir / "bad.ini") << "[experiment]\nkind = simulate\n[model]\ngamma = 3\n";
    const int status = run_cli("simulate --config " + (dir / "bad.ini").string() + " --out " + (dir / "o").string());
    CHECK(status != 0);
    const auto j = nlohmann::ordered_json::parse(slurp(dir / "o" / "error.json"));
    CHECK(j.at("status") == "error");
    CHECK(j.at("type") == "config");
    CHECK(j.at("violations").size() >= 1);

    const int missing = run_cli("norms --config " + (dir / "nope.ini").string() + " --out " + (dir / "m").string());
    CHECK(missing != 0);
    CHECK(nlohmann::ordered_json::parse(slurp(dir / "m" / "error.json")).at("type") == "config");
}

TEST_CASE("CLI runs the illposedness scan with its schema") {
    REQUIRE_FALSE(cli().empty());
    const fs::path dir = scratch("scan");
    std::ofstream(dir / "scan.ini") << "[experiment]\nkind = illposedness-scan\n[scan]\nbox = 128\npoints = 4096\n"
                                       "scales = 0.5, 0.25\n";
    REQUIRE(run_cli("illposedness-scan --config " + (dir / "scan.ini").string() + " --out " + (dir / "o").string()) == 0);
    const std::string csv = slurp(dir / "o" / "scan.csv");
    CHECK(csv.rfind("h,norm_coulomb,norm_yukawa,node_change_coulomb,node_change_yukawa\n", 0) == 0);
    const auto j = nlohmann::ordered_json::parse(slurp(dir / "o" / "report.json"));
    CHECK(j.at("scalars").contains("slope:coulomb"));
    CHECK(j.at("scalars").contains("slope:yukawa"));
}
