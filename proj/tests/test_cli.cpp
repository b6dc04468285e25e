// End-to-end checks of the command line tool: file contracts, determinism,
// exit codes, manifest reruns. The binary path comes from the build system.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "liqgame/io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(LIQGAME_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

int count_lines(const fs::path& p) {
    std::ifstream in(p);
    int n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

// A small, fast scenario: gentle market, 400 steps, few paths.
nlohmann::json small_scenario() {
    return nlohmann::json::parse(R"({
      "name": "cli_smoke",
      "params": {
        "T": 1.0, "n_steps": 400, "s0": 5.0, "alpha0": 0.0,
        "sigma": 1.0, "theta": 1.0, "eta": 5.0,
        "n_brokers": 2,
        "b_j": [0.1, 0.1], "k_j": [0.12, 0.12], "kappa_j": [0.1, 0.2],
        "c_j": [0.1, 0.1], "a_j": [20.0, 20.0], "phi_j": [2.0, 10.0],
        "theta_j": [1.0, 1.0], "eta_j": [1.0, 1.0], "u0_j": [0.0, 0.0],
        "q0_j": [0.0, 0.0], "x0_j": [0.0, 0.0],
        "rho": [[1.0, 0.0], [0.0, 1.0]],
        "a_I": 1.0, "phi_I": 0.01, "psi_I": 0.01, "qI0": 0.0, "xI0": 0.0
      },
      "simulation": {"n_paths": 12, "seed": 31, "store_paths": 2},
      "kappa_grid": {
        "min1": 0.2, "max1": 0.6, "count1": 5,
        "min2": 0.2, "max2": 0.6, "count2": 5,
        "learning_rate": 0.2, "tol": -1.0, "max_iters": 60
      },
      "robustness": {"q0_sweep": [-0.5, 0.0, 0.5], "q0_hat": 0.0}
    })");
}

struct TempTree {
    fs::path root;
    TempTree() {
        root = fs::temp_directory_path() /
               ("liqgame_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(root);
    }
    ~TempTree() { fs::remove_all(root); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    fs::path scenario(const nlohmann::json& doc) const {
        const fs::path p = root / "scenario.json";
        liqgame::write_file_atomic(p, doc.dump(2));
        return p;
    }
};

}  // namespace

TEST_CASE("cli solve writes the three coefficient files deterministically") {
    TempTree tmp;
    const fs::path scn = tmp.scenario(small_scenario());
    const fs::path out = tmp.root / "out";
    REQUIRE(run("solve --scenario " + scn.string() + " --out " + out.string()) == 0);

    for (const char* name :
         {"informed_solution.csv", "broker_coefficients.csv", "net_speed_coefficients.csv"}) {
        INFO(name);
        CHECK(count_lines(out / name) == 402);  // header + n_steps + 1 rows
    }
    CHECK(first_line(out / "informed_solution.csv") ==
          "t,m_I,h2,f2,f0,omega0_1,omega0_2,omega1_1,omega1_2");
    CHECK(first_line(out / "net_speed_coefficients.csv") == "t,r1,r2,r3,r4,r5,r6");
    const std::string header = first_line(out / "broker_coefficients.csv");
    CHECK(header.find("n^1_{2,1}") != std::string::npos);
    CHECK(header.find("y^2_{1,2}") != std::string::npos);

    const std::string before = liqgame::read_file(out / "broker_coefficients.csv");
    REQUIRE(run("solve --scenario " + scn.string() + " --out " + out.string()) == 0);
    CHECK(liqgame::read_file(out / "broker_coefficients.csv") == before);
}

TEST_CASE("cli rejects invalid scenarios with exit code 2") {
    TempTree tmp;
    auto doc = small_scenario();
    doc["params"]["kappa_j"] = {0.0, 0.2};
    const fs::path scn = tmp.scenario(doc);
    CHECK(run("solve --scenario " + scn.string() + " --out " + (tmp.root / "o").string()) == 2);

    auto doc2 = small_scenario();
    doc2["params"]["mystery"] = 4;
    const fs::path scn2 = tmp.scenario(doc2);
    CHECK(run("solve --scenario " + scn2.string() + " --out " + (tmp.root / "o").string()) == 2);
}

TEST_CASE("cli simulate produces stats and stored paths") {
    TempTree tmp;
    const fs::path scn = tmp.scenario(small_scenario());
    const fs::path out = tmp.root / "out";
    REQUIRE(run("simulate --scenario " + scn.string() + " --out " + out.string()) == 0);
    CHECK(count_lines(out / "ensemble_stats.csv") == 2);
    CHECK(first_line(out / "path_000.csv") == "t,S,alpha,u1,u2,omega1,omega2,nu1,nu2,QI,Q1,Q2");
    CHECK(count_lines(out / "path_001.csv") == 402);

    const std::string stats = liqgame::read_file(out / "ensemble_stats.csv");
    REQUIRE(run("simulate --scenario " + scn.string() + " --out " + out.string()) == 0);
    CHECK(liqgame::read_file(out / "ensemble_stats.csv") == stats);

    // a different seed changes the ensemble
    REQUIRE(run("simulate --scenario " + scn.string() + " --out " + out.string() +
                " --seed 99") == 0);
    CHECK(liqgame::read_file(out / "ensemble_stats.csv") != stats);
}

TEST_CASE("cli simulate fans out over variants") {
    TempTree tmp;
    auto doc = small_scenario();
    doc["variants"] = {{{"name", "low"}, {"overrides", {{"phi_j", {2.0, 10.0}}}}},
                       {{"name", "high"}, {"overrides", {{"phi_j", {20.0, 10.0}}}}}};
    const fs::path scn = tmp.scenario(doc);
    const fs::path out = tmp.root / "var";
    REQUIRE(run("simulate --scenario " + scn.string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "low" / "ensemble_stats.csv"));
    CHECK(fs::exists(out / "high" / "ensemble_stats.csv"));
    CHECK(count_lines(out / "high" / "path_001.csv") == 402);
    CHECK(liqgame::read_file(out / "low" / "ensemble_stats.csv") !=
          liqgame::read_file(out / "high" / "ensemble_stats.csv"));
}

TEST_CASE("cli equilibrium, pareto and manifests") {
    TempTree tmp;
    const fs::path scn = tmp.scenario(small_scenario());
    const fs::path out = tmp.root / "eq";
    REQUIRE(run("pareto --scenario " + scn.string() + " --out " + out.string()) == 0);
    CHECK(count_lines(out / "equilibrium_summary.csv") == 2);
    CHECK(count_lines(out / "value_surfaces.csv") == 26);  // header + 5x5 cells
    CHECK(fs::exists(out / "pareto_mask.csv"));
    CHECK(fs::exists(out / "trace.csv"));
    CHECK(fs::exists(out / "manifest.json"));

    // rerunning from the manifest reproduces every file byte for byte
    const std::string surfaces = liqgame::read_file(out / "value_surfaces.csv");
    const std::string summary = liqgame::read_file(out / "equilibrium_summary.csv");
    const fs::path out2 = tmp.root / "eq2";
    REQUIRE(run("pareto --scenario " + (out / "manifest.json").string() + " --out " +
                out2.string()) == 0);
    CHECK(liqgame::read_file(out2 / "value_surfaces.csv") == surfaces);
    CHECK(liqgame::read_file(out2 / "equilibrium_summary.csv") == summary);
    CHECK(liqgame::read_file(out2 / "manifest.json") ==
          liqgame::read_file(out / "manifest.json"));
}

TEST_CASE("cli reports non-convergence with exit code 3 and a trace") {
    TempTree tmp;
    auto doc = small_scenario();
    doc["kappa_grid"]["max_iters"] = 1;
    doc["kappa_grid"]["tol"] = 1e-15;
    const fs::path scn = tmp.scenario(doc);
    const fs::path out = tmp.root / "nc";
    CHECK(run("equilibrium --scenario " + scn.string() + " --out " + out.string()) == 3);
    CHECK(fs::exists(out / "trace.csv"));
}

TEST_CASE("cli robustness writes the gap table") {
    TempTree tmp;
    const fs::path scn = tmp.scenario(small_scenario());
    const fs::path out = tmp.root / "rob";
    REQUIRE(run("robustness --scenario " + scn.string() + " --out " + out.string()) == 0);
    CHECK(first_line(out / "robustness.csv") ==
          "Q0_I,gap_H_mean,gap_H_stderr,gap_PnL_mean,gap_PnL_stderr");
    CHECK(count_lines(out / "robustness.csv") == 4);
}

TEST_CASE("cli tables requires two variants") {
    TempTree tmp;
    const fs::path scn = tmp.scenario(small_scenario());
    CHECK(run("tables --scenario " + scn.string() + " --out " + (tmp.root / "t").string()) == 2);
}

TEST_CASE("cli tables compares the first two variants at their equilibria") {
    TempTree tmp;
    auto doc = small_scenario();
    doc["variants"] = {{{"name", "low"}, {"overrides", {{"phi_j", {2.0, 10.0}}}}},
                       {{"name", "high"}, {"overrides", {{"phi_j", {20.0, 10.0}}}}}};
    doc["simulation"]["store_paths"] = 1;
    const fs::path scn = tmp.scenario(doc);
    const fs::path out = tmp.root / "tab";
    REQUIRE(run("tables --scenario " + scn.string() + " --out " + out.string()) == 0);
    CHECK(count_lines(out / "comparison.csv") == 5);  // header + four characteristics
    CHECK(first_line(out / "comparison.csv") ==
          "characteristic,t_stat,p_value,mean_1,std_1,mean_2,std_2,pct_change");
    CHECK(count_lines(out / "equilibrium_summary.csv") == 3);
    CHECK(fs::exists(out / "comparison.md"));
    CHECK(count_lines(out / "low_path_000.csv") == 402);
    CHECK(count_lines(out / "high_path_000.csv") == 402);
}
