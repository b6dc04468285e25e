// Command line front end: loads a JSON scenario (or a manifest of a previous
// run), executes one of the experiment pipelines and writes CSV outputs plus
// a manifest. Exit codes: 0 ok, 2 validation, 3 non-convergence, 4 numerical
// blow-up.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "liqgame/broker.hpp"
#include "liqgame/equilibrium.hpp"
#include "liqgame/informed.hpp"
#include "liqgame/io.hpp"
#include "liqgame/robustness.hpp"
#include "liqgame/scenario.hpp"
#include "liqgame/simulate.hpp"
#include "liqgame/stats.hpp"

namespace fs = std::filesystem;
using namespace liqgame;

namespace {

struct RunContext {
    Scenario scenario;
    fs::path out;
    bool rk4 = false;
};

std::string broker_tag(const char* base, int i) {
    return std::string(base) + "^" + std::to_string(i + 1);
}

std::string entry_tag(const char* base, int i, int r) {
    return std::string(base) + "^" + std::to_string(i + 1) + "_" + std::to_string(r + 1);
}

std::string matrix_tag(const char* base, int i, int r, int s) {
    return std::string(base) + "^" + std::to_string(i + 1) + "_{" + std::to_string(r + 1) + "," +
           std::to_string(s + 1) + "}";
}

void write_manifest(const RunContext& ctx, const std::string& command) {
    nlohmann::json m = make_manifest(ctx.scenario, command, ctx.scenario.sim,
                                     ctx.scenario.params.n_steps, ctx.rk4);
    write_file_atomic(ctx.out / "manifest.json", m.dump(2) + "\n");
}

void write_trace(const fs::path& path, const std::vector<IterationStep>& trace) {
    CsvWriter csv({"iter", "kappa2", "br_kappa1", "br_kappa2"});
    for (std::size_t i = 0; i < trace.size(); ++i) {
        csv.row({static_cast<double>(i), trace[i].kappa2, trace[i].br_kappa1,
                 trace[i].br_kappa2});
    }
    csv.save(path);
}

struct SolvedScenario {
    InformedSolution informed;
    BrokerCoefficients coeffs;
};

SolvedScenario solve_scenario(const MarketParams& p, bool rk4) {
    SolvedScenario s;
    s.informed = solve_informed(p);
    s.coeffs = solve_backward(p, s.informed.constants, rk4 ? OdeScheme::RK4 : OdeScheme::Euler);
    return s;
}

void cmd_solve(const RunContext& ctx) {
    const MarketParams& p = ctx.scenario.params;
    const int N = p.n_brokers;
    const SolvedScenario sol = solve_scenario(p, ctx.rk4);
    const TimeGrid grid = p.grid();

    {
        std::vector<std::string> header = {"t", "m_I", "h2", "f2", "f0"};
        for (int j = 0; j < N; ++j) header.push_back("omega0_" + std::to_string(j + 1));
        for (int j = 0; j < N; ++j) header.push_back("omega1_" + std::to_string(j + 1));
        CsvWriter csv(header);
        std::vector<double> row(header.size());
        for (int k = 0; k <= grid.n_steps; ++k) {
            row[0] = grid.node(k);
            row[1] = sol.informed.m[k];
            row[2] = sol.informed.h2[k];
            row[3] = sol.informed.f2[k];
            row[4] = sol.informed.f0[k];
            for (int j = 0; j < N; ++j) row[5 + j] = sol.informed.omega0[j][k];
            for (int j = 0; j < N; ++j) row[5 + N + j] = sol.informed.omega1[j][k];
            csv.row(row);
        }
        csv.save(ctx.out / "informed_solution.csv");
    }

    {
        std::vector<std::string> header = {"t"};
        for (int i = 0; i < N; ++i) {
            header.push_back(broker_tag("f", i));
            header.push_back(broker_tag("g", i));
            header.push_back(broker_tag("m", i));
            header.push_back(broker_tag("v", i));
            for (int r = 0; r < N; ++r) header.push_back(entry_tag("d", i, r));
            for (int r = 0; r < N; ++r) header.push_back(entry_tag("w", i, r));
            for (int r = 0; r < N; ++r) header.push_back(entry_tag("x", i, r));
            for (int r = 0; r < N; ++r) header.push_back(entry_tag("z", i, r));
            for (int r = 0; r < N; ++r)
                for (int s = 0; s < N; ++s) header.push_back(matrix_tag("n", i, r, s));
            for (int r = 0; r < N; ++r)
                for (int s = 0; s < N; ++s) header.push_back(matrix_tag("p", i, r, s));
            for (int r = 0; r < N; ++r)
                for (int s = 0; s < N; ++s) header.push_back(matrix_tag("y", i, r, s));
        }
        CsvWriter csv(header);
        std::vector<double> row(header.size());
        const int stride = sol.coeffs.layout().stride();
        for (int k = 0; k <= grid.n_steps; ++k) {
            row[0] = grid.node(k);
            const double* node = sol.coeffs.node(k);
            for (int j = 0; j < stride; ++j) row[1 + j] = node[j];
            csv.row(row);
        }
        csv.save(ctx.out / "broker_coefficients.csv");
    }

    {
        const NetSpeedCoefficients net = net_speed_coefficients(sol.coeffs, sol.informed, 0, p);
        std::vector<std::string> header = {"t", "r1", "r2"};
        for (int j = 1; j < N; ++j) {
            header.push_back(N == 2 ? "r3" : "r3_" + std::to_string(j + 1));
        }
        header.push_back("r4");
        header.push_back("r5");
        for (int j = 1; j < N; ++j) {
            header.push_back(N == 2 ? "r6" : "r6_" + std::to_string(j + 1));
        }
        CsvWriter csv(header);
        std::vector<double> row(header.size());
        for (int k = 0; k <= grid.n_steps; ++k) {
            std::size_t c = 0;
            row[c++] = grid.node(k);
            row[c++] = net.r1[k];
            row[c++] = net.r2[k];
            for (int j = 1; j < N; ++j) row[c++] = net.r3[j][k];
            row[c++] = net.r4[k];
            row[c++] = net.r5[k];
            for (int j = 1; j < N; ++j) row[c++] = net.r6[j][k];
            csv.row(row);
        }
        csv.save(ctx.out / "net_speed_coefficients.csv");
    }

    write_manifest(ctx, "solve");
}

void write_ensemble_csv(const fs::path& path, const std::string& scenario_name,
                        const MarketParams& p, const EnsembleStats& stats) {
    std::vector<std::string> header = {"scenario", "n_paths", "seed"};
    for (int i = 0; i < p.n_brokers; ++i) {
        const std::string tag = std::to_string(i + 1);
        header.push_back("criterion_mean_" + tag);
        header.push_back("criterion_stderr_" + tag);
        header.push_back("pnl_mean_" + tag);
        header.push_back("pnl_stderr_" + tag);
    }
    header.insert(header.end(),
                  {"informed_criterion_mean", "informed_criterion_stderr",
                   "informed_market_mean", "informed_market_stderr", "ZI_mean", "ZI_std",
                   "Qbar_mean", "Qbar_std", "Yalpha_mean", "Yalpha_std", "YI_mean", "YI_std"});
    CsvWriter csv(header);
    std::vector<std::string> row;
    row.push_back(scenario_name);
    row.push_back(std::to_string(stats.n_paths));
    row.push_back(std::to_string(stats.seed));
    for (int i = 0; i < p.n_brokers; ++i) {
        row.push_back(format_double(stats.criterion_mean[i]));
        row.push_back(format_double(stats.criterion_stderr[i]));
        row.push_back(format_double(stats.pnl_mean[i]));
        row.push_back(format_double(stats.pnl_stderr[i]));
    }
    row.push_back(format_double(stats.informed_criterion_mean));
    row.push_back(format_double(stats.informed_criterion_stderr));
    row.push_back(format_double(stats.informed_market_mean));
    row.push_back(format_double(stats.informed_market_stderr));
    for (const auto* v : {&stats.ZI, &stats.Qbar, &stats.Yalpha, &stats.YI}) {
        row.push_back(format_double(mean(*v)));
        row.push_back(format_double(stats.n_paths > 1 ? sample_std(*v) : 0.0));
    }
    csv.raw_row(row);
    csv.save(path);
}

void write_path_csv(const fs::path& path, const PathRecord& rec, int N) {
    std::vector<std::string> header = {"t", "S", "alpha"};
    for (int j = 0; j < N; ++j) header.push_back("u" + std::to_string(j + 1));
    for (int j = 0; j < N; ++j) header.push_back("omega" + std::to_string(j + 1));
    for (int j = 0; j < N; ++j) header.push_back("nu" + std::to_string(j + 1));
    header.push_back("QI");
    for (int j = 0; j < N; ++j) header.push_back("Q" + std::to_string(j + 1));
    CsvWriter csv(header);
    std::vector<double> row(header.size());
    for (int k = 0; k <= rec.grid.n_steps; ++k) {
        std::size_t c = 0;
        row[c++] = rec.grid.node(k);
        row[c++] = rec.S[k];
        row[c++] = rec.alpha[k];
        for (int j = 0; j < N; ++j) row[c++] = rec.u[j][k];
        for (int j = 0; j < N; ++j) row[c++] = rec.omega[j][k];
        for (int j = 0; j < N; ++j) row[c++] = rec.nu[j][k];
        row[c++] = rec.QI[k];
        for (int j = 0; j < N; ++j) row[c++] = rec.Q[j][k];
        csv.row(row);
    }
    csv.save(path);
}

void simulate_into(const fs::path& dir, const std::string& label, const MarketParams& p,
                   const SimulationConfig& sim, bool rk4) {
    const SolvedScenario sol = solve_scenario(p, rk4);
    std::vector<PathRecord> stored;
    const EnsembleStats stats = monte_carlo(p, sol.informed, sol.coeffs, sim, &stored);
    write_ensemble_csv(dir / "ensemble_stats.csv", label, p, stats);
    for (std::size_t i = 0; i < stored.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "path_%03zu.csv", i);
        write_path_csv(dir / name, stored[i], p.n_brokers);
    }
}

// Without variants, simulate the scenario as given; with variants, one
// subdirectory per variant.
void cmd_simulate(const RunContext& ctx) {
    const Scenario& s = ctx.scenario;
    if (s.variants.empty()) {
        simulate_into(ctx.out, s.name, s.params, s.sim, ctx.rk4);
    } else {
        for (const auto& v : s.variants) {
            std::filesystem::create_directories(ctx.out / v.name);
            simulate_into(ctx.out / v.name, s.name + "/" + v.name, variant_params(s, v), s.sim,
                          ctx.rk4);
        }
    }
    write_manifest(ctx, "simulate");
}

void write_equilibrium_summary(const fs::path& path,
                               const std::vector<std::pair<std::string, EquilibriumResult>>& rows,
                               const std::string& scenario_name) {
    CsvWriter csv({"scenario", "variant", "kappa1_star", "kappa2_star", "V1", "V2", "V_I",
                   "iterations", "nash_verified"});
    for (const auto& [variant, res] : rows) {
        csv.raw_row({scenario_name, variant, format_double(res.kappa1_star),
                     format_double(res.kappa2_star), format_double(res.star.v1),
                     format_double(res.star.v2), format_double(res.star.vI),
                     std::to_string(res.iterations), std::to_string(res.nash_verified ? 1 : 0)});
    }
    csv.save(path);
}

void write_surfaces(const fs::path& dir, const EquilibriumResult& res) {
    {
        CsvWriter csv({"kappa1", "kappa2", "V1", "V2", "V_I"});
        for (std::size_t i1 = 0; i1 < res.axis1.size(); ++i1) {
            for (std::size_t i2 = 0; i2 < res.axis2.size(); ++i2) {
                const std::size_t cell = i1 * res.axis2.size() + i2;
                csv.row({res.axis1[i1], res.axis2[i2], res.V1[cell], res.V2[cell],
                         res.VI[cell]});
            }
        }
        csv.save(dir / "value_surfaces.csv");
    }
    {
        CsvWriter csv({"kappa2", "kappa1_star"});
        for (std::size_t i2 = 0; i2 < res.axis2.size(); ++i2) {
            csv.row({res.axis2[i2], res.br1[i2]});
        }
        csv.save(dir / "best_response_kappa1.csv");
    }
    {
        CsvWriter csv({"kappa1", "kappa2_star"});
        for (std::size_t i1 = 0; i1 < res.axis1.size(); ++i1) {
            csv.row({res.axis1[i1], res.br2[i1]});
        }
        csv.save(dir / "best_response_kappa2.csv");
    }
}

KappaGrid require_grid(const Scenario& s) {
    if (!s.kappa_grid) throw ValidationError({"scenario has no kappa_grid section"});
    return *s.kappa_grid;
}

void cmd_equilibrium(const RunContext& ctx) {
    const Scenario& s = ctx.scenario;
    const KappaGrid grid = require_grid(s);
    std::vector<std::pair<std::string, EquilibriumResult>> rows;
    if (s.variants.empty()) {
        EquilibriumSolver solver(s.params, grid);
        EquilibriumResult res = solver.nash_iterate();
        solver.fill_surfaces(res);
        write_trace(ctx.out / "trace.csv", res.trace);
        write_surfaces(ctx.out, res);
        rows.emplace_back("base", std::move(res));
    } else {
        for (const auto& v : s.variants) {
            EquilibriumSolver solver(variant_params(s, v), grid);
            EquilibriumResult res = solver.nash_iterate();
            write_trace(ctx.out / ("trace_" + v.name + ".csv"), res.trace);
            rows.emplace_back(v.name, std::move(res));
        }
    }
    write_equilibrium_summary(ctx.out / "equilibrium_summary.csv", rows, s.name);
    for (const auto& [variant, res] : rows) {
        std::cout << s.name << "/" << variant << ": kappa1* = " << format_double(res.kappa1_star)
                  << ", kappa2* = " << format_double(res.kappa2_star)
                  << ", V1 = " << format_double(res.star.v1)
                  << ", V2 = " << format_double(res.star.v2)
                  << ", V_I = " << format_double(res.star.vI) << "\n";
    }
    write_manifest(ctx, "equilibrium");
}

void cmd_pareto(const RunContext& ctx) {
    const Scenario& s = ctx.scenario;
    EquilibriumSolver solver(s.params, require_grid(s));
    EquilibriumResult res = solver.nash_iterate();
    solver.fill_surfaces(res);
    solver.fill_pareto_mask(res);
    write_trace(ctx.out / "trace.csv", res.trace);
    write_surfaces(ctx.out, res);
    {
        const AgentValues star = res.star;
        CsvWriter csv({"kappa1", "kappa2", "improve1", "improve2", "both"});
        for (std::size_t i1 = 0; i1 < res.axis1.size(); ++i1) {
            for (std::size_t i2 = 0; i2 < res.axis2.size(); ++i2) {
                const std::size_t cell = i1 * res.axis2.size() + i2;
                csv.row({res.axis1[i1], res.axis2[i2], res.V1[cell] - star.v1,
                         res.V2[cell] - star.v2, static_cast<double>(res.pareto_mask[cell])});
            }
        }
        csv.save(ctx.out / "pareto_mask.csv");
    }
    write_equilibrium_summary(ctx.out / "equilibrium_summary.csv", {{"base", res}}, s.name);
    std::cout << s.name << ": kappa1* = " << format_double(res.kappa1_star)
              << ", kappa2* = " << format_double(res.kappa2_star)
              << ", V1 = " << format_double(res.star.v1)
              << ", V2 = " << format_double(res.star.v2)
              << ", V_I = " << format_double(res.star.vI) << "\n";
    write_manifest(ctx, "pareto");
}

void cmd_robustness(const RunContext& ctx) {
    const Scenario& s = ctx.scenario;
    if (!s.robustness) throw ValidationError({"scenario has no robustness section"});
    RobustnessScenario scn = *s.robustness;
    scn.sim = s.sim;
    const SolvedScenario sol = solve_scenario(s.params, ctx.rk4);
    const auto points = misspecified_ensemble(scn, s.params, sol.informed, sol.coeffs);
    CsvWriter csv({"Q0_I", "gap_H_mean", "gap_H_stderr", "gap_PnL_mean", "gap_PnL_stderr"});
    for (const auto& pt : points) {
        csv.row({pt.q0, pt.gap_criterion_mean[0], pt.gap_criterion_stderr[0],
                 pt.gap_pnl_mean[0], pt.gap_pnl_stderr[0]});
    }
    csv.save(ctx.out / "robustness.csv");
    write_manifest(ctx, "robustness");
}

// Equilibrium then ensemble per variant; Welch comparison of the first two.
void cmd_tables(const RunContext& ctx) {
    const Scenario& s = ctx.scenario;
    const KappaGrid grid = require_grid(s);
    if (s.variants.size() < 2) {
        throw ValidationError({"tables needs at least two variants to compare"});
    }

    std::vector<std::pair<std::string, EquilibriumResult>> rows;
    std::vector<EnsembleStats> stats;
    for (std::size_t vi = 0; vi < 2; ++vi) {
        const auto& v = s.variants[vi];
        MarketParams p = variant_params(s, v);
        EquilibriumSolver solver(p, grid);
        EquilibriumResult res = solver.nash_iterate();
        p.kappa = {res.kappa1_star, res.kappa2_star};
        const SolvedScenario sol = solve_scenario(p, ctx.rk4);
        SimulationConfig sim = s.sim;
        sim.seed = s.sim.seed + vi;  // independent samples per scenario
        std::vector<PathRecord> stored;
        stats.push_back(monte_carlo(p, sol.informed, sol.coeffs, sim, &stored));
        for (std::size_t i = 0; i < stored.size(); ++i) {
            char name[48];
            std::snprintf(name, sizeof(name), "%s_path_%03zu.csv", v.name.c_str(), i);
            write_path_csv(ctx.out / name, stored[i], p.n_brokers);
        }
        rows.emplace_back(v.name, std::move(res));
    }
    write_equilibrium_summary(ctx.out / "equilibrium_summary.csv", rows, s.name);

    const std::vector<std::string> names = {"Z_I", "Q_bar", "Y_alpha", "Y_I"};
    const ScenarioComparison cmp = compare_samples(
        names, {stats[0].ZI, stats[0].Qbar, stats[0].Yalpha, stats[0].YI},
        {stats[1].ZI, stats[1].Qbar, stats[1].Yalpha, stats[1].YI});

    {
        CsvWriter csv({"characteristic", "t_stat", "p_value", "mean_1", "std_1", "mean_2",
                       "std_2", "pct_change"});
        for (const auto& row : cmp.rows) {
            csv.raw_row({row.name, format_double(row.test.t), format_double(row.test.p),
                         format_double(row.test.mean_a), format_double(row.test.std_a),
                         format_double(row.test.mean_b), format_double(row.test.std_b),
                         format_double(100.0 * row.pct_change)});
        }
        csv.save(ctx.out / "comparison.csv");
    }
    {
        std::ostringstream md;
        md << "| Char. | t-stat | p-value | average-1 | std-1 | average-2 | std-2 |\n";
        md << "|---|---|---|---|---|---|---|\n";
        for (const auto& row : cmp.rows) {
            char pct[32];
            std::snprintf(pct, sizeof(pct), "%.2f%%", 100.0 * row.pct_change);
            md << "| " << row.name << " | " << format_double(row.test.t) << " | "
               << format_double(row.test.p) << " | " << format_double(row.test.mean_a) << " | "
               << format_double(row.test.std_a) << " | " << format_double(row.test.mean_b) << " ("
               << pct << ") | " << format_double(row.test.std_b) << " |\n";
        }
        write_file_atomic(ctx.out / "comparison.md", md.str());
    }
    write_manifest(ctx, "tables");
}

void cmd_all(const RunContext& ctx) {
    cmd_solve(ctx);
    cmd_simulate(ctx);
    if (ctx.scenario.kappa_grid) {
        if (ctx.scenario.variants.empty()) {
            cmd_pareto(ctx);
        } else {
            cmd_equilibrium(ctx);
            if (ctx.scenario.variants.size() >= 2) cmd_tables(ctx);
        }
    }
    if (ctx.scenario.robustness) cmd_robustness(ctx);
    write_manifest(ctx, "all");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-broker liquidity game: solvers, simulation and equilibrium search"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<int> paths;
    bool rk4 = false;

    const std::vector<std::pair<std::string, void (*)(const RunContext&)>> commands = {
        {"solve", cmd_solve},         {"simulate", cmd_simulate},
        {"equilibrium", cmd_equilibrium}, {"pareto", cmd_pareto},
        {"robustness", cmd_robustness},   {"tables", cmd_tables},
        {"all", cmd_all}};
    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--scenario", scenario_path, "scenario or manifest JSON")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override the simulation seed");
        sub->add_option("--steps", steps, "override the time grid resolution");
        sub->add_option("--paths", paths, "override the Monte Carlo path count");
        sub->add_flag("--rk4", rk4, "use the fourth-order scheme for the coefficient ODEs");
        sub->callback([&, fn] {
            LoadedScenario loaded = load_scenario_file(scenario_path);
            RunContext ctx;
            ctx.scenario = std::move(loaded.scenario);
            ctx.rk4 = rk4 || loaded.rk4;
            if (seed) ctx.scenario.sim.seed = *seed;
            if (paths) ctx.scenario.sim.n_paths = *paths;
            if (steps) ctx.scenario.params.n_steps = *steps;
            if (ctx.scenario.robustness) ctx.scenario.robustness->sim = ctx.scenario.sim;
            ctx.out = fs::path(out_dir);
            std::filesystem::create_directories(ctx.out);
            fn(ctx);
        });
    }

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << e.what() << "\n";
        try {
            write_trace(fs::path(out_dir) / "trace.csv", e.trace());
        } catch (...) {
        }
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
