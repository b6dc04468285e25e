#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "liqgame/equilibrium.hpp"
#include "liqgame/io.hpp"
#include "liqgame/params.hpp"
#include "liqgame/robustness.hpp"
#include "liqgame/simulate.hpp"

namespace liqgame {

inline constexpr const char* kVersion = "0.1.0";

// A named experiment: market parameters plus the configuration blocks the
// commands need. `variants` lists parameter overrides that the equilibrium
// and tables pipelines run side by side.
struct ScenarioVariant {
    std::string name;
    nlohmann::json overrides;  // merged into the params object
};

struct Scenario {
    std::string name;
    MarketParams params;
    SimulationConfig sim;
    std::optional<KappaGrid> kappa_grid;
    std::optional<RobustnessScenario> robustness;
    std::vector<ScenarioVariant> variants;
    nlohmann::json raw;  // document as loaded, embedded in manifests
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) {
            throw ValidationError({"unknown key \"" + it.key() + "\" in " + where});
        }
    }
}

inline std::vector<double> get_array(const nlohmann::json& obj, const std::string& key) {
    const auto& v = obj.at(key);
    if (!v.is_array()) throw ValidationError({key + " must be an array"});
    return v.get<std::vector<double>>();
}

inline MarketParams parse_params(const nlohmann::json& j) {
    static const std::set<std::string> known = {
        "T",       "n_steps", "s0",      "alpha0", "sigma",   "theta", "eta",
        "n_brokers", "b_j",   "k_j",     "kappa_j", "c_j",    "a_j",   "phi_j",
        "theta_j", "eta_j",   "u0_j",    "q0_j",   "x0_j",    "rho",   "a_I",
        "phi_I",   "psi_I",   "qI0",     "xI0"};
    reject_unknown_keys(j, known, "params");

    MarketParams p;
    p.horizon = j.at("T").get<double>();
    p.n_steps = j.at("n_steps").get<int>();
    p.s0 = j.at("s0").get<double>();
    p.alpha0 = j.at("alpha0").get<double>();
    p.sigma = j.at("sigma").get<double>();
    p.theta = j.at("theta").get<double>();
    p.eta = j.at("eta").get<double>();
    p.n_brokers = j.at("n_brokers").get<int>();
    p.b = get_array(j, "b_j");
    p.k = get_array(j, "k_j");
    p.kappa = get_array(j, "kappa_j");
    p.c = get_array(j, "c_j");
    p.a = get_array(j, "a_j");
    p.phi = get_array(j, "phi_j");
    p.theta_u = get_array(j, "theta_j");
    p.eta_u = get_array(j, "eta_j");
    p.u0 = get_array(j, "u0_j");
    p.q0 = get_array(j, "q0_j");
    p.x0 = get_array(j, "x0_j");
    const auto& rho = j.at("rho");
    if (!rho.is_array()) throw ValidationError({"rho must be an array of rows"});
    for (const auto& row : rho) {
        const auto r = row.get<std::vector<double>>();
        p.rho.insert(p.rho.end(), r.begin(), r.end());
    }
    p.a_informed = j.at("a_I").get<double>();
    p.phi_informed = j.at("phi_I").get<double>();
    p.psi_informed = j.at("psi_I").get<double>();
    p.qI0 = j.at("qI0").get<double>();
    p.xI0 = j.at("xI0").get<double>();
    return validate(p);
}

inline SimulationConfig parse_sim(const nlohmann::json& j) {
    reject_unknown_keys(j, {"n_paths", "seed", "store_paths"}, "simulation");
    SimulationConfig cfg;
    cfg.n_paths = j.value("n_paths", 4000);
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.store_paths = j.value("store_paths", 0);
    if (cfg.n_paths < 1) throw ValidationError({"n_paths must be >= 1"});
    return cfg;
}

inline KappaGrid parse_grid(const nlohmann::json& j) {
    reject_unknown_keys(j,
                        {"min1", "max1", "count1", "min2", "max2", "count2", "learning_rate",
                         "tol", "max_iters", "init_index2"},
                        "kappa_grid");
    KappaGrid g;
    g.min1 = j.at("min1").get<double>();
    g.max1 = j.at("max1").get<double>();
    g.count1 = j.at("count1").get<int>();
    g.min2 = j.at("min2").get<double>();
    g.max2 = j.at("max2").get<double>();
    g.count2 = j.at("count2").get<int>();
    g.learning_rate = j.value("learning_rate", 0.2);
    g.tol = j.value("tol", -1.0);
    g.max_iters = j.value("max_iters", 200);
    g.init_index2 = j.value("init_index2", -1);
    g.check();
    return g;
}

inline RobustnessScenario parse_robustness(const nlohmann::json& j, const SimulationConfig& sim) {
    reject_unknown_keys(j, {"q0_sweep", "q0_hat"}, "robustness");
    RobustnessScenario r;
    r.q0_sweep = j.at("q0_sweep").get<std::vector<double>>();
    r.q0_hat = j.value("q0_hat", 0.0);
    r.sim = sim;
    if (r.q0_sweep.empty()) throw ValidationError({"robustness q0_sweep must be nonempty"});
    return r;
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& doc) {
    detail::reject_unknown_keys(
        doc, {"name", "params", "simulation", "kappa_grid", "robustness", "variants"}, "scenario");
    Scenario s;
    s.raw = doc;
    s.name = doc.at("name").get<std::string>();
    s.params = detail::parse_params(doc.at("params"));
    s.sim = doc.contains("simulation") ? detail::parse_sim(doc.at("simulation"))
                                       : SimulationConfig{};
    if (doc.contains("kappa_grid")) s.kappa_grid = detail::parse_grid(doc.at("kappa_grid"));
    if (doc.contains("robustness")) {
        s.robustness = detail::parse_robustness(doc.at("robustness"), s.sim);
    }
    if (doc.contains("variants")) {
        for (const auto& v : doc.at("variants")) {
            detail::reject_unknown_keys(v, {"name", "overrides"}, "variant");
            ScenarioVariant var;
            var.name = v.at("name").get<std::string>();
            var.overrides = v.value("overrides", nlohmann::json::object());
            // Check the merged parameter set up front.
            nlohmann::json merged = doc.at("params");
            merged.update(var.overrides);
            detail::parse_params(merged);
            s.variants.push_back(std::move(var));
        }
    }
    return s;
}

inline MarketParams variant_params(const Scenario& s, const ScenarioVariant& v) {
    nlohmann::json merged = s.raw.at("params");
    merged.update(v.overrides);
    return detail::parse_params(merged);
}

// Scenario files and manifests share one loader: a manifest embeds the
// scenario it was produced from together with the effective run settings, so
// rerunning from the manifest reproduces the original outputs.
struct LoadedScenario {
    Scenario scenario;
    bool from_manifest = false;
    bool rk4 = false;
};

inline LoadedScenario load_scenario_file(const std::string& path) {
    nlohmann::json doc = nlohmann::json::parse(read_file(path));
    LoadedScenario out;
    if (doc.is_object() && doc.value("manifest", false)) {
        out.scenario = parse_scenario(doc.at("scenario"));
        out.from_manifest = true;
        out.rk4 = doc.value("rk4", false);
        if (doc.contains("seed")) out.scenario.sim.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("n_paths")) out.scenario.sim.n_paths = doc.at("n_paths").get<int>();
        if (doc.contains("n_steps")) out.scenario.params.n_steps = doc.at("n_steps").get<int>();
        if (out.scenario.robustness) out.scenario.robustness->sim = out.scenario.sim;
        return out;
    }
    out.scenario = parse_scenario(doc);
    return out;
}

inline nlohmann::json make_manifest(const Scenario& s, const std::string& command,
                                    const SimulationConfig& effective_sim, int effective_steps,
                                    bool rk4) {
    nlohmann::json m;
    m["manifest"] = true;
    m["version"] = kVersion;
    m["command"] = command;
    m["scenario"] = s.raw;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(s.raw.dump())));
    m["scenario_hash"] = hash;
    m["seed"] = effective_sim.seed;
    m["n_paths"] = effective_sim.n_paths;
    m["n_steps"] = effective_steps;
    m["rk4"] = rk4;
    if (s.kappa_grid) {
        m["kappa_grid"] = {{"min1", s.kappa_grid->min1},   {"max1", s.kappa_grid->max1},
                           {"count1", s.kappa_grid->count1}, {"min2", s.kappa_grid->min2},
                           {"max2", s.kappa_grid->max2},   {"count2", s.kappa_grid->count2}};
    }
    return m;
}

}  // namespace liqgame
