#include "thinopt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "thinopt/errors.hpp"

namespace thinopt {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& context, const std::string& what) {
    throw InputError("config " + context + ": " + what);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& context) {
    if (!j.is_object()) bad(context, "expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key)) bad(context, "unknown key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& context) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        bad(context, std::string("bad value for '") + key + "': " + e.what());
    }
}

std::vector<double> parse_grid(const json& j, const std::string& context) {
    if (j.is_array()) {
        const auto grid = j.get<std::vector<double>>();
        if (grid.size() < 2) bad(context, "explicit grid needs at least two wavelengths");
        return grid;
    }
    check_keys(j, {"from_nm", "to_nm", "step_nm"}, context);
    double from = 0.0, to = 0.0, step = 0.0;
    read(j, "from_nm", from, context);
    read(j, "to_nm", to, context);
    read(j, "step_nm", step, context);
    if (!(from > 0.0 && to > from && step > 0.0)) bad(context, "need 0 < from_nm < to_nm, step_nm > 0");
    std::vector<double> grid;
    const int count = static_cast<int>(std::floor((to - from) / step + 1e-9)) + 1;
    grid.reserve(count);
    for (int i = 0; i < count; ++i) grid.push_back(from + i * step);
    return grid;
}

SpectrumComponent parse_component(const std::string& s, const std::string& context) {
    if (s == "absorption") return SpectrumComponent::Absorption;
    if (s == "reflection") return SpectrumComponent::Reflection;
    if (s == "transmission") return SpectrumComponent::Transmission;
    bad(context, "component must be absorption, reflection, or transmission; got '" + s + "'");
}

Polarization parse_polarization(const std::string& s, const std::string& context) {
    if (s == "s") return Polarization::S;
    if (s == "p") return Polarization::P;
    if (s == "unpolarized") return Polarization::Unpolarized;
    bad(context, "polarization must be s, p, or unpolarized; got '" + s + "'");
}

void parse_target(const json& j, RunConfig& cfg) {
    const std::string context = "task.target";
    check_keys(j, {"grid_nm", "bands", "default_value", "component", "weights"}, context);
    if (!j.contains("grid_nm")) bad(context, "missing 'grid_nm'");
    cfg.target_grid_nm = parse_grid(j.at("grid_nm"), context + ".grid_nm");
    if (j.contains("bands")) {
        if (!j.at("bands").is_array()) bad(context, "'bands' must be an array");
        for (const json& b : j.at("bands")) {
            check_keys(b, {"from_nm", "to_nm", "value"}, context + ".bands[]");
            TargetSpectrum::Band band{0.0, 0.0, 0.0};
            read(b, "from_nm", band.from_nm, context);
            read(b, "to_nm", band.to_nm, context);
            read(b, "value", band.value, context);
            cfg.target_bands.push_back(band);
        }
    }
    read(j, "default_value", cfg.target_default, context);
    if (j.contains("component"))
        cfg.target_component =
            parse_component(j.at("component").get<std::string>(), context);
    read(j, "weights", cfg.target_weights, context);
}

void parse_incidence(const json& j, IncidenceSpec& inc) {
    const std::string context = "task.incidence";
    check_keys(j, {"angles_deg", "polarization"}, context);
    read(j, "angles_deg", inc.angles_deg, context);
    if (j.contains("polarization"))
        inc.polarization =
            parse_polarization(j.at("polarization").get<std::string>(), context);
}

void parse_task(const json& j, RunConfig& cfg) {
    const std::string context = "task";
    check_keys(j,
               {"layer_count", "target", "incidence", "substrate", "incident",
                "frozen_layers", "epoch_budget", "report_band_nm",
                "success_average_absorption"},
               context);
    read(j, "layer_count", cfg.layer_count, context);
    if (!j.contains("target")) bad(context, "missing 'target'");
    parse_target(j.at("target"), cfg);
    if (j.contains("incidence")) parse_incidence(j.at("incidence"), cfg.incidence);
    if (j.contains("substrate") && !j.at("substrate").is_null())
        cfg.substrate = j.at("substrate").get<std::string>();
    if (j.contains("incident")) {
        const json& inc = j.at("incident");
        if (inc.is_string()) {
            cfg.incident_material = inc.get<std::string>();
        } else {
            check_keys(inc, {"n", "k"}, context + ".incident");
            double n = 1.0, k = 0.0;
            read(inc, "n", n, context);
            read(inc, "k", k, context);
            cfg.incident_nk = {n, k};
        }
    }
    if (j.contains("frozen_layers")) {
        const json& fl = j.at("frozen_layers");
        if (!fl.is_object()) bad(context, "'frozen_layers' must map layer indices to names");
        for (const auto& [key, value] : fl.items()) {
            int layer = -1;
            try {
                layer = std::stoi(key);
            } catch (const std::exception&) {
                bad(context, "frozen layer key '" + key + "' is not an integer");
            }
            cfg.frozen_layers[layer] = value.get<std::string>();
        }
    }
    read(j, "epoch_budget", cfg.epoch_budget, context);
    if (j.contains("report_band_nm")) {
        const auto band = j.at("report_band_nm").get<std::vector<double>>();
        if (band.size() != 2) bad(context, "'report_band_nm' must be [lo, hi]");
        cfg.report_band_lo_nm = band[0];
        cfg.report_band_hi_nm = band[1];
    }
    read(j, "success_average_absorption", cfg.success_average_absorption, context);
}

void parse_ga(const json& j, GaConfig& ga) {
    const std::string context = "ga";
    check_keys(j,
               {"population_size", "generations", "selection_rate", "mutation_rate",
                "crossover_rate", "elitism_rate", "thickness_bounds_nm", "seed"},
               context);
    read(j, "population_size", ga.population_size, context);
    read(j, "generations", ga.generations, context);
    read(j, "selection_rate", ga.selection_rate, context);
    read(j, "mutation_rate", ga.mutation_rate, context);
    read(j, "crossover_rate", ga.crossover_rate, context);
    read(j, "elitism_rate", ga.elitism_rate, context);
    if (j.contains("thickness_bounds_nm")) {
        const auto b = j.at("thickness_bounds_nm").get<std::vector<double>>();
        if (b.size() != 2) bad(context, "'thickness_bounds_nm' must be [lo, hi]");
        ga.thickness_bounds_nm = {b[0], b[1]};
    }
    read(j, "seed", ga.seed, context);
}

void parse_reward(const json& j, RewardConfig& r) {
    const std::string context = "a3c.reward";
    check_keys(j,
               {"stall_threshold", "stall_penalty", "no_improve_penalty", "success_reward",
                "success_merit_threshold", "observation_scale", "discount", "n_steps"},
               context);
    read(j, "stall_threshold", r.stall_threshold, context);
    read(j, "stall_penalty", r.stall_penalty, context);
    read(j, "no_improve_penalty", r.no_improve_penalty, context);
    read(j, "success_reward", r.success_reward, context);
    read(j, "success_merit_threshold", r.success_merit_threshold, context);
    read(j, "observation_scale", r.observation_scale, context);
    read(j, "discount", r.discount, context);
    read(j, "n_steps", r.n_steps, context);
}

void parse_a3c(const json& j, A3cConfig& a3c) {
    const std::string context = "a3c";
    check_keys(j,
               {"workers", "episodes", "max_episode_steps", "learning_rate", "entropy_beta",
                "reward", "seed"},
               context);
    read(j, "workers", a3c.workers, context);
    read(j, "episodes", a3c.episodes, context);
    read(j, "max_episode_steps", a3c.max_episode_steps, context);
    read(j, "learning_rate", a3c.learning_rate, context);
    read(j, "entropy_beta", a3c.entropy_beta, context);
    if (j.contains("reward")) parse_reward(j.at("reward"), a3c.reward);
    read(j, "seed", a3c.seed, context);
}

void parse_embedding(const json& j, EmbeddingConfig& emb) {
    check_keys(j, {"encoder", "tsne"}, "embedding");
    if (j.contains("encoder")) {
        const json& e = j.at("encoder");
        const std::string context = "embedding.encoder";
        check_keys(e,
                   {"input_grid_nm", "latent_dim", "hidden_dims", "epochs", "learning_rate",
                    "kl_weight", "seed"},
                   context);
        if (e.contains("input_grid_nm"))
            emb.encoder.input_grid = parse_grid(e.at("input_grid_nm"), context + ".input_grid_nm");
        read(e, "latent_dim", emb.encoder.latent_dim, context);
        read(e, "hidden_dims", emb.encoder.hidden_dims, context);
        read(e, "epochs", emb.encoder.epochs, context);
        read(e, "learning_rate", emb.encoder.learning_rate, context);
        read(e, "kl_weight", emb.encoder.kl_weight, context);
        read(e, "seed", emb.encoder.seed, context);
    }
    if (j.contains("tsne")) {
        const json& t = j.at("tsne");
        const std::string context = "embedding.tsne";
        check_keys(t,
                   {"perplexity", "iterations", "exaggeration_iters", "exaggeration",
                    "learning_rate", "init_sigma", "kl_check_interval", "seed"},
                   context);
        read(t, "perplexity", emb.tsne.perplexity, context);
        read(t, "iterations", emb.tsne.iterations, context);
        read(t, "exaggeration_iters", emb.tsne.exaggeration_iters, context);
        read(t, "exaggeration", emb.tsne.exaggeration, context);
        read(t, "learning_rate", emb.tsne.learning_rate, context);
        read(t, "init_sigma", emb.tsne.init_sigma, context);
        read(t, "kl_check_interval", emb.tsne.kl_check_interval, context);
        read(t, "seed", emb.tsne.seed, context);
    }
}

} // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("malformed config " + path.string() + ": " + e.what());
    }

    RunConfig cfg;
    try {
        check_keys(j, {"catalog_dir", "map_file", "seed", "task", "ga", "a3c", "embedding"},
                   "top level");
        if (j.contains("catalog_dir"))
            cfg.catalog_dir = j.at("catalog_dir").get<std::string>();
        if (j.contains("map_file")) cfg.map_file = j.at("map_file").get<std::string>();
        read(j, "seed", cfg.seed, "top level");
        if (j.contains("task")) parse_task(j.at("task"), cfg);
        if (j.contains("ga")) parse_ga(j.at("ga"), cfg.ga);
        if (j.contains("a3c")) parse_a3c(j.at("a3c"), cfg.a3c);
        if (j.contains("embedding")) parse_embedding(j.at("embedding"), cfg.embedding);
    } catch (const json::exception& e) {
        throw InputError("malformed config " + path.string() + ": " + e.what());
    }

    // One seed to rule them all, unless a block pins its own.
    if (!j.contains("ga") || !j.at("ga").contains("seed")) cfg.ga.seed = cfg.seed;
    if (!j.contains("a3c") || !j.at("a3c").contains("seed")) cfg.a3c.seed = cfg.seed;
    if (!j.contains("embedding") || !j.at("embedding").contains("encoder")
        || !j.at("embedding").at("encoder").contains("seed"))
        cfg.embedding.encoder.seed = cfg.seed;
    if (!j.contains("embedding") || !j.at("embedding").contains("tsne")
        || !j.at("embedding").at("tsne").contains("seed"))
        cfg.embedding.tsne.seed = cfg.seed;
    return cfg;
}

DesignTask RunConfig::make_task(const MaterialDb& db) const {
    auto resolve = [&db](const std::string& name, const char* what) {
        const MaterialRecord* rec = db.find(name);
        if (rec == nullptr) {
            std::string msg = std::string(what) + " names unknown material '" + name
                              + "'; closest catalog entries:";
            for (const std::string& s : db.suggest(name)) msg += " " + s;
            throw InputError(msg);
        }
        return rec->id;
    };

    DesignTask task;
    task.layer_count = layer_count;
    if (target_grid_nm.empty()) throw InputError("config task.target.grid_nm is required");
    task.target = TargetSpectrum::from_bands(target_grid_nm, target_bands, target_default,
                                             target_component);
    if (!target_weights.empty()) {
        if (target_weights.size() != target_grid_nm.size())
            throw InputError("config task.target.weights must match the grid length");
        task.target.weights = target_weights;
    }
    task.incidence = incidence;
    task.incident_medium = incident_material
                               ? MediumSpec::material(resolve(*incident_material, "incident"))
                               : MediumSpec::fixed(incident_nk);
    if (substrate) task.substrate_material = resolve(*substrate, "substrate");
    for (const auto& [layer, name] : frozen_layers)
        task.frozen_layers[layer] = resolve(name, "frozen layer");
    task.epoch_budget = epoch_budget;
    task.seed = seed;
    task.report_band_lo_nm = report_band_lo_nm;
    task.report_band_hi_nm = report_band_hi_nm;
    task.success_average_absorption = success_average_absorption;
    task.validate(db);
    return task;
}

} // namespace thinopt
