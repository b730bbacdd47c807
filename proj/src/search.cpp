#include "thinopt/search.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "thinopt/errors.hpp"

namespace thinopt {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void check_medium(const MediumSpec& medium, const MaterialDb& db, const char* what) {
    if (medium.material_id && (*medium.material_id < 0
                               || *medium.material_id >= static_cast<int>(db.size())))
        throw InputError(std::string(what) + " references a material id outside the catalog");
}

MediumSpec substrate_for(const DesignTask& task, const std::vector<int>& tuple) {
    return task.substrate_material ? MediumSpec::material(*task.substrate_material)
                                   : MediumSpec::material(tuple.back());
}

std::vector<Spectrum> design_spectra(const DesignTask& task, const std::vector<int>& tuple,
                                     std::span<const double> thicknesses,
                                     const MaterialDb& db) {
    Stack stack;
    stack.incident = task.incident_medium;
    stack.substrate = substrate_for(task, tuple);
    for (std::size_t i = 0; i < tuple.size(); ++i)
        stack.layers.push_back({tuple[i], thicknesses[i]});
    return compute_spectra(stack, task.target.wavelengths_nm, task.incidence, db);
}

double band_average_over_angles(std::span<const Spectrum> spectra, const DesignTask& task) {
    double sum = 0.0;
    for (const Spectrum& s : spectra)
        sum += band_average(s, task.report_band_lo_nm, task.report_band_hi_nm);
    return sum / static_cast<double>(spectra.size());
}

GridPoint snap_to_grid(EnvPoint p) {
    return {std::clamp(static_cast<int>(std::llround(p.x / kGridStep)), 0, kGridCells - 1),
            std::clamp(static_cast<int>(std::llround(p.y / kGridStep)), 0, kGridCells - 1)};
}

DesignResult finish_result(const DesignTask& task, const std::vector<int>& tuple,
                           std::vector<double> thicknesses, const MaterialDb& db) {
    DesignResult result;
    result.material_ids = tuple;
    for (int id : tuple) result.materials.push_back(db.record(id).name);
    result.thicknesses_nm = std::move(thicknesses);
    result.spectra = design_spectra(task, tuple, result.thicknesses_nm, db);
    result.merit = merit(result.spectra, task.target);
    result.average_absorption_band = band_average_over_angles(result.spectra, task);
    return result;
}

} // namespace

void DesignTask::validate(const MaterialDb& db) const {
    if (layer_count < 1) throw InputError("design task needs at least one layer");
    target.validate();
    const auto [lo, hi] = db.wavelength_support();
    if (target.wavelengths_nm.front() < lo || target.wavelengths_nm.back() > hi)
        throw InputError("target grid [" + fmt(target.wavelengths_nm.front()) + ", "
                         + fmt(target.wavelengths_nm.back())
                         + "] nm exceeds the catalog support [" + fmt(lo) + ", " + fmt(hi)
                         + "] nm");
    check_medium(incident_medium, db, "incident medium");
    if (substrate_material && (*substrate_material < 0
                               || *substrate_material >= static_cast<int>(db.size())))
        throw InputError("substrate references a material id outside the catalog");
    for (const auto& [layer, material] : frozen_layers) {
        if (layer < 0 || layer >= layer_count)
            throw InputError("frozen layer index outside the stack");
        if (material < 0 || material >= static_cast<int>(db.size()))
            throw InputError("frozen layer references a material id outside the catalog");
    }
    if (epoch_budget < 0) throw InputError("epoch budget must be non-negative");
    if (!(report_band_lo_nm < report_band_hi_nm))
        throw InputError("report band must satisfy lo < hi");
    if (!(success_average_absorption > 0.0 && success_average_absorption <= 1.0))
        throw InputError("success average absorption must lie in (0, 1]");
}

double derive_success_threshold(const TargetSpectrum& target, double average_attainment) {
    if (!(average_attainment > 0.0 && average_attainment <= 1.0))
        throw InputError("average attainment must lie in (0, 1]");
    std::size_t high_points = 0;
    for (double t : target.target)
        if (t >= 0.5) ++high_points;
    const double gap = 1.0 - average_attainment;
    return static_cast<double>(high_points) * gap * gap;
}

std::uint64_t tuple_seed(std::uint64_t base, std::span<const int> tuple) {
    std::uint64_t h = base ^ 0xcbf29ce484222325ull;
    for (int id : tuple) {
        h ^= static_cast<std::uint64_t>(id) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0x100000001b3ull;
    }
    return h;
}

TupleMeritFn make_ga_tuple_merit(const DesignTask& task, const GaConfig& ga_cfg,
                                 const MaterialDb& db) {
    return [&task, ga_cfg, &db](const std::vector<int>& tuple) -> TupleResult {
        GaConfig cfg = ga_cfg;
        cfg.seed = tuple_seed(task.seed, tuple);
        const GaResult ga = optimize_thickness(task.incident_medium, tuple,
                                               substrate_for(task, tuple), task.target,
                                               task.incidence, cfg, db);
        const std::vector<Spectrum> spectra =
            design_spectra(task, tuple, ga.best_thicknesses, db);
        return {ga.best_thicknesses, ga.best_merit,
                observation_error(spectra, task.target)};
    };
}

DesignResult run_search(const DesignTask& task, const A3cConfig& a3c_cfg,
                        const GaConfig& ga_cfg, const EnvironmentMap& map,
                        const MaterialDb& db) {
    task.validate(db);
    ga_cfg.validate();
    if (map.size() != db.size())
        throw InputError("environment map size does not match the catalog");

    // Fully frozen: nothing for the agent to choose; one GA run decides.
    if (static_cast<int>(task.frozen_layers.size()) == task.layer_count) {
        std::vector<int> tuple;
        for (int i = 0; i < task.layer_count; ++i) tuple.push_back(task.frozen_layers.at(i));
        GaConfig cfg = ga_cfg;
        cfg.seed = tuple_seed(task.seed, tuple);
        GaResult ga = optimize_thickness(task.incident_medium, tuple,
                                         substrate_for(task, tuple), task.target,
                                         task.incidence, cfg, db);
        DesignResult result = finish_result(task, tuple, std::move(ga.best_thicknesses), db);
        result.merit = ga.best_merit;
        result.search_trace = std::move(ga.history);
        result.success_merit_threshold =
            a3c_cfg.reward.success_merit_threshold > 0.0
                ? a3c_cfg.reward.success_merit_threshold
                : derive_success_threshold(task.target, task.success_average_absorption);
        result.cache_misses = 1;
        return result;
    }

    StateEvaluator evaluator(map, make_ga_tuple_merit(task, ga_cfg, db), [&] {
        std::vector<std::optional<int>> pinned(task.layer_count);
        for (const auto& [layer, material] : task.frozen_layers) pinned[layer] = material;
        return pinned;
    }());

    A3cTask agent_task;
    agent_task.layer_count = task.layer_count;
    agent_task.frozen.resize(task.layer_count);
    for (const auto& [layer, material] : task.frozen_layers)
        agent_task.frozen[layer] = snap_to_grid(map.point(material));
    agent_task.evaluator = &evaluator;

    A3cConfig cfg = a3c_cfg;
    cfg.episodes = task.epoch_budget;
    cfg.seed = task.seed;
    if (cfg.reward.success_merit_threshold <= 0.0)
        cfg.reward.success_merit_threshold =
            derive_success_threshold(task.target, task.success_average_absorption);

    GlobalParams global(2 * task.layer_count,
                        4 * static_cast<int>(agent_task.movable_layers().size()),
                        cfg.learning_rate, task.seed ^ 0x9e3779b97f4a7c15ull);
    A3cResult training = run_a3c(agent_task, cfg, global);

    const StateEvaluator::Best best = training.best;
    if (!std::isfinite(best.merit)) {
        std::ostringstream msg;
        msg << "no evaluable state within the epoch budget (" << training.episodes.size()
            << " episodes";
        for (const EpisodeSummary& e : training.episodes)
            if (e.terminal_reason == TerminalReason::Error) {
                msg << "; first failure: " << e.error;
                break;
            }
        msg << ")";
        throw SearchError(msg.str());
    }

    DesignResult result = finish_result(task, best.materials, best.thicknesses, db);
    result.merit = best.merit;
    result.success_merit_threshold = cfg.reward.success_merit_threshold;
    result.search_trace.reserve(training.episodes.size());
    for (const EpisodeSummary& e : training.episodes) {
        // Running min: concurrent workers can log a stale global best for an
        // earlier episode index; the best after epoch i is the min so far.
        const double prev = result.search_trace.empty()
                                ? std::numeric_limits<double>::infinity()
                                : result.search_trace.back();
        result.search_trace.push_back(std::min(prev, e.best_merit_so_far));
        result.updates += e.updates;
    }
    result.episodes = std::move(training.episodes);
    result.cache_hits = evaluator.cache_hits();
    result.cache_misses = evaluator.cache_misses();
    return result;
}

DesignResult evaluate_design(std::span<const std::string> materials,
                             std::span<const double> thicknesses, const DesignTask& task,
                             const MaterialDb& db) {
    if (materials.empty()) throw InputError("design needs at least one layer");
    if (materials.size() != thicknesses.size())
        throw InputError("got " + std::to_string(materials.size()) + " materials but "
                         + std::to_string(thicknesses.size()) + " thicknesses");
    task.validate(db);
    std::vector<int> tuple;
    tuple.reserve(materials.size());
    for (const std::string& name : materials) {
        const MaterialRecord* rec = db.find(name);
        if (rec == nullptr) {
            std::string msg = "unknown material '" + name + "'; closest catalog entries:";
            for (const std::string& s : db.suggest(name)) msg += " " + s;
            throw InputError(msg);
        }
        tuple.push_back(rec->id);
    }
    return finish_result(task, tuple, {thicknesses.begin(), thicknesses.end()}, db);
}

void write_result_bundle(const std::filesystem::path& dir, const DesignTask& task,
                         const DesignResult& result) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());

    nlohmann::ordered_json summary;
    summary["materials"] = result.materials;
    summary["material_ids"] = result.material_ids;
    summary["thicknesses_nm"] = result.thicknesses_nm;
    summary["merit"] = result.merit;
    summary["average_absorption_band"] = result.average_absorption_band;
    summary["report_band_nm"] = {task.report_band_lo_nm, task.report_band_hi_nm};
    summary["success_merit_threshold"] = result.success_merit_threshold;
    summary["layer_count"] = task.layer_count;
    summary["seed"] = task.seed;
    summary["epochs"] = result.episodes.size();
    summary["updates"] = result.updates;
    summary["cache_hits"] = result.cache_hits;
    summary["cache_misses"] = result.cache_misses;
    {
        std::ofstream out(dir / "summary.json");
        if (!out) throw InputError("cannot open " + (dir / "summary.json").string());
        out << summary.dump(2) << '\n';
        if (!out) throw InputError("failed writing " + (dir / "summary.json").string());
    }

    write_spectra_csv(dir / "spectrum.csv", result.spectra);

    {
        std::ofstream out(dir / "trace.csv");
        if (!out) throw InputError("cannot open " + (dir / "trace.csv").string());
        out << "epoch,best_merit\n";
        for (std::size_t i = 0; i < result.search_trace.size(); ++i)
            out << i << ',' << fmt(result.search_trace[i]) << '\n';
        if (!out) throw InputError("failed writing " + (dir / "trace.csv").string());
    }

    if (!result.episodes.empty())
        write_training_log(dir / "training_log.csv", result.episodes);
}

} // namespace thinopt
