#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thinopt/a3c.hpp"
#include "thinopt/env_map.hpp"
#include "thinopt/ga.hpp"
#include "thinopt/material_db.hpp"
#include "thinopt/tmm.hpp"

namespace thinopt {

struct DesignTask {
    int layer_count = 1;
    TargetSpectrum target;
    IncidenceSpec incidence;
    MediumSpec incident_medium = MediumSpec::vacuum();
    // Semi-infinite exit medium. Unset: the bottom layer's own material
    // continues as the substrate (sensible when it is effectively opaque).
    std::optional<int> substrate_material;
    std::map<int, int> frozen_layers; // layer index -> pinned material id
    int epoch_budget = 100;           // total worker episodes
    std::uint64_t seed = 0;
    double report_band_lo_nm = 250.0; // band for average_absorption_band
    double report_band_hi_nm = 800.0;
    // Episodes succeed when merit drops to the level of a design holding
    // this average attainment over the high-target grid points; ignored when
    // the reward config sets an explicit threshold.
    double success_average_absorption = 0.95;

    void validate(const MaterialDb& db) const;
};

struct DesignResult {
    std::vector<int> material_ids;      // top layer first
    std::vector<std::string> materials;
    std::vector<double> thicknesses_nm;
    std::vector<Spectrum> spectra;      // one per incidence angle
    double merit{0.0};
    double average_absorption_band{0.0};
    double success_merit_threshold{0.0};
    std::vector<double> search_trace;   // global-best merit after each epoch,
                                        // non-increasing
    std::vector<EpisodeSummary> episodes;
    std::uint64_t cache_hits{0};
    std::uint64_t cache_misses{0};
    std::uint64_t updates{0};
};

// Merit level equivalent to holding `average_attainment` (e.g. 0.95) across
// every grid point whose target is >= 0.5, and the target elsewhere. Zero
// (success disabled) when the target has no such points.
double derive_success_threshold(const TargetSpectrum& target, double average_attainment);

// Deterministic per-tuple stream seed: makes cached GA results independent
// of the order in which workers reach a tuple.
std::uint64_t tuple_seed(std::uint64_t base, std::span<const int> tuple);

// GA-backed tuple evaluation for `task`: thickness optimization of the
// material tuple against the task target, seeded by tuple_seed. `task` and
// `db` are captured by reference and must outlive the returned function.
TupleMeritFn make_ga_tuple_merit(const DesignTask& task, const GaConfig& ga_cfg,
                                 const MaterialDb& db);

// End-to-end search: agents choose materials on the map, the GA fits
// thicknesses per tuple, and the best cached design is reported with its
// spectrum recomputed. When every layer is frozen the search degenerates to
// the single GA run for that tuple. a3c_cfg.episodes and .seed are taken
// from the task. Throws SearchError when the budget ends with no evaluable
// state. Single-worker runs are deterministic.
DesignResult run_search(const DesignTask& task, const A3cConfig& a3c_cfg,
                        const GaConfig& ga_cfg, const EnvironmentMap& map,
                        const MaterialDb& db);

// Scores a fixed design as-is (no search). Unknown names raise InputError
// listing the closest catalog entries.
DesignResult evaluate_design(std::span<const std::string> materials,
                             std::span<const double> thicknesses, const DesignTask& task,
                             const MaterialDb& db);

// Writes summary.json, spectrum.csv, trace.csv and (when episodes were run)
// training_log.csv into `dir`, creating it if needed. Output is byte-stable
// for identical results; no timestamps.
void write_result_bundle(const std::filesystem::path& dir, const DesignTask& task,
                         const DesignResult& result);

} // namespace thinopt
