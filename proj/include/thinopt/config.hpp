#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thinopt/a3c.hpp"
#include "thinopt/embedding.hpp"
#include "thinopt/ga.hpp"
#include "thinopt/material_db.hpp"
#include "thinopt/search.hpp"

namespace thinopt {

// One JSON file drives every subcommand. Materials are referenced by name
// and resolved against the catalog when the task is built. Unknown keys are
// rejected (typo protection). The top-level seed feeds the task, GA,
// encoder, and t-SNE seeds unless those set their own.
struct RunConfig {
    std::filesystem::path catalog_dir = "data/nk";
    std::filesystem::path map_file = "map.json";
    std::uint64_t seed = 0;

    // task block (material names unresolved until make_task)
    int layer_count = 1;
    std::vector<double> target_grid_nm;
    std::vector<TargetSpectrum::Band> target_bands;
    double target_default = 0.0;
    SpectrumComponent target_component = SpectrumComponent::Absorption;
    std::vector<double> target_weights; // empty -> uniform
    IncidenceSpec incidence;
    std::optional<std::string> substrate;
    std::optional<std::string> incident_material;
    std::complex<double> incident_nk{1.0, 0.0};
    std::map<int, std::string> frozen_layers;
    int epoch_budget = 100;
    double report_band_lo_nm = 250.0;
    double report_band_hi_nm = 800.0;
    double success_average_absorption = 0.95;

    GaConfig ga;
    A3cConfig a3c;
    EmbeddingConfig embedding;

    static RunConfig load(const std::filesystem::path& path);

    // Resolves names against `db`; unknown names raise InputError with the
    // closest catalog entries.
    DesignTask make_task(const MaterialDb& db) const;
};

} // namespace thinopt
