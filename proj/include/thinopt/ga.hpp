#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "thinopt/material_db.hpp"
#include "thinopt/tmm.hpp"

namespace thinopt {

// Real-coded genetic algorithm over layer thicknesses.
struct GaConfig {
    int population_size = 100;
    int generations = 500;
    double selection_rate = 0.3;  // truncation: top ceil(rate * pop) breed
    double mutation_rate = 0.1;   // per-gene Bernoulli
    double crossover_rate = 0.5;  // per breeding pair
    double elitism_rate = 0.1;    // ceil(rate * pop) copied unchanged
    std::pair<double, double> thickness_bounds_nm{10.0, 200.0};
    std::uint64_t seed = 0;

    void validate() const;
};

using Chromosome = std::vector<double>;

struct GaResult {
    Chromosome best_thicknesses;
    double best_merit{0.0};
    std::vector<double> history;       // generation-best merit; [0] is the
                                       // initial population, non-increasing
    std::vector<double> mean_history;  // generation-mean merit, same indexing
    std::size_t evaluations{0};        // objective calls (cache misses)
    std::size_t cache_hits{0};
};

// Indices of the parent pool: the top ceil(selection_rate * size) by fitness
// (higher is better), ties broken by lower index. Deterministic.
std::vector<int> select(std::span<const double> fitnesses, const GaConfig& cfg);

// Single-point crossover with probability `crossover_rate`: cut position
// uniform in {1, ..., L-1}, children swap tails. Otherwise (or when L == 1,
// where no cut exists) children are copies; no random draws are consumed in
// the L == 1 case.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            double crossover_rate, std::mt19937_64& rng);

// Each gene independently, with probability mutation_rate, is replaced by a
// uniform draw from thickness_bounds_nm.
void mutate(Chromosome& c, const GaConfig& cfg, std::mt19937_64& rng);

// Elites (top ceil(elitism_rate * pop), unchanged, bypassing mutation) plus
// children bred from the selection pool via crossover then mutation, until
// the population size is restored.
std::vector<Chromosome> next_generation(const std::vector<Chromosome>& population,
                                        std::span<const double> fitnesses, const GaConfig& cfg,
                                        std::mt19937_64& rng);

// Merit value for a thickness vector; lower is better. Must be pure.
using MeritFn = std::function<double(std::span<const double>)>;

// Generic minimizer: evolves cfg.generations generations and returns the
// best-ever chromosome. Fitness is -merit. Duplicate evaluations within the
// run are served from a cache keyed on the chromosome rounded to 0.01 nm.
// Deterministic given cfg.seed.
GaResult optimize(const MeritFn& merit_of, std::size_t layer_count, const GaConfig& cfg);

// Thickness optimization of a fixed material sequence against `target`.
GaResult optimize_thickness(const MediumSpec& incident, std::span<const int> materials,
                            const MediumSpec& substrate, const TargetSpectrum& target,
                            const IncidenceSpec& incidence, const GaConfig& cfg,
                            const MaterialDb& db);

// Trace CSV, header "generation,best_merit,mean_merit".
void write_ga_trace_csv(const std::filesystem::path& path, const GaResult& result);

} // namespace thinopt
