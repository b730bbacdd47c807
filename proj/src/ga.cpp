#include "thinopt/ga.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "thinopt/errors.hpp"

namespace thinopt {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

int ceil_count(double rate, int size) {
    return static_cast<int>(std::ceil(rate * size));
}

// Cache key: thicknesses rounded to 0.01 nm.
struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& key) const {
        std::size_t h = 0xcbf29ce484222325ull;
        for (std::int64_t v : key) {
            h ^= static_cast<std::size_t>(v);
            h *= 0x100000001b3ull;
        }
        return h;
    }
};

std::vector<std::int64_t> cache_key(std::span<const double> genes) {
    std::vector<std::int64_t> key(genes.size());
    for (std::size_t i = 0; i < genes.size(); ++i)
        key[i] = std::llround(genes[i] * 100.0);
    return key;
}

} // namespace

void GaConfig::validate() const {
    if (population_size < 4) throw InputError("GA population size must be at least 4");
    if (generations < 1) throw InputError("GA generation count must be positive");
    for (double rate : {selection_rate, mutation_rate, crossover_rate, elitism_rate})
        if (!(rate >= 0.0 && rate <= 1.0)) throw InputError("GA rates must lie in [0, 1]");
    if (selection_rate * population_size < 1.0)
        throw InputError("GA selection pool would be empty");
    if (elitism_rate * population_size < 1.0)
        throw InputError("GA elitism must keep at least one chromosome");
    const auto [lo, hi] = thickness_bounds_nm;
    if (!(std::isfinite(lo) && std::isfinite(hi)) || lo <= 0.0 || lo >= hi)
        throw InputError("GA thickness bounds must satisfy 0 < lower < upper");
}

std::vector<int> select(std::span<const double> fitnesses, const GaConfig& cfg) {
    const int n = static_cast<int>(fitnesses.size());
    const int pool = std::min(n, ceil_count(cfg.selection_rate, n));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fitnesses[a] > fitnesses[b]; });
    order.resize(pool);
    return order;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            double crossover_rate, std::mt19937_64& rng) {
    if (a.size() != b.size()) throw InputError("crossover parents must have equal length");
    std::pair<Chromosome, Chromosome> children{a, b};
    const std::size_t len = a.size();
    if (len < 2) return children;
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= crossover_rate)
        return children;
    const std::size_t cut =
        std::uniform_int_distribution<std::size_t>(1, len - 1)(rng);
    for (std::size_t i = cut; i < len; ++i)
        std::swap(children.first[i], children.second[i]);
    return children;
}

void mutate(Chromosome& c, const GaConfig& cfg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> gate(0.0, 1.0);
    std::uniform_real_distribution<double> draw(cfg.thickness_bounds_nm.first,
                                                cfg.thickness_bounds_nm.second);
    for (double& gene : c)
        if (gate(rng) < cfg.mutation_rate) gene = draw(rng);
}

std::vector<Chromosome> next_generation(const std::vector<Chromosome>& population,
                                        std::span<const double> fitnesses, const GaConfig& cfg,
                                        std::mt19937_64& rng) {
    if (population.size() != fitnesses.size())
        throw InputError("population and fitness sizes disagree");
    const int n = static_cast<int>(population.size());
    const int elite_count = std::min(n, ceil_count(cfg.elitism_rate, n));

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fitnesses[a] > fitnesses[b]; });

    std::vector<Chromosome> next;
    next.reserve(population.size());
    for (int i = 0; i < elite_count; ++i) next.push_back(population[order[i]]);

    const std::vector<int> pool = select(fitnesses, cfg);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    while (next.size() < population.size()) {
        const Chromosome& pa = population[pool[pick(rng)]];
        const Chromosome& pb = population[pool[pick(rng)]];
        auto [child_a, child_b] = crossover(pa, pb, cfg.crossover_rate, rng);
        mutate(child_a, cfg, rng);
        next.push_back(std::move(child_a));
        if (next.size() < population.size()) {
            mutate(child_b, cfg, rng);
            next.push_back(std::move(child_b));
        }
    }
    return next;
}

GaResult optimize(const MeritFn& merit_of, std::size_t layer_count, const GaConfig& cfg) {
    cfg.validate();
    if (layer_count == 0) throw InputError("GA needs at least one gene");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> draw(cfg.thickness_bounds_nm.first,
                                                cfg.thickness_bounds_nm.second);

    std::vector<Chromosome> population(cfg.population_size, Chromosome(layer_count));
    for (Chromosome& c : population)
        for (double& gene : c) gene = draw(rng);

    GaResult result;
    std::unordered_map<std::vector<std::int64_t>, double, KeyHash> cache;
    auto evaluate = [&](const Chromosome& c) {
        auto key = cache_key(c);
        if (auto it = cache.find(key); it != cache.end()) {
            ++result.cache_hits;
            return it->second;
        }
        const double m = merit_of(c);
        if (!std::isfinite(m)) throw TrainingError("GA objective returned a non-finite merit");
        cache.emplace(std::move(key), m);
        ++result.evaluations;
        return m;
    };

    result.best_merit = std::numeric_limits<double>::infinity();
    std::vector<double> merits(population.size());
    std::vector<double> fitnesses(population.size());
    auto score_generation = [&] {
        double sum = 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < population.size(); ++i) {
            merits[i] = evaluate(population[i]);
            fitnesses[i] = -merits[i];
            sum += merits[i];
            if (merits[i] < best) best = merits[i];
            if (merits[i] < result.best_merit) {
                result.best_merit = merits[i];
                result.best_thicknesses = population[i];
            }
        }
        result.history.push_back(best);
        result.mean_history.push_back(sum / static_cast<double>(population.size()));
    };

    score_generation();
    for (int gen = 0; gen < cfg.generations; ++gen) {
        population = next_generation(population, fitnesses, cfg, rng);
        score_generation();
    }
    return result;
}

GaResult optimize_thickness(const MediumSpec& incident, std::span<const int> materials,
                            const MediumSpec& substrate, const TargetSpectrum& target,
                            const IncidenceSpec& incidence, const GaConfig& cfg,
                            const MaterialDb& db) {
    if (materials.empty()) throw InputError("GA needs at least one layer material");
    target.validate();
    const StackEvaluator eval(incident, {materials.begin(), materials.end()}, substrate,
                              target.wavelengths_nm, incidence, db);
    return optimize(
        [&](std::span<const double> thicknesses) {
            return merit(eval.evaluate(thicknesses), target);
        },
        materials.size(), cfg);
}

void write_ga_trace_csv(const std::filesystem::path& path, const GaResult& result) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << "generation,best_merit,mean_merit\n";
    for (std::size_t g = 0; g < result.history.size(); ++g)
        out << g << ',' << fmt(result.history[g]) << ',' << fmt(result.mean_history[g]) << '\n';
    if (!out) throw InputError("failed writing " + path.string());
}

} // namespace thinopt
