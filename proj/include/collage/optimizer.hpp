/**
 * Arrangement search: a genetic algorithm over grid permutations with the
 * predictor as fitness, plus a brute-force baseline.
 *
 * Each generation copies the top-m individuals unchanged (elitism), breeds
 * crossover children from random elite pairs, refills the rest of the
 * population with fresh random permutations, and mutates non-elites by a
 * random transposition with probability mu. Fitness values are cached by
 * arrangement; the evaluation count reports unique evaluations only. Search
 * stops at the generation cap or after `saturation` consecutive generations
 * without improvement. Randomness derives from per-(generation, slot)
 * streams so runs are reproducible regardless of evaluation scheduling.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "collage/feature_store.hpp"
#include "collage/grid.hpp"
#include "collage/predictor.hpp"
#include "collage/rng.hpp"

namespace collage {

// Arrangement -> expected accuracy in (0, 1). Must be deterministic.
using FitnessFn = std::function<double(const Arrangement&)>;

struct GaConfig {
    int population = 100;       // n
    int elite_count = 20;       // m
    double crossover_rate = 0.6;  // chi
    double mutation_rate = 0.2;   // mu
    int max_generations = 10;
    int saturation = 3;  // stagnant generations before stopping
    uint64_t seed = 0;

    /// Defaults per grid side: 3x3 runs 100/20/10, 2x2 runs 5/3/5.
    static GaConfig defaults_for_side(int n);
    void validate() const;
};

struct GenerationStats {
    int generation = 0;
    size_t evaluations = 0;  // cumulative unique evaluations
    double best_fitness = 0.0;
    double elapsed_ms = 0.0;
};

struct FitnessTrace {
    std::vector<GenerationStats> generations;
    size_t evaluations = 0;  // total unique evaluations
    double best_fitness = 0.0;
};

/// Fitness backed by the trained predictor over build_collage_graph.
FitnessFn make_predictor_fitness(const PredictorParams& params,
                                 const std::vector<std::string>& ids, const FeatureStore& store);

/// Deterministic crossover core: the child takes `base` outside slots
/// [lo, hi], `donor` genes inside, and repairs duplicates with base's unused
/// genes in base order.
Arrangement crossover_segment(const Arrangement& base, const Arrangement& donor, int lo, int hi);

/// Both repaired one-segment-exchange children of a parent pair.
std::pair<Arrangement, Arrangement> crossover_children(const Arrangement& parent_a,
                                                       const Arrangement& parent_b,
                                                       SeededRng& rng);

/// One-segment crossover; of the two symmetric children the fitter is kept.
Arrangement crossover(const Arrangement& parent_a, const Arrangement& parent_b,
                      const FitnessFn& fitness, SeededRng& rng);

/// With probability mu, swaps one uniformly chosen pair of slots.
Arrangement mutate(const Arrangement& individual, double mu, SeededRng& rng);

/// Indices of the m fittest individuals, best first; ties broken by
/// lexicographic arrangement order.
std::vector<int> select_top_m(const std::vector<Arrangement>& population,
                              const std::vector<double>& fitnesses, int m);

std::pair<Arrangement, FitnessTrace> lcp_optimize(int k, const FitnessFn& fitness,
                                                  const GaConfig& cfg);
std::pair<Arrangement, FitnessTrace> lcp_optimize(const std::vector<std::string>& ids,
                                                  const FeatureStore& store,
                                                  const PredictorParams& params,
                                                  const GaConfig& cfg);

/// Exhaustive when k! <= budget, otherwise `budget` distinct uniform samples.
std::pair<Arrangement, FitnessTrace> brute_force(int k, const FitnessFn& fitness, size_t budget,
                                                 uint64_t seed);

void write_trace_csv(const FitnessTrace& trace, const std::string& path);

}  // namespace collage
