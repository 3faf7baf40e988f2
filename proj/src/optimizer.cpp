#include "collage/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "collage/errors.hpp"
#include "collage/graph.hpp"

namespace collage {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Cache keyed by arrangement; counts unique evaluations.
class FitnessCache {
public:
    explicit FitnessCache(const FitnessFn& fn) : fn_(fn) {}

    double get(const Arrangement& a) {
        auto it = values_.find(a.index_of);
        if (it != values_.end()) return it->second;
        double value = fn_(a);
        if (!std::isfinite(value))
            throw NumericError("fitness function returned a non-finite value");
        values_.emplace(a.index_of, value);
        return value;
    }

    size_t unique_evaluations() const { return values_.size(); }

private:
    const FitnessFn& fn_;
    std::map<std::vector<int>, double> values_;
};

}  // namespace

Arrangement crossover_segment(const Arrangement& base, const Arrangement& donor, int lo, int hi) {
    int k = base.size();
    if (donor.size() != k)
        throw ValidationError("crossover parents have different lengths: " + std::to_string(k) +
                              " vs " + std::to_string(donor.size()));
    if (lo < 0 || hi < lo || hi >= k) throw ConfigError("crossover segment out of range");
    Arrangement child = base;
    std::vector<uint8_t> used(static_cast<size_t>(k), 0);
    for (int s = lo; s <= hi; ++s) {
        child.index_of[static_cast<size_t>(s)] = donor.index_of[static_cast<size_t>(s)];
        used[static_cast<size_t>(donor.index_of[static_cast<size_t>(s)])] = 1;
    }
    std::vector<int> conflicted;
    for (int s = 0; s < k; ++s) {
        if (s >= lo && s <= hi) continue;
        int gene = base.index_of[static_cast<size_t>(s)];
        if (used[static_cast<size_t>(gene)])
            conflicted.push_back(s);
        else
            used[static_cast<size_t>(gene)] = 1;
    }
    size_t fill = 0;
    for (int idx = 0; idx < k && fill < conflicted.size(); ++idx) {
        int gene = base.index_of[static_cast<size_t>(idx)];
        if (!used[static_cast<size_t>(gene)]) {
            child.index_of[static_cast<size_t>(conflicted[fill++])] = gene;
            used[static_cast<size_t>(gene)] = 1;
        }
    }
    return child;
}

GaConfig GaConfig::defaults_for_side(int n) {
    GaConfig cfg;
    if (n <= 2) {
        cfg.population = 5;
        cfg.elite_count = 3;
        cfg.max_generations = 5;
    } else {
        cfg.population = 100;
        cfg.elite_count = 20;
        cfg.max_generations = 10;
    }
    return cfg;
}

void GaConfig::validate() const {
    if (population < 1) throw ConfigError("population must be >= 1");
    if (elite_count < 1 || elite_count > population)
        throw ConfigError("elite count must satisfy 1 <= m <= population");
    if (crossover_rate < 0.0 || crossover_rate > 1.0)
        throw ConfigError("crossover rate must be in [0, 1]");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
        throw ConfigError("mutation rate must be in [0, 1]");
    if (max_generations < 1) throw ConfigError("max generations must be >= 1");
    if (saturation < 1) throw ConfigError("saturation threshold must be >= 1");
}

FitnessFn make_predictor_fitness(const PredictorParams& params,
                                 const std::vector<std::string>& ids, const FeatureStore& store) {
    return [&params, ids, &store](const Arrangement& a) {
        return predictor_forward(params, build_collage_graph(a, ids, store));
    };
}

std::pair<Arrangement, Arrangement> crossover_children(const Arrangement& parent_a,
                                                       const Arrangement& parent_b,
                                                       SeededRng& rng) {
    int k = parent_a.size();
    if (parent_b.size() != k)
        throw ValidationError("crossover parents have different lengths: " + std::to_string(k) +
                              " vs " + std::to_string(parent_b.size()));
    int lo = rng.uniform_int(0, k - 1);
    int hi = rng.uniform_int(lo, k - 1);
    return {crossover_segment(parent_a, parent_b, lo, hi),
            crossover_segment(parent_b, parent_a, lo, hi)};
}

Arrangement crossover(const Arrangement& parent_a, const Arrangement& parent_b,
                      const FitnessFn& fitness, SeededRng& rng) {
    auto [first, second] = crossover_children(parent_a, parent_b, rng);
    return fitness(first) >= fitness(second) ? first : second;
}

Arrangement mutate(const Arrangement& individual, double mu, SeededRng& rng) {
    if (mu <= 0.0 || !rng.bernoulli(mu)) return individual;
    int k = individual.size();
    if (k < 2) return individual;
    int i = rng.uniform_int(0, k - 1);
    int j = rng.uniform_int(0, k - 2);
    if (j >= i) ++j;  // uniform over distinct pairs
    Arrangement out = individual;
    std::swap(out.index_of[static_cast<size_t>(i)], out.index_of[static_cast<size_t>(j)]);
    return out;
}

std::vector<int> select_top_m(const std::vector<Arrangement>& population,
                              const std::vector<double>& fitnesses, int m) {
    if (population.size() != fitnesses.size())
        throw ConfigError("population and fitness arrays differ in size");
    if (m < 0 || static_cast<size_t>(m) > population.size())
        throw ConfigError("top-m count " + std::to_string(m) + " exceeds population size " +
                          std::to_string(population.size()));
    std::vector<int> order(population.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int p, int q) {
        if (fitnesses[static_cast<size_t>(p)] != fitnesses[static_cast<size_t>(q)])
            return fitnesses[static_cast<size_t>(p)] > fitnesses[static_cast<size_t>(q)];
        if (population[static_cast<size_t>(p)].index_of !=
            population[static_cast<size_t>(q)].index_of)
            return population[static_cast<size_t>(p)].index_of <
                   population[static_cast<size_t>(q)].index_of;
        return p < q;
    });
    order.resize(static_cast<size_t>(m));
    return order;
}

std::pair<Arrangement, FitnessTrace> lcp_optimize(int k, const FitnessFn& fitness,
                                                  const GaConfig& cfg) {
    cfg.validate();
    GridSpec spec = GridSpec::from_count(k);  // rejects non-squares
    if (spec.n < 2) throw ConfigError("lcp_optimize requires K >= 4");

    Clock::time_point start = Clock::now();
    FitnessCache cache(fitness);
    SeededRng master(cfg.seed);

    std::vector<Arrangement> population;
    population.reserve(static_cast<size_t>(cfg.population));
    for (int slot = 0; slot < cfg.population; ++slot) {
        SeededRng slot_rng = master.derive(0).derive("init", static_cast<uint64_t>(slot));
        population.push_back(Arrangement{slot_rng.permutation(k)});
    }

    Arrangement best_arrangement = population.front();
    double best_fitness = -std::numeric_limits<double>::infinity();
    auto evaluate = [&](const std::vector<Arrangement>& pop) {
        std::vector<double> fit(pop.size());
        for (size_t i = 0; i < pop.size(); ++i) {
            fit[i] = cache.get(pop[i]);
            if (fit[i] > best_fitness) {
                best_fitness = fit[i];
                best_arrangement = pop[i];
            }
        }
        return fit;
    };

    FitnessTrace trace;
    std::vector<double> fitnesses = evaluate(population);
    trace.generations.push_back(
        {0, cache.unique_evaluations(), best_fitness, ms_since(start)});

    int stagnant = 0;
    for (int gen = 1; gen <= cfg.max_generations; ++gen) {
        SeededRng gen_rng = master.derive(static_cast<uint64_t>(gen));
        double previous_best = best_fitness;

        std::vector<int> elite_idx = select_top_m(population, fitnesses, cfg.elite_count);
        std::vector<Arrangement> next;
        next.reserve(static_cast<size_t>(cfg.population));
        for (int idx : elite_idx) next.push_back(population[static_cast<size_t>(idx)]);

        int child_count = std::min(cfg.population - cfg.elite_count,
                                   static_cast<int>(std::lround(cfg.crossover_rate *
                                                                cfg.population)));
        for (int t = 0; t < child_count; ++t) {
            SeededRng pair_rng = gen_rng.derive("pair", static_cast<uint64_t>(t));
            int pa = pair_rng.uniform_int(0, cfg.elite_count - 1);
            int pb = cfg.elite_count > 1 ? pair_rng.uniform_int(0, cfg.elite_count - 2) : pa;
            if (cfg.elite_count > 1 && pb >= pa) ++pb;
            auto child = crossover(next[static_cast<size_t>(pa)], next[static_cast<size_t>(pb)],
                                   [&cache](const Arrangement& a) { return cache.get(a); },
                                   pair_rng);
            next.push_back(std::move(child));
        }
        // Refill with fresh uniform permutations.
        for (int slot = static_cast<int>(next.size()); slot < cfg.population; ++slot) {
            SeededRng slot_rng = gen_rng.derive("refill", static_cast<uint64_t>(slot));
            next.push_back(Arrangement{slot_rng.permutation(k)});
        }
        // Mutation applies to non-elites only so elitism stays intact.
        for (int slot = cfg.elite_count; slot < cfg.population; ++slot) {
            SeededRng slot_rng = gen_rng.derive("mut", static_cast<uint64_t>(slot));
            next[static_cast<size_t>(slot)] =
                mutate(next[static_cast<size_t>(slot)], cfg.mutation_rate, slot_rng);
        }

        population = std::move(next);
        fitnesses = evaluate(population);
        trace.generations.push_back(
            {gen, cache.unique_evaluations(), best_fitness, ms_since(start)});

        if (best_fitness > previous_best)
            stagnant = 0;
        else if (++stagnant >= cfg.saturation)
            break;
    }

    trace.evaluations = cache.unique_evaluations();
    trace.best_fitness = best_fitness;
    return {best_arrangement, trace};
}

std::pair<Arrangement, FitnessTrace> lcp_optimize(const std::vector<std::string>& ids,
                                                  const FeatureStore& store,
                                                  const PredictorParams& params,
                                                  const GaConfig& cfg) {
    FitnessFn fitness = make_predictor_fitness(params, ids, store);
    return lcp_optimize(static_cast<int>(ids.size()), fitness, cfg);
}

std::pair<Arrangement, FitnessTrace> brute_force(int k, const FitnessFn& fitness, size_t budget,
                                                 uint64_t seed) {
    if (budget < 1) throw ConfigError("brute force budget must be >= 1");
    GridSpec spec = GridSpec::from_count(k);
    (void)spec;

    Clock::time_point start = Clock::now();
    FitnessCache cache(fitness);
    FitnessTrace trace;
    Arrangement best;
    double best_fitness = -std::numeric_limits<double>::infinity();

    auto consider = [&](const Arrangement& a) {
        double f = cache.get(a);
        if (f > best_fitness) {
            best_fitness = f;
            best = a;
            trace.generations.push_back({static_cast<int>(cache.unique_evaluations()),
                                         cache.unique_evaluations(), best_fitness,
                                         ms_since(start)});
        }
    };

    double factorial = 1.0;
    for (int i = 2; i <= k; ++i) factorial *= i;
    if (factorial <= static_cast<double>(budget)) {
        Arrangement a = Arrangement::identity(k);
        do {
            consider(a);
        } while (std::next_permutation(a.index_of.begin(), a.index_of.end()));
    } else {
        SeededRng rng(seed);
        std::set<std::vector<int>> seen;
        while (seen.size() < budget) {
            Arrangement a{rng.permutation(k)};
            if (seen.insert(a.index_of).second) consider(a);
        }
    }

    trace.evaluations = cache.unique_evaluations();
    trace.best_fitness = best_fitness;
    if (trace.generations.empty() ||
        trace.generations.back().evaluations != trace.evaluations)
        trace.generations.push_back({static_cast<int>(trace.evaluations), trace.evaluations,
                                     best_fitness, ms_since(start)});
    return {best, trace};
}

void write_trace_csv(const FitnessTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << "generation,evaluations,best_fitness,elapsed_ms\n";
    char line[160];
    for (const GenerationStats& g : trace.generations) {
        std::snprintf(line, sizeof(line), "%d,%zu,%.17g,%.3f\n", g.generation, g.evaluations,
                      g.best_fitness, g.elapsed_ms);
        out << line;
    }
}

}  // namespace collage
