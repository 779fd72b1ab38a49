#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "colanet/rng.hpp"

namespace colanet {

/// One search-space dimension. Integer genes are rounded after every draw.
struct GeneSpec {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    bool integer = false;
};

struct GAConfig {
    int population_size = 100;
    double mutation_prob_per_individual = 0.5;
    double elitism = 0.1;
    int stale_generations_stop = 3;
    int repeats_per_eval = 4;
    int max_generations = 1000;
    int jobs = 1;
};

struct GAGeneration {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
};

struct GAResult {
    std::vector<double> best_genes;
    double best_fitness = 0.0;
    std::vector<GAGeneration> history;
};

/// Fitness of one individual: mean absolute error over repeats_per_eval
/// runs, each with its own derived seed. Lower is better. The callback gets
/// (genes, repeat_seed) and must be safe to call from worker threads.
using FitnessFn = std::function<double(const std::vector<double>&, std::uint64_t)>;

/// Generational GA: elitism keeps the top fraction, offspring come from
/// tournament-selected parents via uniform crossover, and a mutated
/// individual has one random gene redrawn uniformly within its range.
/// Terminates after stale_generations_stop generations without improvement.
GAResult genetic_optimize(const GAConfig& config, const std::vector<GeneSpec>& genes,
                          const FitnessFn& fitness, std::uint64_t seed);

}  // namespace colanet
