#include "colanet/ga.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace colanet {

namespace {

double clamp_gene(double v, const GeneSpec& g) {
    v = std::clamp(v, g.min, g.max);
    if (g.integer) v = std::round(v);
    return v;
}

std::vector<double> random_individual(const std::vector<GeneSpec>& genes, Rng& rng) {
    std::vector<double> ind(genes.size());
    for (std::size_t i = 0; i < genes.size(); ++i) {
        ind[i] = clamp_gene(rng.uniform(genes[i].min, genes[i].max), genes[i]);
    }
    return ind;
}

}  // namespace

GAResult genetic_optimize(const GAConfig& config, const std::vector<GeneSpec>& genes,
                          const FitnessFn& fitness, std::uint64_t seed) {
    if (config.population_size < 2) throw std::invalid_argument("population_size must be >= 2");
    if (genes.empty()) throw std::invalid_argument("empty search space");

    Rng rng(derive_seed(seed, "ga"));
    std::vector<std::vector<double>> population(static_cast<std::size_t>(config.population_size));
    for (auto& ind : population) ind = random_individual(genes, rng);

    const int n_elite =
        std::max(1, static_cast<int>(std::floor(config.elitism * config.population_size)));

    // Evaluation seeds derive from the genes, so identical individuals score
    // identically across generations; elites then keep their scores and the
    // per-generation best is monotone.
    auto evaluate_individual = [&](const std::vector<double>& ind) -> double {
        std::string tag = "ga-eval";
        for (double g : ind) {
            char buf[32];
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), g);
            (void)ec;
            tag.append("-").append(buf, ptr);
        }
        double total = 0.0;
        for (int r = 0; r < config.repeats_per_eval; ++r) {
            total += fitness(ind, derive_seed(seed, tag + "-" + std::to_string(r)));
        }
        return total / config.repeats_per_eval;
    };

    GAResult result;
    result.best_fitness = std::numeric_limits<double>::infinity();
    int stale = 0;

    for (int generation = 0; generation < config.max_generations; ++generation) {
        std::vector<double> scores(population.size());
        if (config.jobs > 1) {
            std::atomic<std::size_t> next{0};
            auto worker = [&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= population.size()) return;
                    scores[i] = evaluate_individual(population[i]);
                }
            };
            std::vector<std::thread> pool;
            const int n_threads = std::min<int>(config.jobs, static_cast<int>(population.size()));
            pool.reserve(static_cast<std::size_t>(n_threads));
            for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        } else {
            for (std::size_t i = 0; i < population.size(); ++i) {
                scores[i] = evaluate_individual(population[i]);
            }
        }

        std::vector<std::size_t> order(population.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

        const double gen_best = scores[order.front()];
        double gen_mean = 0.0;
        for (double s : scores) gen_mean += s;
        gen_mean /= static_cast<double>(scores.size());
        result.history.push_back({generation, gen_best, gen_mean});

        if (gen_best < result.best_fitness) {
            result.best_fitness = gen_best;
            result.best_genes = population[order.front()];
            stale = 0;
        } else {
            ++stale;
        }
        if (stale >= config.stale_generations_stop) break;

        // Next generation: elites verbatim, the rest bred.
        std::vector<std::vector<double>> next_population;
        next_population.reserve(population.size());
        for (int e = 0; e < n_elite; ++e) {
            next_population.push_back(population[order[static_cast<std::size_t>(e)]]);
        }
        auto tournament = [&]() -> const std::vector<double>& {
            const std::size_t a = rng.uniform_index(population.size());
            const std::size_t b = rng.uniform_index(population.size());
            return scores[a] <= scores[b] ? population[a] : population[b];
        };
        while (next_population.size() < population.size()) {
            const auto& pa = tournament();
            const auto& pb = tournament();
            std::vector<double> child(genes.size());
            for (std::size_t g = 0; g < genes.size(); ++g) {
                child[g] = rng.uniform() < 0.5 ? pa[g] : pb[g];
            }
            if (rng.uniform() < config.mutation_prob_per_individual) {
                const std::size_t g = rng.uniform_index(genes.size());
                child[g] = clamp_gene(rng.uniform(genes[g].min, genes[g].max), genes[g]);
            }
            next_population.push_back(std::move(child));
        }
        population = std::move(next_population);
    }
    return result;
}

}  // namespace colanet
