#pragma once

/// @file ga.hpp
/// @brief Steady-state genetic algorithm over a population of embeddings.
///
/// The population starts as the corpus embeddings. Each generation keeps the
/// `elitism_count` best individuals unchanged and refills the rest with
/// children bred from the `mating_pool_size` best parents using single-point
/// crossover followed by additive uniform mutation.
///
/// Random draw order per generation (fixed for reproducibility):
///   selection draws nothing;
///   for each mating pair: one crossover cut point, then mutation of the
///   first child (gene positions, then perturbations), then of the second.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "core.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "similarity.hpp"
#include "population.hpp"
#include "trace.hpp"

namespace evoretrieve {

struct GAConfig {
    std::size_t mating_pool_size = 100;
    std::size_t elitism_count = 3;
    double mutation_fraction = 0.10;
    double mutation_range = 0.10;
    std::size_t generations = 50;
    std::size_t stagnation_patience = 10;
    double stagnation_epsilon = 1e-9;
    std::uint64_t seed = 0;
    /// Snapshots kept for harvesting (see SnapshotStore); 0 keeps all.
    std::size_t retain_snapshots = 3;
    bool record_fitnesses = true;

    void validate(std::size_t population_size) const {
        auto fail = [](const std::string& why) { throw Error(ErrorKind::invalid_config, why); };
        if (mating_pool_size < 2) fail("mating pool must hold at least 2 parents");
        if (mating_pool_size > population_size) {
            fail("population of " + std::to_string(population_size) + " is smaller than mating pool of " +
                 std::to_string(mating_pool_size));
        }
        if (elitism_count > population_size) fail("elitism count exceeds population size");
        if (!(mutation_fraction > 0.0 && mutation_fraction <= 1.0)) fail("mutation fraction must be in (0, 1]");
        if (!(mutation_range >= 0.0) || !std::isfinite(mutation_range)) fail("mutation range must be >= 0");
        if (generations == 0) fail("generations must be positive");
        if (stagnation_patience == 0) fail("stagnation patience must be positive");
        if (!(stagnation_epsilon >= 0.0)) fail("stagnation epsilon must be >= 0");
    }
};

/// Indexes of the k lowest fitnesses, ascending by fitness, ties by index.
inline std::vector<std::size_t> select_steady_state(const std::vector<SimilarityScore>& fitnesses, std::size_t k) {
    if (k > fitnesses.size()) {
        throw Error(ErrorKind::invalid_argument,
                    "cannot select " + std::to_string(k) + " of " + std::to_string(fitnesses.size()));
    }
    std::vector<std::size_t> idx(fitnesses.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (fitnesses[a] != fitnesses[b]) return fitnesses[a] < fitnesses[b];
                          return a < b;
                      });
    idx.resize(k);
    return idx;
}

/// Splices two parents at `cut` (1 <= cut < dim): the first child takes the
/// first parent's head and the second parent's tail.
inline std::pair<EmbeddingVector, EmbeddingVector> crossover_at(const EmbeddingVector& p1,
                                                                const EmbeddingVector& p2, std::size_t cut) {
    if (p1.dim() != p2.dim()) throw Error(ErrorKind::invalid_argument, "parent dims differ");
    if (p1.dim() < 2) throw Error(ErrorKind::invalid_argument, "single-point crossover needs dim >= 2");
    if (cut < 1 || cut >= p1.dim()) throw Error(ErrorKind::invalid_argument, "cut point out of range");
    const auto& a = p1.storage();
    const auto& b = p2.storage();
    std::vector<float> c1(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<float> c2(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(cut));
    c1.insert(c1.end(), b.begin() + static_cast<std::ptrdiff_t>(cut), b.end());
    c2.insert(c2.end(), a.begin() + static_cast<std::ptrdiff_t>(cut), a.end());
    return {EmbeddingVector(std::move(c1)), EmbeddingVector(std::move(c2))};
}

/// Draws a cut point uniformly from [1, dim - 1] and splices.
inline std::pair<EmbeddingVector, EmbeddingVector> crossover_single_point(const EmbeddingVector& p1,
                                                                          const EmbeddingVector& p2, Rng& rng) {
    if (p1.dim() != p2.dim()) throw Error(ErrorKind::invalid_argument, "parent dims differ");
    if (p1.dim() < 2) throw Error(ErrorKind::invalid_argument, "single-point crossover needs dim >= 2");
    const std::size_t cut = 1 + static_cast<std::size_t>(rng.uniform_index(p1.dim() - 1));
    return crossover_at(p1, p2, cut);
}

/// Number of genes touched per child: ceil(fraction * dim).
inline std::size_t mutated_gene_count(double fraction, std::size_t dim) {
    const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(dim)));
    return std::min(count, dim);
}

/// Adds an independent uniform draw from [-range, +range] to
/// ceil(fraction * dim) distinct, uniformly chosen genes.
inline EmbeddingVector mutate_random(const EmbeddingVector& child, const GAConfig& config, Rng& rng) {
    const std::size_t dim = child.dim();
    const std::size_t count = mutated_gene_count(config.mutation_fraction, dim);

    // Partial Fisher-Yates: the first `count` slots become the chosen genes.
    std::vector<std::size_t> positions(dim);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(dim - i));
        std::swap(positions[i], positions[j]);
    }

    std::vector<float> genes = child.storage();
    for (std::size_t i = 0; i < count; ++i) {
        const double delta = rng.uniform(-config.mutation_range, config.mutation_range);
        auto& g = genes[positions[i]];
        g = static_cast<float>(static_cast<double>(g) + delta);
    }
    return EmbeddingVector(std::move(genes));
}

/// One GA generation step: elites first, then children in pair order.
inline Population ga_next_generation(const Population& population, const std::vector<SimilarityScore>& fitnesses,
                                     const GAConfig& config, Rng& rng) {
    const auto pool = select_steady_state(fitnesses, config.mating_pool_size);
    const auto elites = select_steady_state(fitnesses, config.elitism_count);

    Population next;
    next.reserve(population.size());
    for (std::size_t e : elites) next.push_back(population[e]);

    // Pairs (0,1), (2,3), ... over the pool, wrapping around.
    std::size_t cursor = 0;
    while (next.size() < population.size()) {
        const auto& p1 = population[pool[cursor % pool.size()]];
        const auto& p2 = population[pool[(cursor + 1) % pool.size()]];
        cursor += 2;
        auto [c1, c2] = crossover_single_point(p1, p2, rng);
        next.push_back(mutate_random(c1, config, rng));
        if (next.size() < population.size()) next.push_back(mutate_random(c2, config, rng));
    }
    return next;
}

/// Runs the GA for `query` starting from the corpus embeddings.
/// Deterministic for a given config (seed included) regardless of
/// exec.threads.
inline RunTrace ga_run(const Corpus& corpus, const Query& query, const GAConfig& config,
                       const Execution& exec = {}) {
    require_searchable(corpus, query.embedding);
    config.validate(corpus.size());

    RunTrace trace;
    trace.algorithm = "ga";
    trace.seed = config.seed;
    trace.snapshots = SnapshotStore(config.retain_snapshots);
    Rng rng(config.seed);

    Population population = detail::initial_population(corpus);
    auto fitnesses = detail::evaluate(population, query.embedding, exec);
    detail::record_generation(trace, 0, population, fitnesses, config.record_fitnesses);

    StagnationTracker stagnation(config.stagnation_patience, config.stagnation_epsilon);
    for (std::size_t gen = 1; gen <= config.generations; ++gen) {
        population = ga_next_generation(population, fitnesses, config, rng);
        fitnesses = detail::evaluate(population, query.embedding, exec);
        const SimilarityScore previous = trace.records.back().champion_fitness;
        detail::record_generation(trace, gen, population, fitnesses, config.record_fitnesses);
        if (stagnation.update(previous, trace.records.back().champion_fitness)) {
            trace.stop_reason = StopReason::stagnation;
            break;
        }
    }

    trace.records.back().final = true;
    trace.final_population = std::move(population);
    trace.final_fitnesses = std::move(fitnesses);
    return trace;
}

} // namespace evoretrieve
