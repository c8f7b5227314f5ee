#pragma once

// Helpers shared by the evolutionary engines.

#include <vector>

#include "core.hpp"
#include "parallel.hpp"
#include "similarity.hpp"
#include "trace.hpp"

namespace evoretrieve {

namespace detail {

inline std::vector<SimilarityScore> evaluate(const Population& population, const EmbeddingVector& target,
                                             const Execution& exec) {
    std::vector<SimilarityScore> fitness(population.size());
    parallel_for(population.size(), exec.threads,
                 [&](std::size_t i) { fitness[i] = manhattan_similarity(population[i], target); });
    return fitness;
}

inline Population initial_population(const Corpus& corpus) {
    Population population;
    population.reserve(corpus.size());
    for (const auto& doc : corpus.docs) population.push_back(doc.embedding);
    return population;
}

inline void record_generation(RunTrace& trace, std::size_t generation, const Population& population,
                              std::vector<SimilarityScore> fitnesses, bool keep_fitnesses) {
    const std::size_t best = champion_index(fitnesses);
    trace.snapshots.offer(generation, fitnesses[best], population);
    GenerationRecord rec;
    rec.generation = generation;
    rec.champion = population[best];
    rec.champion_fitness = fitnesses[best];
    if (keep_fitnesses) rec.fitnesses = std::move(fitnesses);
    trace.records.push_back(std::move(rec));
}

} // namespace detail

} // namespace evoretrieve
