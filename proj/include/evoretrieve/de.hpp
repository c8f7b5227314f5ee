#pragma once

/// @file de.hpp
/// @brief DE/rand/1/bin differential evolution over a population of embeddings.
///
/// Generations are synchronous: every trial vector of generation t is built
/// from and compared against the population as it stood at the start of t.
///
/// Random draw order per individual i, in index order:
///   donors r1, r2, r3 (each redrawn until distinct from i and each other);
///   the forced crossover gene j_rand;
///   one uniform draw per gene, in gene order.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "core.hpp"
#include "parallel.hpp"
#include "population.hpp"
#include "random.hpp"
#include "similarity.hpp"
#include "trace.hpp"

namespace evoretrieve {

struct DEConfig {
    double scaling_factor = 0.5;  // beta
    double crossover_prob = 0.9;  // p_r
    std::size_t generations = 50;
    std::size_t stagnation_patience = 10;
    double stagnation_epsilon = 1e-9;
    std::uint64_t seed = 0;
    std::size_t retain_snapshots = 3;
    bool record_fitnesses = true;

    void validate(std::size_t population_size) const {
        auto fail = [](const std::string& why) { throw Error(ErrorKind::invalid_config, why); };
        if (population_size < 4) fail("differential evolution needs a population of at least 4");
        if (!(scaling_factor > 0.0 && scaling_factor <= 2.0)) fail("scaling factor must be in (0, 2]");
        if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) fail("crossover probability must be in [0, 1]");
        if (generations == 0) fail("generations must be positive");
        if (stagnation_patience == 0) fail("stagnation patience must be positive");
        if (!(stagnation_epsilon >= 0.0)) fail("stagnation epsilon must be >= 0");
    }
};

struct Donors {
    std::size_t r1, r2, r3;
};

/// Three indexes distinct from each other and from `target`.
inline Donors draw_donors(std::size_t population_size, std::size_t target, Rng& rng) {
    if (population_size < 4) throw Error(ErrorKind::invalid_argument, "need at least 4 individuals for rand/1");
    auto draw_excluding = [&](std::initializer_list<std::size_t> taken) {
        for (;;) {
            const auto r = static_cast<std::size_t>(rng.uniform_index(population_size));
            bool clash = false;
            for (std::size_t t : taken) clash = clash || r == t;
            if (!clash) return r;
        }
    };
    Donors d{};
    d.r1 = draw_excluding({target});
    d.r2 = draw_excluding({target, d.r1});
    d.r3 = draw_excluding({target, d.r1, d.r2});
    return d;
}

/// base + beta * (plus - minus), computed in double and stored as float.
inline EmbeddingVector de_difference(const EmbeddingVector& base, const EmbeddingVector& plus,
                                     const EmbeddingVector& minus, double beta) {
    if (base.dim() != plus.dim() || base.dim() != minus.dim()) {
        throw Error(ErrorKind::invalid_argument, "donor dims differ");
    }
    std::vector<float> out(base.dim());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double diff = static_cast<double>(plus[j]) - static_cast<double>(minus[j]);
        out[j] = static_cast<float>(static_cast<double>(base[j]) + beta * diff);
    }
    // EmbeddingVector rejects non-finite coordinates, so overflow surfaces here.
    return EmbeddingVector(std::move(out));
}

/// rand/1 mutant for individual i: x_r1 + beta * (x_r2 - x_r3).
inline EmbeddingVector de_mutant(const Population& population, std::size_t i, double beta, Rng& rng) {
    if (population.size() < 4) throw Error(ErrorKind::invalid_argument, "need at least 4 individuals for rand/1");
    if (i >= population.size()) throw Error(ErrorKind::invalid_argument, "target index out of range");
    const Donors d = draw_donors(population.size(), i, rng);
    return de_difference(population[d.r1], population[d.r2], population[d.r3], beta);
}

/// Binomial crossover: gene j comes from the mutant when its uniform draw is
/// below p_r or j is the forced gene, otherwise from the target.
inline EmbeddingVector de_crossover_binomial(const EmbeddingVector& target, const EmbeddingVector& mutant,
                                             double crossover_prob, Rng& rng) {
    if (target.dim() != mutant.dim()) throw Error(ErrorKind::invalid_argument, "target and mutant dims differ");
    if (target.dim() == 0) throw Error(ErrorKind::invalid_argument, "empty vectors");
    const auto forced = static_cast<std::size_t>(rng.uniform_index(target.dim()));
    std::vector<float> genes(target.dim());
    for (std::size_t j = 0; j < genes.size(); ++j) {
        const bool from_mutant = rng.uniform01() < crossover_prob || j == forced;
        genes[j] = from_mutant ? mutant[j] : target[j];
    }
    return EmbeddingVector(std::move(genes));
}

/// Greedy survivor rule: the offspring wins only on strict improvement.
inline bool offspring_survives(SimilarityScore target_fitness, SimilarityScore offspring_fitness) {
    return offspring_fitness < target_fitness;
}

inline const EmbeddingVector& de_select(const EmbeddingVector& target, const EmbeddingVector& offspring,
                                        const Query& query) {
    const auto target_fitness = manhattan_similarity(target, query.embedding);
    const auto offspring_fitness = manhattan_similarity(offspring, query.embedding);
    return offspring_survives(target_fitness, offspring_fitness) ? offspring : target;
}

/// Runs DE for `query` starting from the corpus embeddings. Deterministic
/// for a given config regardless of exec.threads.
inline RunTrace de_run(const Corpus& corpus, const Query& query, const DEConfig& config,
                       const Execution& exec = {}) {
    require_searchable(corpus, query.embedding);
    config.validate(corpus.size());

    RunTrace trace;
    trace.algorithm = "de";
    trace.seed = config.seed;
    trace.snapshots = SnapshotStore(config.retain_snapshots);
    Rng rng(config.seed);

    Population population = detail::initial_population(corpus);
    auto fitnesses = detail::evaluate(population, query.embedding, exec);
    detail::record_generation(trace, 0, population, fitnesses, config.record_fitnesses);

    StagnationTracker stagnation(config.stagnation_patience, config.stagnation_epsilon);
    for (std::size_t gen = 1; gen <= config.generations; ++gen) {
        Population trials;
        trials.reserve(population.size());
        for (std::size_t i = 0; i < population.size(); ++i) {
            auto mutant = de_mutant(population, i, config.scaling_factor, rng);
            trials.push_back(de_crossover_binomial(population[i], mutant, config.crossover_prob, rng));
        }
        const auto trial_fitnesses = detail::evaluate(trials, query.embedding, exec);
        for (std::size_t i = 0; i < population.size(); ++i) {
            if (offspring_survives(fitnesses[i], trial_fitnesses[i])) {
                population[i] = std::move(trials[i]);
                fitnesses[i] = trial_fitnesses[i];
            }
        }
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
