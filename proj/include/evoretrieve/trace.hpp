#pragma once

/// @file trace.hpp
/// @brief Record of one evolutionary run, shared by the GA and DE engines.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"

namespace evoretrieve {

using Population = std::vector<EmbeddingVector>;

struct GenerationRecord {
    std::size_t generation = 0; // 0 is the initial population
    EmbeddingVector champion;
    SimilarityScore champion_fitness = 0.0;
    bool final = false;
    /// Fitness of every individual, indexed like the population. Empty when
    /// the run was configured not to record it.
    std::vector<SimilarityScore> fitnesses;
};

enum class StopReason { budget, stagnation };

inline const char* to_string(StopReason r) noexcept { return r == StopReason::budget ? "budget" : "stagnation"; }

/// Keeps the populations of the generations that first reached each of the
/// `capacity` lowest distinct champion fitness values. Capacity 0 keeps
/// every generation.
class SnapshotStore {
  public:
    explicit SnapshotStore(std::size_t capacity = 3) : capacity_(capacity) {}

    void offer(std::size_t generation, SimilarityScore champion_fitness, const Population& population) {
        if (capacity_ == 0) {
            by_generation_[generation] = population;
            return;
        }
        if (first_gen_by_value_.count(champion_fitness) != 0) return; // earliest generation wins
        if (first_gen_by_value_.size() == capacity_) {
            auto worst = std::prev(first_gen_by_value_.end());
            if (champion_fitness >= worst->first) return;
            by_generation_.erase(worst->second);
            first_gen_by_value_.erase(worst);
        }
        first_gen_by_value_.emplace(champion_fitness, generation);
        by_generation_[generation] = population;
    }

    const Population* find(std::size_t generation) const {
        auto it = by_generation_.find(generation);
        return it == by_generation_.end() ? nullptr : &it->second;
    }

    std::vector<std::size_t> generations() const {
        std::vector<std::size_t> out;
        for (const auto& [g, _] : by_generation_) out.push_back(g);
        return out;
    }

    std::size_t capacity() const noexcept { return capacity_; }

    /// Direct insertion, for building traces by hand.
    void put(std::size_t generation, Population population) { by_generation_[generation] = std::move(population); }

  private:
    std::size_t capacity_;
    std::map<SimilarityScore, std::size_t> first_gen_by_value_;
    std::map<std::size_t, Population> by_generation_;
};

struct RunTrace {
    std::string algorithm; // "ga" or "de"
    std::uint64_t seed = 0;
    std::vector<GenerationRecord> records;
    Population final_population;
    std::vector<SimilarityScore> final_fitnesses;
    SnapshotStore snapshots;
    StopReason stop_reason = StopReason::budget;

    std::vector<SimilarityScore> champion_fitnesses() const {
        std::vector<SimilarityScore> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(r.champion_fitness);
        return out;
    }
};

/// Index of the lowest fitness, ties to the lowest index.
inline std::size_t champion_index(const std::vector<SimilarityScore>& fitnesses) {
    return static_cast<std::size_t>(std::min_element(fitnesses.begin(), fitnesses.end()) - fitnesses.begin());
}

/// Generation-budget plus stagnation-window termination.
class StagnationTracker {
  public:
    StagnationTracker(std::size_t patience, double epsilon) : patience_(patience), epsilon_(epsilon) {}

    /// Returns true once `patience` consecutive generations improved the
    /// champion by less than epsilon.
    bool update(SimilarityScore previous, SimilarityScore current) {
        if (previous - current < epsilon_) {
            ++stalled_;
        } else {
            stalled_ = 0;
        }
        return stalled_ >= patience_;
    }

  private:
    std::size_t patience_;
    double epsilon_;
    std::size_t stalled_ = 0;
};

} // namespace evoretrieve
