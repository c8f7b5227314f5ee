#pragma once

/// @file assembly.hpp
/// @brief Turns evolved populations into ranked document lists.
///
/// Evolved chromosomes are not documents. Each one is projected onto its
/// nearest corpus document, and the projected documents form the result
/// list. A run yields one optimal list (from the generation with the best
/// champion) and a few suboptimal lists (from generations with the next-best
/// distinct champion fitness values); these can be merged by positional
/// Borda count.

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "core.hpp"
#include "parallel.hpp"
#include "similarity.hpp"
#include "trace.hpp"

namespace evoretrieve {

struct Projection {
    std::size_t doc_index = 0;
    std::string doc_id;
    SimilarityScore score = 0.0;
};

/// Nearest corpus document to `v` (ties to the smaller id).
inline Projection project_to_document(const EmbeddingVector& v, const Corpus& corpus) {
    require_searchable(corpus, v);
    std::size_t best = 0;
    SimilarityScore best_score = manhattan_similarity(v, corpus.docs[0].embedding);
    for (std::size_t i = 1; i < corpus.size(); ++i) {
        const auto s = manhattan_similarity(v, corpus.docs[i].embedding);
        if (s < best_score || (s == best_score && corpus.docs[i].id < corpus.docs[best].id)) {
            best = i;
            best_score = s;
        }
    }
    return {best, corpus.docs[best].id, best_score};
}

/// Ranked documents for an evolved population.
///
/// Members are visited in ascending fitness to the query; members tied on
/// fitness are visited in ascending order of their projected document id.
/// Each member is projected and the first n distinct documents are kept.
/// Entries carry the document's own similarity to the query and are listed
/// ascending by that score (ties by id), so lists from every algorithm are
/// directly comparable. When the population is exactly the corpus this is
/// rank_exhaustive.
inline ResultList resultset_from_population(const Population& population, const Query& query, const Corpus& corpus,
                                            std::size_t n, const Execution& exec = {}) {
    if (population.empty()) throw Error(ErrorKind::invalid_argument, "population is empty");
    if (n == 0) throw Error(ErrorKind::invalid_argument, "n must be positive");
    require_searchable(corpus, query.embedding);

    std::vector<SimilarityScore> fitness(population.size());
    parallel_for(population.size(), exec.threads,
                 [&](std::size_t i) { fitness[i] = manhattan_similarity(population[i], query.embedding); });
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

    std::vector<ResultEntry> picked;
    std::unordered_set<std::string> seen;
    std::size_t group_begin = 0;
    while (group_begin < order.size() && picked.size() < n) {
        std::size_t group_end = group_begin + 1;
        while (group_end < order.size() && fitness[order[group_end]] == fitness[order[group_begin]]) ++group_end;

        std::vector<Projection> group(group_end - group_begin);
        parallel_for(group.size(), exec.threads, [&](std::size_t k) {
            group[k] = project_to_document(population[order[group_begin + k]], corpus);
        });
        std::stable_sort(group.begin(), group.end(),
                         [](const Projection& a, const Projection& b) { return a.doc_id < b.doc_id; });
        for (const auto& p : group) {
            if (picked.size() == n) break;
            if (!seen.insert(p.doc_id).second) continue;
            const auto& doc = corpus.docs[p.doc_index];
            picked.push_back({doc.id, manhattan_similarity(doc.embedding, query.embedding), 0});
        }
        group_begin = group_end;
    }

    std::sort(picked.begin(), picked.end(), ScoreThenId{});
    for (std::size_t r = 0; r < picked.size(); ++r) picked[r].rank = r + 1;
    return checked(ResultList{query.id, std::move(picked), ListOrder::by_score});
}

struct HarvestedResults {
    ResultList optimal;
    std::vector<ResultList> suboptimal;
    /// Optimal source first, then one per suboptimal list.
    std::vector<std::size_t> source_generations;
    /// Set when fewer than the requested suboptimal lists could be formed.
    bool short_harvest = false;
};

/// Earliest generation of each distinct champion fitness, best value first.
inline std::vector<std::pair<SimilarityScore, std::size_t>> distinct_champions(const RunTrace& trace) {
    std::map<SimilarityScore, std::size_t> first;
    for (const auto& rec : trace.records) first.emplace(rec.champion_fitness, rec.generation);
    return {first.begin(), first.end()};
}

/// Optimal list from the generation with the best champion (earliest on
/// ties) and up to `s` suboptimal lists from the generations first reaching
/// the next-best distinct champion fitness values.
inline HarvestedResults harvest_resultsets(const RunTrace& trace, const Query& query, const Corpus& corpus,
                                           std::size_t n, std::size_t s, const Execution& exec = {}) {
    if (trace.records.empty()) throw Error(ErrorKind::invalid_argument, "trace has no generations");
    const auto ranked = distinct_champions(trace);

    auto population_at = [&](std::size_t generation) -> const Population& {
        if (const Population* p = trace.snapshots.find(generation)) return *p;
        throw Error(ErrorKind::invalid_argument, "trace has no population snapshot for generation " +
                                                     std::to_string(generation) +
                                                     "; rerun with a larger snapshot retention");
    };

    HarvestedResults out;
    out.source_generations.push_back(ranked.front().second);
    out.optimal = resultset_from_population(population_at(ranked.front().second), query, corpus, n, exec);
    for (std::size_t k = 1; k < ranked.size() && out.suboptimal.size() < s; ++k) {
        out.source_generations.push_back(ranked[k].second);
        out.suboptimal.push_back(resultset_from_population(population_at(ranked[k].second), query, corpus, n, exec));
    }
    out.short_harvest = out.suboptimal.size() < s;
    return out;
}

/// Positional Borda merge. A document earns (n - rank + 1) from each list
/// where it appears at rank <= n. Output is ordered by total points
/// (descending), then best single-list score, then id, and truncated to n.
/// Each entry's score is the document's best score across the inputs.
inline ResultList merge_resultsets(const std::vector<ResultList>& lists, std::size_t n) {
    if (lists.empty()) throw Error(ErrorKind::invalid_argument, "nothing to merge");
    if (n == 0) throw Error(ErrorKind::invalid_argument, "n must be positive");
    const std::string& query_id = lists.front().query_id;
    for (const auto& l : lists) {
        if (l.query_id != query_id) {
            throw Error(ErrorKind::invalid_argument,
                        "cannot merge lists for queries '" + query_id + "' and '" + l.query_id + "'");
        }
    }

    struct Tally {
        std::size_t points = 0;
        SimilarityScore best_score = 0.0;
    };
    std::map<std::string, Tally> tally;
    for (const auto& l : lists) {
        for (const auto& e : l.entries) {
            auto [it, fresh] = tally.try_emplace(e.doc_id, Tally{0, e.score});
            if (!fresh) it->second.best_score = std::min(it->second.best_score, e.score);
            if (e.rank >= 1 && e.rank <= n) it->second.points += n - e.rank + 1;
        }
    }

    std::vector<std::pair<std::string, Tally>> ordered(tally.begin(), tally.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second.points != b.second.points) return a.second.points > b.second.points;
        if (a.second.best_score != b.second.best_score) return a.second.best_score < b.second.best_score;
        return a.first < b.first;
    });
    if (ordered.size() > n) ordered.resize(n);

    ResultList out{query_id, {}, ListOrder::by_consensus};
    out.entries.reserve(ordered.size());
    for (std::size_t r = 0; r < ordered.size(); ++r) {
        out.entries.push_back({ordered[r].first, ordered[r].second.best_score, r + 1});
    }
    return checked(std::move(out));
}

} // namespace evoretrieve
