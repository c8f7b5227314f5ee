#pragma once

/// @file similarity.hpp
/// @brief Mean absolute difference fitness and the exhaustive baseline ranker.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "parallel.hpp"

namespace evoretrieve {

/// Mean over coordinates of |a[i] - b[i]|, accumulated in double.
inline SimilarityScore manhattan_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::invalid_argument, "dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                                     std::to_string(b.size()));
    }
    if (a.empty()) throw Error(ErrorKind::invalid_argument, "similarity of zero-length vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    }
    return sum / static_cast<double>(a.size());
}

inline SimilarityScore manhattan_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    return manhattan_similarity(a.values(), b.values());
}

/// Ordering used by every similarity-ordered list: score ascending, then
/// document id ascending.
struct ScoreThenId {
    template <typename A, typename B>
    bool operator()(const A& x, const B& y) const {
        if (x.score != y.score) return x.score < y.score;
        return x.doc_id < y.doc_id;
    }
};

/// Scores every document against the query. The result is indexed like
/// corpus.docs and does not depend on the thread count.
inline std::vector<SimilarityScore> score_corpus(const EmbeddingVector& query, const Corpus& corpus,
                                                 const Execution& exec = {}) {
    require_searchable(corpus, query);
    std::vector<SimilarityScore> scores(corpus.size());
    parallel_for(corpus.size(), exec.threads,
                 [&](std::size_t i) { scores[i] = manhattan_similarity(query, corpus.docs[i].embedding); });
    return scores;
}

/// The min(n, |corpus|) documents closest to the query, ascending by score
/// with ties broken by ascending id.
inline ResultList rank_exhaustive(const Query& query, const Corpus& corpus, std::size_t n,
                                  const Execution& exec = {}) {
    if (n == 0) throw Error(ErrorKind::invalid_argument, "n must be positive");
    const auto scores = score_corpus(query.embedding, corpus, exec);

    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t keep = std::min(n, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] < scores[b];
                          return corpus.docs[a].id < corpus.docs[b].id;
                      });

    ResultList out;
    out.query_id = query.id;
    out.entries.reserve(keep);
    for (std::size_t r = 0; r < keep; ++r) {
        out.entries.push_back({corpus.docs[order[r]].id, scores[order[r]], r + 1});
    }
    return checked(std::move(out));
}

} // namespace evoretrieve
