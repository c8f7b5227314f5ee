#pragma once

/// @file core.hpp
/// @brief Shared domain types for evolutionary document retrieval.
///
/// Everything here is a value type. A Corpus is allowed to hold malformed
/// documents so that validate_corpus() can report them as data; search
/// operations reject corpora they cannot work with.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evoretrieve {

enum class ErrorKind {
    invalid_argument,
    invalid_config,
    empty_corpus,
    dimension_mismatch,
    duplicate_id,
    parse,
    corrupt_index,
    io,
    internal,
};

inline const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::empty_corpus: return "empty-corpus";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::duplicate_id: return "duplicate-id";
    case ErrorKind::parse: return "parse";
    case ErrorKind::corrupt_index: return "corrupt-index";
    case ErrorKind::io: return "io";
    case ErrorKind::internal: return "internal";
    }
    return "unknown";
}

/// Single exception type for the library; `kind()` distinguishes the cause.
/// Errors tied to an input file carry the 1-based line number.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message, std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(format(kind, message, line)), kind_(kind), line_(line) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

  private:
    static std::string format(ErrorKind kind, const std::string& message, std::optional<std::size_t> line) {
        std::string out = to_string(kind);
        if (line) out += " (line " + std::to_string(*line) + ")";
        out += ": ";
        out += message;
        return out;
    }

    ErrorKind kind_;
    std::optional<std::size_t> line_;
};

/// Lower is better everywhere: a score is a mean absolute coordinate
/// difference, so 0 means identical vectors.
using SimilarityScore = double;

/// Fixed-length vector of finite 32-bit floats. Immutable once built.
class EmbeddingVector {
  public:
    EmbeddingVector() = default;

    explicit EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw Error(ErrorKind::invalid_argument,
                            "embedding coordinate " + std::to_string(i) + " is not finite");
            }
        }
    }

    EmbeddingVector(std::initializer_list<float> values) : EmbeddingVector(std::vector<float>(values)) {}

    static EmbeddingVector zeros(std::size_t dim) { return EmbeddingVector(std::vector<float>(dim, 0.0f)); }

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const float> values() const noexcept { return values_; }
    float operator[](std::size_t i) const noexcept { return values_[i]; }
    const std::vector<float>& storage() const noexcept { return values_; }

    /// Exact elementwise equality (the only equality the engines rely on).
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

  private:
    std::vector<float> values_;
};

struct Document {
    std::string id;
    std::string text;
    EmbeddingVector embedding;

    friend bool operator==(const Document&, const Document&) = default;
};

struct Corpus {
    std::size_t dim = 0;
    std::vector<Document> docs;

    bool empty() const noexcept { return docs.empty(); }
    std::size_t size() const noexcept { return docs.size(); }

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct Query {
    std::string id;
    std::string text;
    EmbeddingVector embedding;
};

/// How the entries of a ResultList are ordered. Similarity-ordered lists
/// have non-decreasing scores; consensus lists (rank aggregation output)
/// are ordered by aggregate vote and carry scores for display only.
enum class ListOrder { by_score, by_consensus };

struct ResultEntry {
    std::string doc_id;
    SimilarityScore score = 0.0;
    std::size_t rank = 0; // 1-based

    friend bool operator==(const ResultEntry&, const ResultEntry&) = default;
};

struct ResultList {
    std::string query_id;
    std::vector<ResultEntry> entries;
    ListOrder order = ListOrder::by_score;

    std::size_t size() const noexcept { return entries.size(); }

    friend bool operator==(const ResultList&, const ResultList&) = default;
};

/// Binary relevance judgments. Absent pairs are non-relevant.
class RelevanceJudgments {
  public:
    void set(const std::string& query_id, const std::string& doc_id, int rel) {
        if (rel != 0 && rel != 1) {
            throw Error(ErrorKind::invalid_argument, "relevance must be 0 or 1, got " + std::to_string(rel));
        }
        judgments_[query_id][doc_id] = rel;
    }

    int rel(const std::string& query_id, const std::string& doc_id) const {
        auto q = judgments_.find(query_id);
        if (q == judgments_.end()) return 0;
        auto d = q->second.find(doc_id);
        return d == q->second.end() ? 0 : d->second;
    }

    /// Total judged-relevant documents for a query, retrieved or not.
    std::size_t relevant_count(const std::string& query_id) const {
        auto q = judgments_.find(query_id);
        if (q == judgments_.end()) return 0;
        return static_cast<std::size_t>(
            std::count_if(q->second.begin(), q->second.end(), [](const auto& kv) { return kv.second == 1; }));
    }

    bool has_query(const std::string& query_id) const { return judgments_.count(query_id) != 0; }

    std::vector<std::string> query_ids() const {
        std::vector<std::string> ids;
        ids.reserve(judgments_.size());
        for (const auto& [id, _] : judgments_) ids.push_back(id);
        return ids;
    }

  private:
    std::map<std::string, std::map<std::string, int>> judgments_;
};

struct CorpusViolation {
    enum class Kind { duplicate_id, dimension_mismatch, non_positive_dim };
    Kind kind;
    std::string doc_id;
    std::string detail;
};

inline const char* to_string(CorpusViolation::Kind kind) noexcept {
    switch (kind) {
    case CorpusViolation::Kind::duplicate_id: return "duplicate-id";
    case CorpusViolation::Kind::dimension_mismatch: return "dimension-mismatch";
    case CorpusViolation::Kind::non_positive_dim: return "non-positive-dim";
    }
    return "unknown";
}

/// Reports every broken Corpus invariant. An empty result means the corpus
/// is well formed (emptiness itself is not a violation).
inline std::vector<CorpusViolation> validate_corpus(const Corpus& corpus) {
    std::vector<CorpusViolation> violations;
    if (corpus.dim == 0 && !corpus.docs.empty()) {
        violations.push_back({CorpusViolation::Kind::non_positive_dim, "", "corpus dim is 0"});
    }
    std::set<std::string_view> seen;
    for (const auto& doc : corpus.docs) {
        if (!seen.insert(doc.id).second) {
            violations.push_back({CorpusViolation::Kind::duplicate_id, doc.id, "id appears more than once"});
        }
        if (doc.embedding.dim() != corpus.dim) {
            violations.push_back({CorpusViolation::Kind::dimension_mismatch, doc.id,
                                  "embedding has " + std::to_string(doc.embedding.dim()) +
                                      " coordinates, corpus dim is " + std::to_string(corpus.dim)});
        }
    }
    return violations;
}

/// Throws the first violation as an Error; used by loaders.
inline void require_valid(const Corpus& corpus) {
    auto violations = validate_corpus(corpus);
    if (violations.empty()) return;
    const auto& v = violations.front();
    ErrorKind kind = v.kind == CorpusViolation::Kind::duplicate_id ? ErrorKind::duplicate_id
                                                                   : ErrorKind::dimension_mismatch;
    throw Error(kind, "document '" + v.doc_id + "': " + v.detail);
}

/// Preconditions shared by every search entry point.
inline void require_searchable(const Corpus& corpus, const EmbeddingVector& query) {
    if (corpus.empty()) throw Error(ErrorKind::empty_corpus, "corpus has no documents");
    if (query.dim() != corpus.dim) {
        throw Error(ErrorKind::invalid_argument, "query dim " + std::to_string(query.dim()) +
                                                     " does not match corpus dim " + std::to_string(corpus.dim));
    }
    for (const auto& doc : corpus.docs) {
        if (doc.embedding.dim() != corpus.dim) {
            throw Error(ErrorKind::dimension_mismatch, "document '" + doc.id + "' has wrong embedding dim");
        }
    }
}

/// Empty optional iff the list satisfies the ResultList invariants: ranks
/// 1..len, unique doc ids, and (for similarity-ordered lists) non-decreasing
/// scores.
inline std::optional<std::string> result_list_violation(const ResultList& list) {
    std::set<std::string_view> ids;
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
        const auto& e = list.entries[i];
        if (e.rank != i + 1) return "rank " + std::to_string(e.rank) + " at position " + std::to_string(i);
        if (!ids.insert(e.doc_id).second) return "duplicate doc id '" + e.doc_id + "'";
        if (list.order == ListOrder::by_score && i > 0 && e.score < list.entries[i - 1].score) {
            return "score decreases at rank " + std::to_string(e.rank);
        }
    }
    return std::nullopt;
}

/// Every public function returning a ResultList passes it through here.
inline ResultList checked(ResultList list) {
    if (auto why = result_list_violation(list)) {
        throw Error(ErrorKind::internal, "result list invariant broken: " + *why);
    }
    return list;
}

} // namespace evoretrieve
