#pragma once

// Test-only generators and brute-force oracles. Nothing here calls the
// library code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <evoretrieve/core.hpp>

namespace evotest {

using evoretrieve::Corpus;
using evoretrieve::Document;
using evoretrieve::EmbeddingVector;
using evoretrieve::Query;

inline std::vector<float> random_values(std::mt19937_64& gen, std::size_t dim, float lo = -1.0f, float hi = 1.0f) {
    std::uniform_real_distribution<float> u(lo, hi);
    std::vector<float> v(dim);
    for (auto& x : v) x = u(gen);
    return v;
}

inline EmbeddingVector random_vector(std::mt19937_64& gen, std::size_t dim) {
    return EmbeddingVector(random_values(gen, dim));
}

inline std::string doc_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "d%05zu", i);
    return buf;
}

/// Random corpus with ids in shuffled order so id order != index order.
inline Corpus random_corpus(std::mt19937_64& gen, std::size_t count, std::size_t dim) {
    Corpus c;
    c.dim = dim;
    std::vector<std::size_t> ids(count);
    for (std::size_t i = 0; i < count; ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), gen);
    for (std::size_t i = 0; i < count; ++i) {
        c.docs.push_back({doc_id(ids[i]), "text of " + doc_id(ids[i]), random_vector(gen, dim)});
    }
    return c;
}

/// Corpus whose coordinates come from a tiny value set, so exact score ties
/// are common.
inline Corpus tie_heavy_corpus(std::mt19937_64& gen, std::size_t count, std::size_t dim) {
    Corpus c;
    c.dim = dim;
    std::uniform_int_distribution<int> pick(0, 2);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<float> v(dim);
        for (auto& x : v) x = 0.5f * static_cast<float>(pick(gen));
        c.docs.push_back({doc_id(count - 1 - i), "", EmbeddingVector(std::move(v))});
    }
    return c;
}

inline Query random_query(std::mt19937_64& gen, std::size_t dim, std::string id = "q") {
    return Query{std::move(id), "", random_vector(gen, dim)};
}

// --- oracles ----------------------------------------------------------------

/// Mean absolute difference with long double accumulation, written
/// independently of the library.
inline long double oracle_mad(const std::vector<float>& a, const std::vector<float>& b) {
    long double total = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
        total += d < 0 ? -d : d;
    }
    return total / static_cast<long double>(a.size());
}

/// Same quantity evaluated in double with the library's left-to-right
/// order, so it can be compared for exact equality.
inline double oracle_mad_double(const std::vector<float>& a, const std::vector<float>& b) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        total += d < 0 ? -d : d;
    }
    return total / static_cast<double>(a.size());
}

struct OracleEntry {
    std::string id;
    double score;
};

/// Full sort of every document by (score, id).
inline std::vector<OracleEntry> oracle_full_ranking(const std::vector<float>& query, const Corpus& corpus) {
    std::vector<OracleEntry> all;
    for (const auto& d : corpus.docs) all.push_back({d.id, oracle_mad_double(query, d.embedding.storage())});
    std::sort(all.begin(), all.end(), [](const OracleEntry& a, const OracleEntry& b) {
        return a.score < b.score || (a.score == b.score && a.id < b.id);
    });
    return all;
}

/// Argmin over all documents, ties to the smaller id.
inline OracleEntry oracle_nearest(const std::vector<float>& v, const Corpus& corpus) {
    OracleEntry best{"", INFINITY};
    for (const auto& d : corpus.docs) {
        double s = oracle_mad_double(v, d.embedding.storage());
        if (s < best.score || (s == best.score && d.id < best.id)) best = {d.id, s};
    }
    return best;
}

/// AP by explicit enumeration of every prefix: P@k computed from scratch for
/// each relevant rank k.
inline double oracle_average_precision(const std::vector<int>& rel, std::size_t total_relevant) {
    if (total_relevant == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 1; k <= rel.size(); ++k) {
        if (rel[k - 1] != 1) continue;
        std::size_t hits = 0;
        for (std::size_t j = 0; j < k; ++j) hits += rel[j] == 1;
        sum += static_cast<double>(hits) / static_cast<double>(k);
    }
    return sum / static_cast<double>(total_relevant);
}

/// Bitwise equality of two corpora (stricter than operator==: -0.0 != 0.0).
inline bool bit_identical(const Corpus& a, const Corpus& b) {
    if (a.dim != b.dim || a.docs.size() != b.docs.size()) return false;
    for (std::size_t i = 0; i < a.docs.size(); ++i) {
        const auto& x = a.docs[i];
        const auto& y = b.docs[i];
        if (x.id != y.id || x.text != y.text || x.embedding.dim() != y.embedding.dim()) return false;
        if (std::memcmp(x.embedding.storage().data(), y.embedding.storage().data(), x.embedding.dim() * sizeof(float)) !=
            0) {
            return false;
        }
    }
    return true;
}

} // namespace evotest
