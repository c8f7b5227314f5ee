#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include <evoretrieve/assembly.hpp>
#include <evoretrieve/de.hpp>
#include <evoretrieve/ga.hpp>

#include "support.hpp"

using namespace evoretrieve;

TEST(Projection, CorpusMemberProjectsToItself) {
    std::mt19937_64 gen(40);
    auto corpus = evotest::random_corpus(gen, 30, 8);
    const auto p = project_to_document(corpus.docs[3].embedding, corpus);
    EXPECT_EQ(p.doc_id, corpus.docs[3].id);
    EXPECT_EQ(p.score, 0.0);
}

TEST(Projection, MatchesArgminOracle) {
    std::mt19937_64 gen(41);
    auto corpus = evotest::random_corpus(gen, 100, 16);
    for (int trial = 0; trial < 100; ++trial) {
        auto v = evotest::random_vector(gen, 16);
        const auto p = project_to_document(v, corpus);
        const auto o = evotest::oracle_nearest(v.storage(), corpus);
        EXPECT_EQ(p.doc_id, o.id);
        EXPECT_EQ(p.score, o.score);
    }
}

TEST(Projection, TieGoesToSmallerId) {
    Corpus c;
    c.dim = 2;
    c.docs.push_back({"zeta", "", EmbeddingVector{1, 1}});
    c.docs.push_back({"alpha", "", EmbeddingVector{1, 1}});
    c.docs.push_back({"mid", "", EmbeddingVector{5, 5}});
    EXPECT_EQ(project_to_document(EmbeddingVector{1, 1}, c).doc_id, "alpha");
}

TEST(Projection, EmptyCorpusThrows) {
    Corpus c;
    c.dim = 2;
    try {
        project_to_document(EmbeddingVector{1, 1}, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::empty_corpus);
    }
}

namespace {

Population corpus_population(const Corpus& c) {
    Population p;
    for (const auto& d : c.docs) p.push_back(d.embedding);
    return p;
}

/// Reference pipeline: score, project, order by (fitness, projected id),
/// dedup, truncate, then list by the documents' own scores.
std::vector<evotest::OracleEntry> reference_resultset(const Population& pop, const Query& q, const Corpus& corpus,
                                                      std::size_t n) {
    struct Member {
        double fitness;
        std::string doc;
        double doc_score;
    };
    std::vector<Member> members;
    for (const auto& v : pop) {
        const auto nearest = evotest::oracle_nearest(v.storage(), corpus);
        const auto& doc = *std::find_if(corpus.docs.begin(), corpus.docs.end(),
                                        [&](const Document& d) { return d.id == nearest.id; });
        members.push_back({evotest::oracle_mad_double(v.storage(), q.embedding.storage()), nearest.id,
                           evotest::oracle_mad_double(doc.embedding.storage(), q.embedding.storage())});
    }
    std::stable_sort(members.begin(), members.end(), [](const Member& a, const Member& b) {
        return a.fitness < b.fitness || (a.fitness == b.fitness && a.doc < b.doc);
    });
    std::vector<evotest::OracleEntry> out;
    std::set<std::string> seen;
    for (const auto& m : members) {
        if (out.size() == n) break;
        if (seen.insert(m.doc).second) out.push_back({m.doc, m.doc_score});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.score < b.score || (a.score == b.score && a.id < b.id);
    });
    return out;
}

} // namespace

TEST(ResultsetFromPopulation, CorpusPopulationEqualsExhaustiveRanking) {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 6; ++trial) {
        auto corpus = trial % 2 ? evotest::random_corpus(gen, 200, 8) : evotest::tie_heavy_corpus(gen, 60, 3);
        auto q = evotest::random_query(gen, corpus.dim);
        // tie-heavy corpora may hold duplicate embeddings; those legitimately collapse under projection
        if (trial % 2 == 0) {
            std::set<std::vector<float>> distinct;
            Corpus dedup;
            dedup.dim = corpus.dim;
            for (auto& d : corpus.docs) {
                if (distinct.insert(d.embedding.storage()).second) dedup.docs.push_back(d);
            }
            corpus = dedup;
        }
        for (std::size_t n : {1u, 10u, 1000u}) {
            EXPECT_EQ(resultset_from_population(corpus_population(corpus), q, corpus, n),
                      rank_exhaustive(q, corpus, n));
        }
    }
}

TEST(ResultsetFromPopulation, DuplicateProjectionsCollapse) {
    Corpus c;
    c.dim = 2;
    c.docs.push_back({"d1", "", EmbeddingVector{0, 0}});
    c.docs.push_back({"d2", "", EmbeddingVector{10, 10}});
    Population pop{EmbeddingVector{0.1f, 0}, EmbeddingVector{0, 0.2f}, EmbeddingVector{0.3f, 0.3f},
                   EmbeddingVector{-0.1f, 0}, EmbeddingVector{0, 0}};
    const auto list = resultset_from_population(pop, Query{"q", "", EmbeddingVector{1, 1}}, c, 10);
    ASSERT_EQ(list.size(), 1u);
    EXPECT_EQ(list.entries[0].doc_id, "d1");
    EXPECT_EQ(list.entries[0].score, 1.0);
}

TEST(ResultsetFromPopulation, EvolvedPopulationMatchesReferencePipeline) {
    std::mt19937_64 gen(43);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto corpus = evotest::random_corpus(gen, 50, 16);
        auto q = evotest::random_query(gen, 16);
        DEConfig cfg;
        cfg.generations = 10;
        cfg.seed = seed;
        const auto trace = de_run(corpus, q, cfg);
        const auto list = resultset_from_population(trace.final_population, q, corpus, 10);
        const auto ref = reference_resultset(trace.final_population, q, corpus, 10);
        ASSERT_EQ(list.size(), ref.size());
        for (std::size_t r = 0; r < ref.size(); ++r) {
            EXPECT_EQ(list.entries[r].doc_id, ref[r].id);
            EXPECT_EQ(list.entries[r].score, ref[r].score);
        }
    }
}

namespace {

/// Hand-built trace whose generation g holds a population of one corpus
/// member, so each generation's resultset is recognisable.
RunTrace trace_with_champions(const std::vector<double>& champions, const Corpus& corpus) {
    RunTrace t;
    t.algorithm = "ga";
    t.snapshots = SnapshotStore(0);
    for (std::size_t g = 0; g < champions.size(); ++g) {
        GenerationRecord r;
        r.generation = g;
        r.champion = corpus.docs[g].embedding;
        r.champion_fitness = champions[g];
        r.final = g + 1 == champions.size();
        t.records.push_back(r);
        t.snapshots.put(g, Population{corpus.docs[g].embedding});
    }
    return t;
}

} // namespace

TEST(Harvest, HandOrderedDistinctFitnesses) {
    std::mt19937_64 gen(44);
    auto corpus = evotest::random_corpus(gen, 4, 4);
    const auto trace = trace_with_champions({0.5, 0.3, 0.3, 0.2}, corpus);
    const auto q = evotest::random_query(gen, 4);
    const auto h = harvest_resultsets(trace, q, corpus, 5, 2);
    EXPECT_EQ(h.source_generations, (std::vector<std::size_t>{3, 1, 0}));
    EXPECT_EQ(h.optimal.entries.at(0).doc_id, corpus.docs[3].id);
    ASSERT_EQ(h.suboptimal.size(), 2u);
    EXPECT_EQ(h.suboptimal[0].entries.at(0).doc_id, corpus.docs[1].id);
    EXPECT_EQ(h.suboptimal[1].entries.at(0).doc_id, corpus.docs[0].id);
    EXPECT_FALSE(h.short_harvest);
}

TEST(Harvest, FlatTraceGivesGenerationZeroAndShortFlag) {
    std::mt19937_64 gen(45);
    auto corpus = evotest::random_corpus(gen, 4, 4);
    const auto trace = trace_with_champions({0.4, 0.4, 0.4, 0.4}, corpus);
    const auto h = harvest_resultsets(trace, evotest::random_query(gen, 4), corpus, 5, 2);
    EXPECT_EQ(h.source_generations, (std::vector<std::size_t>{0}));
    EXPECT_TRUE(h.suboptimal.empty());
    EXPECT_TRUE(h.short_harvest);
}

TEST(Harvest, ZeroSuboptimalRequested) {
    std::mt19937_64 gen(46);
    auto corpus = evotest::random_corpus(gen, 4, 4);
    const auto trace = trace_with_champions({0.5, 0.3, 0.2, 0.1}, corpus);
    const auto h = harvest_resultsets(trace, evotest::random_query(gen, 4), corpus, 5, 0);
    EXPECT_TRUE(h.suboptimal.empty());
    EXPECT_FALSE(h.short_harvest);
}

TEST(Harvest, MissingSnapshotIsReported) {
    std::mt19937_64 gen(47);
    auto corpus = evotest::random_corpus(gen, 4, 4);
    auto trace = trace_with_champions({0.5, 0.3}, corpus);
    trace.snapshots = SnapshotStore(1);
    EXPECT_THROW(harvest_resultsets(trace, evotest::random_query(gen, 4), corpus, 5, 1), Error);
}

TEST(Harvest, RealRunsHaveStrictlyOrderedSources) {
    std::mt19937_64 gen(48);
    auto corpus = evotest::random_corpus(gen, 120, 8);
    auto q = evotest::random_query(gen, 8);
    GAConfig cfg;
    cfg.mating_pool_size = 30;
    cfg.generations = 20;
    cfg.seed = 3;
    const auto trace = ga_run(corpus, q, cfg);
    const auto h = harvest_resultsets(trace, q, corpus, 10, 2);
    auto fit = [&](std::size_t g) { return trace.records[g].champion_fitness; };
    for (std::size_t k = 1; k < h.source_generations.size(); ++k) {
        EXPECT_LT(fit(h.source_generations[k - 1]), fit(h.source_generations[k]));
    }
}

namespace {

ResultList list_of(const std::vector<std::pair<std::string, double>>& docs, std::string qid = "q") {
    ResultList l{std::move(qid), {}};
    for (std::size_t i = 0; i < docs.size(); ++i) l.entries.push_back({docs[i].first, docs[i].second, i + 1});
    return l;
}

std::vector<std::string> ids(const ResultList& l) {
    std::vector<std::string> out;
    for (const auto& e : l.entries) out.push_back(e.doc_id);
    return out;
}

} // namespace

TEST(Merge, SingleListIsTruncatedIdentity) {
    auto a = list_of({{"d1", 0.1}, {"d2", 0.2}, {"d3", 0.3}, {"d4", 0.4}});
    const auto m = merge_resultsets({a}, 3);
    ASSERT_EQ(m.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(m.entries[i], a.entries[i]);
}

TEST(Merge, TwoIdenticalListsGiveTheList) {
    auto a = list_of({{"d1", 0.1}, {"d2", 0.2}, {"d3", 0.3}});
    EXPECT_EQ(merge_resultsets({a, a}, 3).entries, a.entries);
}

TEST(Merge, HandBordaSums) {
    // A=[d1,d2,d3], B=[d2,d3,d4], n=3 -> d2=2+3=5, d1=3, d3=1+2=3, d4=1.
    // d1 and d3 tie on points; d1 has the better best score.
    auto a = list_of({{"d1", 0.10}, {"d2", 0.20}, {"d3", 0.30}});
    auto b = list_of({{"d2", 0.20}, {"d3", 0.30}, {"d4", 0.40}});
    const auto m = merge_resultsets({a, b}, 3);
    EXPECT_EQ(ids(m), (std::vector<std::string>{"d2", "d1", "d3"}));
    EXPECT_EQ(m.order, ListOrder::by_consensus);
    EXPECT_EQ(m.entries[0].score, 0.20);
}

TEST(Merge, PointTieFallsBackToIdWhenScoresEqual) {
    auto a = list_of({{"x", 0.5}, {"b", 0.6}});
    auto b = list_of({{"b", 0.6}, {"x", 0.5}});
    auto c = list_of({{"a", 0.6}, {"y", 0.7}});
    // b: 1+2=3, x: 2+1=3, a: 2, y: 1 -> x (better score) before b
    EXPECT_EQ(ids(merge_resultsets({a, b, c}, 2)), (std::vector<std::string>{"x", "b"}));
}

TEST(Merge, MixedQueriesRejected) {
    try {
        merge_resultsets({list_of({{"d1", 0.1}}, "q1"), list_of({{"d1", 0.1}}, "q2")}, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
    }
}

TEST(Merge, PermutationInvariant) {
    std::mt19937_64 gen(49);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ResultList> lists;
        for (int k = 0; k < 4; ++k) {
            std::vector<std::pair<std::string, double>> docs;
            std::set<std::string> used;
            std::uniform_int_distribution<int> pick(0, 14);
            std::uniform_int_distribution<int> score(0, 5);
            while (docs.size() < 6) {
                auto id = "d" + std::to_string(pick(gen));
                if (used.insert(id).second) docs.emplace_back(id, score(gen) / 10.0);
            }
            std::sort(docs.begin(), docs.end(), [](auto& x, auto& y) { return x.second < y.second; });
            lists.push_back(list_of(docs));
        }
        const auto reference = merge_resultsets(lists, 5);
        std::sort(lists.begin(), lists.end(), [](auto& x, auto& y) { return x.entries[0].doc_id < y.entries[0].doc_id; });
        do {
            ASSERT_EQ(merge_resultsets(lists, 5), reference);
        } while (std::next_permutation(lists.begin(), lists.end(), [](auto& x, auto& y) {
            return ids(x) < ids(y);
        }));
    }
}
