#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <evoretrieve/metrics.hpp>

#include "support.hpp"

using namespace evoretrieve;

namespace {

/// List d1..dk for query q; judgments mark d<i> relevant when rel[i-1] == 1,
/// plus `extra_relevant` relevant documents that were never retrieved.
struct Case {
    ResultList list;
    RelevanceJudgments qrels;
};

Case make_case(const std::vector<int>& rel, std::size_t extra_relevant = 0) {
    Case c;
    c.list.query_id = "q";
    for (std::size_t i = 0; i < rel.size(); ++i) {
        const auto id = "d" + std::to_string(i + 1);
        c.list.entries.push_back({id, static_cast<double>(i) / 10.0, i + 1});
        c.qrels.set("q", id, rel[i]);
    }
    for (std::size_t k = 0; k < extra_relevant; ++k) c.qrels.set("q", "missing" + std::to_string(k), 1);
    return c;
}

} // namespace

TEST(Metrics, HandAveragePrecision) {
    auto a = make_case({1, 0, 1});
    EXPECT_NEAR(average_precision(a.list, a.qrels), (1.0 + 2.0 / 3.0) / 2.0, 1e-12);

    auto b = make_case({1, 1, 0, 1, 0});
    EXPECT_NEAR(average_precision(b.list, b.qrels), (1.0 + 1.0 + 0.75) / 3.0, 1e-12);
}

TEST(Metrics, UnretrievedRelevantDocumentsLowerAp) {
    auto c = make_case({1, 0, 1}, 2);
    EXPECT_NEAR(average_precision(c.list, c.qrels), (1.0 + 2.0 / 3.0) / 4.0, 1e-12);
}

TEST(Metrics, HandPrecision) {
    auto c = make_case({1, 0, 1, 0, 1, 1, 1});
    EXPECT_DOUBLE_EQ(precision_at_n(c.list, c.qrels, 5), 0.6);
    EXPECT_DOUBLE_EQ(precision_at_n(c.list, c.qrels, 1), 1.0);
    // short list: missing ranks count as misses
    EXPECT_DOUBLE_EQ(precision_at_n(c.list, c.qrels, 10), 0.5);
    EXPECT_THROW(precision_at_n(c.list, c.qrels, 0), Error);
}

TEST(Metrics, HandMap) {
    EXPECT_DOUBLE_EQ(mean_average_precision({0.5, 1.0}), 0.75);
    EXPECT_THROW(mean_average_precision({}), Error);
}

TEST(Metrics, NoRelevantDocumentsGivesZeroAndFlag) {
    auto c = make_case({0, 0, 0});
    EXPECT_EQ(average_precision(c.list, c.qrels), 0.0);
    const auto report = evaluate({c.list}, c.qrels, {1, 3});
    EXPECT_TRUE(report.per_query.at("q").no_relevant);
    EXPECT_EQ(report.map_value, 0.0);
}

TEST(Metrics, CumulativeHitsNeverDecrease) {
    std::mt19937_64 gen(60);
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> rel(30);
        for (auto& r : rel) r = coin(gen);
        auto c = make_case(rel);
        double prev = 0.0;
        for (std::size_t n = 1; n <= 30; ++n) {
            const double hits = static_cast<double>(n) * precision_at_n(c.list, c.qrels, n);
            EXPECT_GE(hits + 1e-9, prev);
            prev = hits;
        }
    }
}

TEST(Metrics, AppendingNonRelevantNeverRaisesAp) {
    std::mt19937_64 gen(61);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> rel(10);
        for (auto& r : rel) r = coin(gen);
        auto before = make_case(rel, 1);
        rel.push_back(0);
        rel.push_back(0);
        auto after = make_case(rel, 1);
        EXPECT_LE(average_precision(after.list, after.qrels), average_precision(before.list, before.qrels) + 1e-15);
    }
}

TEST(Metrics, ApMatchesPrefixEnumerationOracle) {
    std::mt19937_64 gen(62);
    std::bernoulli_distribution coin(0.35);
    std::uniform_int_distribution<std::size_t> extra(0, 4);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<int> rel(1 + trial % 40);
        std::size_t relevant = 0;
        for (auto& r : rel) relevant += (r = coin(gen));
        const std::size_t more = extra(gen);
        auto c = make_case(rel, more);
        EXPECT_NEAR(average_precision(c.list, c.qrels), evotest::oracle_average_precision(rel, relevant + more), 1e-12);
    }
}

TEST(Metrics, EvaluateRejectsDuplicateQuery) {
    auto c = make_case({1});
    EXPECT_THROW(evaluate({c.list, c.list}, c.qrels, {1}), Error);
}

TEST(Qrels, ParsesCommentsBlankLinesAndCrlf) {
    std::istringstream in("# header\nq1\td1\t1\n\nq1\td2\t0\r\nq2\td9\t1\n");
    const auto qrels = parse_qrels(in);
    EXPECT_EQ(qrels.rel("q1", "d1"), 1);
    EXPECT_EQ(qrels.rel("q1", "d2"), 0);
    EXPECT_EQ(qrels.relevant_count("q1"), 1u);
    EXPECT_EQ(qrels.relevant_count("q2"), 1u);
    EXPECT_EQ(qrels.rel("q3", "d1"), 0);
}

TEST(Qrels, ErrorsCarryLineNumbers) {
    for (const auto& [text, line] : std::vector<std::pair<std::string, std::size_t>>{
             {"q1\td1\t1\nq1 d2 1\n", 2}, {"q1\td1\t2\n", 1}, {"\n\nq1\td1\t1\textra\n", 3}}) {
        std::istringstream in(text);
        try {
            parse_qrels(in);
            FAIL() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::parse);
            EXPECT_EQ(e.line(), line);
        }
    }
}
