#pragma once

/// @file metrics.hpp
/// @brief Precision at n, average precision and MAP over binary judgments.

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace evoretrieve {

/// Relevant entries among ranks 1..n, divided by n. Missing ranks (short
/// lists) count as non-relevant.
inline double precision_at_n(const ResultList& result, const RelevanceJudgments& qrels, std::size_t n) {
    if (n == 0) throw Error(ErrorKind::invalid_argument, "cutoff n must be positive");
    std::size_t hits = 0;
    for (const auto& e : result.entries) {
        if (e.rank <= n && qrels.rel(result.query_id, e.doc_id) == 1) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

/// Sum over retrieved ranks of P@rank * rel(rank), divided by the number of
/// judged-relevant documents for the query (retrieved or not). Zero when the
/// query has no relevant documents.
inline double average_precision(const ResultList& result, const RelevanceJudgments& qrels) {
    const std::size_t total_relevant = qrels.relevant_count(result.query_id);
    if (total_relevant == 0) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (const auto& e : result.entries) {
        if (qrels.rel(result.query_id, e.doc_id) != 1) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(e.rank);
    }
    return sum / static_cast<double>(total_relevant);
}

inline double mean_average_precision(const std::vector<double>& aps) {
    if (aps.empty()) throw Error(ErrorKind::invalid_argument, "MAP of zero queries");
    double sum = 0.0;
    for (double ap : aps) sum += ap;
    return sum / static_cast<double>(aps.size());
}

struct QueryEval {
    std::vector<std::pair<std::size_t, double>> p_at_n;
    double ap = 0.0;
    bool no_relevant = false; // AP forced to 0 because R == 0
};

struct EvalReport {
    std::vector<std::size_t> n_values;
    std::map<std::string, QueryEval> per_query;
    double map_value = 0.0;
};

/// Evaluates one list per query. Lists for the same query id are not
/// allowed.
inline EvalReport evaluate(const std::vector<ResultList>& results, const RelevanceJudgments& qrels,
                           const std::vector<std::size_t>& n_values) {
    EvalReport report;
    report.n_values = n_values;
    std::vector<double> aps;
    for (const auto& list : results) {
        QueryEval q;
        for (std::size_t n : n_values) q.p_at_n.emplace_back(n, precision_at_n(list, qrels, n));
        q.ap = average_precision(list, qrels);
        q.no_relevant = qrels.relevant_count(list.query_id) == 0;
        if (!report.per_query.emplace(list.query_id, std::move(q)).second) {
            throw Error(ErrorKind::invalid_argument, "two result lists for query '" + list.query_id + "'");
        }
        aps.push_back(report.per_query[list.query_id].ap);
    }
    if (!aps.empty()) report.map_value = mean_average_precision(aps);
    return report;
}

/// Reads `query_id<TAB>doc_id<TAB>rel` lines; '#' lines and blank lines are
/// skipped.
inline RelevanceJudgments parse_qrels(std::istream& in) {
    RelevanceJudgments qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) fields.push_back(field);
        if (fields.size() != 3) {
            throw Error(ErrorKind::parse, "expected 3 tab-separated fields, got " + std::to_string(fields.size()),
                        line_no);
        }
        if (fields[2] != "0" && fields[2] != "1") {
            throw Error(ErrorKind::parse, "relevance must be 0 or 1, got '" + fields[2] + "'", line_no);
        }
        qrels.set(fields[0], fields[1], fields[2] == "1" ? 1 : 0);
    }
    return qrels;
}

inline RelevanceJudgments load_qrels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open qrels file '" + path + "'");
    return parse_qrels(in);
}

} // namespace evoretrieve
