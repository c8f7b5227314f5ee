#pragma once

/// @file pipeline.hpp
/// @brief End-to-end search, evaluation and comparison used by the CLI.
///
/// Results documents are byte-stable: identical inputs and seeds give
/// identical bytes whatever the thread count. Wall-clock timings are only
/// written when explicitly requested, and the comparison harness keeps them
/// in a separate file.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "assembly.hpp"
#include "core.hpp"
#include "corpus_io.hpp"
#include "de.hpp"
#include "ga.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "serialize.hpp"
#include "similarity.hpp"

namespace evoretrieve {

enum class Algorithm { baseline, ga, de };

inline const char* to_string(Algorithm a) noexcept {
    switch (a) {
    case Algorithm::baseline: return "baseline";
    case Algorithm::ga: return "ga";
    case Algorithm::de: return "de";
    }
    return "unknown";
}

inline Algorithm parse_algorithm(const std::string& name) {
    if (name == "baseline") return Algorithm::baseline;
    if (name == "ga") return Algorithm::ga;
    if (name == "de") return Algorithm::de;
    throw Error(ErrorKind::invalid_argument, "unknown algorithm '" + name + "'");
}

struct SearchRequest {
    Algorithm algorithm = Algorithm::baseline;
    std::size_t top_n = 10;
    std::size_t suboptimal = 2;
    std::uint64_t seed = 0;
    GAConfig ga;
    DEConfig de;
    bool include_timing = false;
};

struct SearchOutcome {
    HarvestedResults results; // baseline fills only `optimal`
    std::optional<ResultList> merged;
    std::optional<RunTrace> trace;
    std::map<std::string, double> timing_ms;
};

namespace detail {

class Stopwatch {
  public:
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string sanitize_for_path(const std::string& id) {
    std::string out;
    for (char c : id) {
        const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                          c == '_' || c == '.';
        out.push_back(safe ? c : '_');
    }
    return out.empty() || out == "." || out == ".." ? "_" + out : out;
}

/// Writes via a temporary sibling and rename so readers never see a
/// partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorKind::io, "write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace detail

/// Builds a query from {"id", "text"?, "embedding"?}. Without an
/// embedding the text is embedded with `recipe`, which must then exist.
inline Query query_from_json(const nlohmann::json& j, const std::optional<SynthRecipe>& recipe,
                             std::optional<std::size_t> line = std::nullopt) {
    try {
        Query q;
        q.id = j.at("id").get<std::string>();
        q.text = j.value("text", std::string());
        if (j.contains("embedding")) {
            std::vector<float> values;
            for (const auto& x : j.at("embedding")) values.push_back(static_cast<float>(x.get<double>()));
            q.embedding = EmbeddingVector(std::move(values));
        } else if (recipe) {
            q.embedding = synth_embed(q.text, recipe->dim, recipe->seed);
        } else {
            throw Error(ErrorKind::invalid_argument,
                        "query '" + q.id + "' has no embedding and the index has no synthetic-embedder recipe", line);
        }
        return q;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, e.what(), line);
    }
}

inline std::vector<Query> load_queries_jsonl(const std::filesystem::path& path,
                                             const std::optional<SynthRecipe>& recipe) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    std::vector<Query> queries;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::parse, e.what(), line_no);
        }
        auto q = query_from_json(j, recipe, line_no);
        if (!ids.insert(q.id).second) throw Error(ErrorKind::duplicate_id, "query id '" + q.id + "'", line_no);
        queries.push_back(std::move(q));
    }
    return queries;
}

inline SearchOutcome run_search(const Corpus& corpus, const Query& query, const SearchRequest& req,
                                const Execution& exec = {}) {
    if (req.top_n == 0) throw Error(ErrorKind::invalid_argument, "top-n must be positive");
    SearchOutcome out;
    detail::Stopwatch total;
    if (req.algorithm == Algorithm::baseline) {
        out.results.optimal = rank_exhaustive(query, corpus, req.top_n, exec);
        out.timing_ms["search"] = total.elapsed_ms();
        out.timing_ms["total"] = total.elapsed_ms();
        return out;
    }

    detail::Stopwatch evolve;
    if (req.algorithm == Algorithm::ga) {
        GAConfig c = req.ga;
        c.seed = req.seed;
        c.retain_snapshots = std::max(c.retain_snapshots, req.suboptimal + 1);
        out.trace = ga_run(corpus, query, c, exec);
    } else {
        DEConfig c = req.de;
        c.seed = req.seed;
        c.retain_snapshots = std::max(c.retain_snapshots, req.suboptimal + 1);
        out.trace = de_run(corpus, query, c, exec);
    }
    out.timing_ms["evolve"] = evolve.elapsed_ms();

    detail::Stopwatch harvest;
    out.results = harvest_resultsets(*out.trace, query, corpus, req.top_n, req.suboptimal, exec);
    std::vector<ResultList> all{out.results.optimal};
    all.insert(all.end(), out.results.suboptimal.begin(), out.results.suboptimal.end());
    out.merged = merge_resultsets(all, req.top_n);
    out.timing_ms["harvest"] = harvest.elapsed_ms();
    out.timing_ms["total"] = total.elapsed_ms();
    return out;
}

inline ojson request_config_json(const SearchRequest& req) {
    ojson j;
    j["top_n"] = req.top_n;
    switch (req.algorithm) {
    case Algorithm::baseline: j["similarity"] = "mean-absolute-difference"; break;
    case Algorithm::ga:
        j["suboptimal"] = req.suboptimal;
        j["ga"] = config_to_json(req.ga);
        break;
    case Algorithm::de:
        j["suboptimal"] = req.suboptimal;
        j["de"] = config_to_json(req.de);
        break;
    }
    return j;
}

/// The "evoretrieve-results/1" document for one query and one algorithm.
inline ojson results_document(const Corpus& corpus, const Query& query, const SearchRequest& req,
                              const SearchOutcome& outcome) {
    const TextLookup texts(corpus);
    ojson doc;
    doc["schema"] = kResultsSchema;
    doc["query"] = {{"id", query.id}, {"text", query.text}};
    doc["algorithm"] = to_string(req.algorithm);
    doc["config"] = request_config_json(req);
    doc["seed"] = req.seed;
    doc["index"] = {{"dim", corpus.dim}, {"count", corpus.size()}};

    ojson sets;
    auto with_source = [&](const ResultList& list, std::optional<std::size_t> gen) {
        ojson j = result_list_to_json(list, &texts);
        if (gen) j["source_generation"] = *gen;
        return j;
    };
    const auto& h = outcome.results;
    const bool evolved = outcome.trace.has_value();
    sets["optimal"] = with_source(h.optimal, evolved ? std::optional(h.source_generations.at(0)) : std::nullopt);
    if (evolved) {
        ojson subs = ojson::array();
        for (std::size_t k = 0; k < h.suboptimal.size(); ++k) {
            subs.push_back(with_source(h.suboptimal[k], h.source_generations.at(k + 1)));
        }
        sets["suboptimal"] = std::move(subs);
        sets["short_harvest"] = h.short_harvest;
        sets["merged"] = result_list_to_json(*outcome.merged, &texts);
    }
    doc["resultsets"] = std::move(sets);
    if (evolved) doc["trace"] = trace_summary_to_json(*outcome.trace);
    if (req.include_timing) doc["timing_ms"] = outcome.timing_ms;
    return doc;
}

/// Result lists of a results document keyed by kind: "optimal",
/// "suboptimal_1", "suboptimal_2", ..., "merged".
inline std::vector<std::pair<std::string, ResultList>> result_lists_by_kind(const nlohmann::json& doc) {
    if (doc.value("schema", std::string()) != kResultsSchema) {
        throw Error(ErrorKind::parse, "not an " + std::string(kResultsSchema) + " document");
    }
    std::vector<std::pair<std::string, ResultList>> out;
    const auto& sets = doc.at("resultsets");
    out.emplace_back("optimal", result_list_from_json(sets.at("optimal")));
    if (sets.contains("suboptimal")) {
        std::size_t k = 1;
        for (const auto& s : sets.at("suboptimal")) {
            out.emplace_back("suboptimal_" + std::to_string(k++), result_list_from_json(s));
        }
    }
    if (sets.contains("merged")) out.emplace_back("merged", result_list_from_json(sets.at("merged")));
    return out;
}

struct EvalOutcome {
    std::map<std::string, EvalReport> reports; // keyed by result-list kind
    std::vector<std::string> warnings;
};

/// Evaluates every result list of every document. Each kind gets its own
/// report; MAP averages over the queries that produced that kind.
inline EvalOutcome evaluate_documents(const std::vector<nlohmann::json>& docs, const RelevanceJudgments& qrels,
                                      const std::vector<std::size_t>& n_values) {
    std::map<std::string, std::vector<ResultList>> by_kind;
    std::set<std::string> seen_queries;
    for (const auto& d : docs) {
        for (auto& [kind, list] : result_lists_by_kind(d)) {
            seen_queries.insert(list.query_id);
            by_kind[kind].push_back(std::move(list));
        }
    }
    EvalOutcome out;
    for (const auto& qid : qrels.query_ids()) {
        if (!seen_queries.count(qid)) out.warnings.push_back("qrels query '" + qid + "' has no results; ignored");
    }
    for (const auto& qid : seen_queries) {
        if (qrels.relevant_count(qid) == 0) {
            out.warnings.push_back("query '" + qid + "' has no relevant documents in qrels; AP is 0");
        }
    }
    for (auto& [kind, lists] : by_kind) out.reports.emplace(kind, evaluate(lists, qrels, n_values));
    return out;
}

inline ojson eval_outcome_to_json(const EvalOutcome& outcome) {
    ojson j;
    j["schema"] = kEvalSchema;
    ojson reports;
    for (const auto& [kind, r] : outcome.reports) reports[kind] = eval_report_to_json(r);
    j["reports"] = std::move(reports);
    j["warnings"] = outcome.warnings;
    return j;
}

inline std::string eval_outcome_to_text(const EvalOutcome& outcome) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    for (const auto& [kind, r] : outcome.reports) {
        os << "[" << kind << "]\n";
        for (const auto& [qid, q] : r.per_query) {
            os << "  " << qid;
            for (const auto& [n, v] : q.p_at_n) os << "  P@" << n << "=" << v;
            os << "  AP=" << q.ap << (q.no_relevant ? "  (no relevant)" : "") << "\n";
        }
        os << "  MAP=" << r.map_value << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Comparison harness
// ---------------------------------------------------------------------------

struct CompareRequest {
    std::vector<Algorithm> algorithms{Algorithm::baseline, Algorithm::ga, Algorithm::de};
    std::size_t seeds = 1;
    std::uint64_t first_seed = 1;
    SearchRequest base; // algorithm and seed are overwritten per cell
    std::vector<std::size_t> n_values{1, 5, 10};
    std::filesystem::path out_dir;
};

struct CellFailure {
    std::string query_id;
    std::string algorithm;
    std::uint64_t seed;
    std::string message;
};

struct KindStats {
    std::vector<double> map_per_seed;
    double mean = 0.0, min = 0.0, max = 0.0;
};

struct CompareOutcome {
    // algorithm -> kind -> stats across seeds
    std::map<std::string, std::map<std::string, KindStats>> map_stats;
    std::map<std::string, double> mean_wall_ms;
    std::vector<CellFailure> failures;
    std::size_t documents_written = 0;
    bool has_qrels = false;
};

/// Runs every (query, algorithm, seed) cell. The baseline is deterministic,
/// so it runs once per query. Cells may execute concurrently; each writes
/// its own results document atomically. Failed cells are recorded and the
/// rest continue.
inline CompareOutcome run_compare(const Corpus& corpus, const std::vector<Query>& queries,
                                  const CompareRequest& req, const std::optional<RelevanceJudgments>& qrels,
                                  const Execution& exec = {}) {
    struct Cell {
        std::size_t query;
        Algorithm algorithm;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (Algorithm a : req.algorithms) {
            const std::size_t seeds = a == Algorithm::baseline ? 1 : req.seeds;
            for (std::size_t s = 0; s < seeds; ++s) cells.push_back({q, a, req.first_seed + s});
        }
    }

    struct CellResult {
        bool ok = false;
        std::string error;
        std::vector<std::pair<std::string, ResultList>> lists;
        double wall_ms = 0.0;
    };
    std::vector<CellResult> results(cells.size());
    std::filesystem::create_directories(req.out_dir);
    for (const auto& q : queries) std::filesystem::create_directories(req.out_dir / detail::sanitize_for_path(q.id));

    parallel_for(cells.size(), exec.threads, [&](std::size_t c) {
        const Cell& cell = cells[c];
        const Query& query = queries[cell.query];
        SearchRequest sr = req.base;
        sr.algorithm = cell.algorithm;
        sr.seed = cell.seed;
        try {
            detail::Stopwatch watch;
            const auto outcome = run_search(corpus, query, sr);
            results[c].wall_ms = watch.elapsed_ms();
            const auto doc = results_document(corpus, query, sr, outcome);
            const auto dir = req.out_dir / detail::sanitize_for_path(query.id);
            const auto name = std::string(to_string(cell.algorithm)) +
                              (cell.algorithm == Algorithm::baseline ? "" : "-seed" + std::to_string(cell.seed)) +
                              ".json";
            detail::write_file_atomic(dir / name, doc.dump(2) + "\n");
            results[c].lists = result_lists_by_kind(nlohmann::json::parse(doc.dump()));
            results[c].ok = true;
        } catch (const std::exception& e) {
            results[c].error = e.what();
        }
    });

    CompareOutcome out;
    out.has_qrels = qrels.has_value();
    std::map<std::string, std::pair<double, std::size_t>> wall;
    // algorithm -> seed -> kind -> lists
    std::map<std::string, std::map<std::uint64_t, std::map<std::string, std::vector<ResultList>>>> grouped;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::string algo = to_string(cells[c].algorithm);
        if (!results[c].ok) {
            out.failures.push_back({queries[cells[c].query].id, algo, cells[c].seed, results[c].error});
            continue;
        }
        ++out.documents_written;
        wall[algo].first += results[c].wall_ms;
        wall[algo].second += 1;
        for (auto& [kind, list] : results[c].lists) grouped[algo][cells[c].seed][kind].push_back(std::move(list));
    }
    for (const auto& [algo, w] : wall) out.mean_wall_ms[algo] = w.first / static_cast<double>(w.second);

    if (qrels) {
        for (const auto& [algo, by_seed] : grouped) {
            for (const auto& [seed, by_kind] : by_seed) {
                for (const auto& [kind, lists] : by_kind) {
                    out.map_stats[algo][kind].map_per_seed.push_back(evaluate(lists, *qrels, req.n_values).map_value);
                }
            }
            for (auto& [kind, stats] : out.map_stats[algo]) {
                const auto& v = stats.map_per_seed;
                stats.min = *std::min_element(v.begin(), v.end());
                stats.max = *std::max_element(v.begin(), v.end());
                stats.mean = mean_average_precision(v); // plain mean over seeds
            }
        }
    }
    return out;
}

/// Deterministic part of the comparison summary (no timings).
inline ojson compare_summary_json(const CompareOutcome& outcome, const CompareRequest& req) {
    ojson j;
    j["schema"] = "evoretrieve-compare/1";
    ojson algos = ojson::array();
    for (Algorithm a : req.algorithms) algos.push_back(to_string(a));
    j["algorithms"] = std::move(algos);
    j["seeds"] = req.seeds;
    j["first_seed"] = req.first_seed;
    j["documents_written"] = outcome.documents_written;
    ojson map = ojson::object();
    for (const auto& [algo, kinds] : outcome.map_stats) {
        for (const auto& [kind, s] : kinds) {
            map[algo][kind] = {{"mean", s.mean}, {"min", s.min}, {"max", s.max}, {"per_seed", s.map_per_seed}};
        }
    }
    j["map"] = std::move(map);
    ojson fails = ojson::array();
    for (const auto& f : outcome.failures) {
        fails.push_back({{"query_id", f.query_id}, {"algorithm", f.algorithm}, {"seed", f.seed}, {"error", f.message}});
    }
    j["failures"] = std::move(fails);
    return j;
}

inline std::string compare_summary_text(const CompareOutcome& outcome) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    if (outcome.has_qrels) {
        os << "algorithm  kind           MAP(mean)  MAP(min)  MAP(max)\n";
        for (const auto& [algo, kinds] : outcome.map_stats) {
            for (const auto& [kind, s] : kinds) {
                os << algo << std::string(11 - std::min<std::size_t>(algo.size(), 10), ' ') << kind
                   << std::string(15 - std::min<std::size_t>(kind.size(), 14), ' ') << s.mean << "     " << s.min
                   << "    " << s.max << "\n";
            }
        }
    }
    os.precision(2);
    for (const auto& [algo, ms] : outcome.mean_wall_ms) os << "mean wall-clock " << algo << ": " << ms << " ms\n";
    if (!outcome.failures.empty()) os << outcome.failures.size() << " cell(s) failed\n";
    return os.str();
}

} // namespace evoretrieve
