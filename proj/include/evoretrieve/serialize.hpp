#pragma once

/// @file serialize.hpp
/// @brief JSON forms of result lists, run traces and evaluation reports.
///
/// All writers use ordered_json so field order is fixed and output is
/// byte-stable for identical inputs.

#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "core.hpp"
#include "de.hpp"
#include "ga.hpp"
#include "metrics.hpp"
#include "trace.hpp"

namespace evoretrieve {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kResultsSchema = "evoretrieve-results/1";
inline constexpr const char* kTraceSchema = "evoretrieve-trace/1";
inline constexpr const char* kEvalSchema = "evoretrieve-eval/1";

inline const char* to_string(ListOrder order) noexcept {
    return order == ListOrder::by_score ? "score" : "consensus";
}

/// Id -> text lookup for annotating result entries.
class TextLookup {
  public:
    explicit TextLookup(const Corpus& corpus) : corpus_(&corpus) {
        for (std::size_t i = 0; i < corpus.size(); ++i) index_.emplace(corpus.docs[i].id, i);
    }
    const std::string& text(const std::string& id) const {
        static const std::string none;
        auto it = index_.find(id);
        return it == index_.end() ? none : corpus_->docs[it->second].text;
    }

  private:
    const Corpus* corpus_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline ojson result_list_to_json(const ResultList& list, const TextLookup* texts = nullptr) {
    ojson j;
    j["query_id"] = list.query_id;
    j["order"] = to_string(list.order);
    ojson entries = ojson::array();
    for (const auto& e : list.entries) {
        ojson entry;
        entry["rank"] = e.rank;
        entry["doc_id"] = e.doc_id;
        entry["score"] = e.score;
        if (texts) entry["text"] = texts->text(e.doc_id);
        entries.push_back(std::move(entry));
    }
    j["entries"] = std::move(entries);
    return j;
}

inline ResultList result_list_from_json(const nlohmann::json& j) {
    ResultList list;
    list.query_id = j.at("query_id").get<std::string>();
    const auto order = j.value("order", std::string("score"));
    if (order != "score" && order != "consensus") throw Error(ErrorKind::parse, "unknown list order '" + order + "'");
    list.order = order == "score" ? ListOrder::by_score : ListOrder::by_consensus;
    for (const auto& e : j.at("entries")) {
        list.entries.push_back({e.at("doc_id").get<std::string>(), e.at("score").get<double>(),
                                e.at("rank").get<std::size_t>()});
    }
    if (auto why = result_list_violation(list)) throw Error(ErrorKind::parse, "invalid result list: " + *why);
    return list;
}

inline ojson config_to_json(const GAConfig& c) {
    ojson j;
    j["mating_pool_size"] = c.mating_pool_size;
    j["elitism_count"] = c.elitism_count;
    j["crossover"] = "single-point";
    j["mutation"] = "random";
    j["mutation_fraction"] = c.mutation_fraction;
    j["mutation_range"] = c.mutation_range;
    j["generations"] = c.generations;
    j["stagnation_patience"] = c.stagnation_patience;
    j["stagnation_epsilon"] = c.stagnation_epsilon;
    return j;
}

inline ojson config_to_json(const DEConfig& c) {
    ojson j;
    j["scheme"] = "rand/1/bin";
    j["scaling_factor"] = c.scaling_factor;
    j["crossover_prob"] = c.crossover_prob;
    j["generations"] = c.generations;
    j["stagnation_patience"] = c.stagnation_patience;
    j["stagnation_epsilon"] = c.stagnation_epsilon;
    return j;
}

inline ojson vector_to_json(const EmbeddingVector& v) {
    ojson arr = ojson::array();
    for (float x : v.values()) arr.push_back(static_cast<double>(x));
    return arr;
}

/// Compact per-generation summary embedded in results documents.
inline ojson trace_summary_to_json(const RunTrace& trace) {
    ojson j;
    j["generations_run"] = trace.records.empty() ? 0 : trace.records.back().generation;
    j["stop_reason"] = to_string(trace.stop_reason);
    ojson fit = ojson::array();
    for (const auto& r : trace.records) fit.push_back(r.champion_fitness);
    j["champion_fitness"] = std::move(fit);
    return j;
}

/// Full trace including champion vectors and the final population fitnesses.
inline ojson trace_to_json(const RunTrace& trace, const ojson& config) {
    ojson j;
    j["schema"] = kTraceSchema;
    j["algorithm"] = trace.algorithm;
    j["seed"] = trace.seed;
    j["config"] = config;
    j["stop_reason"] = to_string(trace.stop_reason);
    ojson gens = ojson::array();
    for (const auto& r : trace.records) {
        ojson g;
        g["generation"] = r.generation;
        g["champion_fitness"] = r.champion_fitness;
        g["final"] = r.final;
        g["champion"] = vector_to_json(r.champion);
        gens.push_back(std::move(g));
    }
    j["generations"] = std::move(gens);
    j["final_population_size"] = trace.final_population.size();
    j["final_fitnesses"] = trace.final_fitnesses;
    return j;
}

inline ojson eval_report_to_json(const EvalReport& report) {
    ojson j;
    j["n_values"] = report.n_values;
    ojson per = ojson::object();
    for (const auto& [qid, q] : report.per_query) {
        ojson e;
        ojson p = ojson::object();
        for (const auto& [n, v] : q.p_at_n) p[std::to_string(n)] = v;
        e["p_at_n"] = std::move(p);
        e["ap"] = q.ap;
        e["no_relevant"] = q.no_relevant;
        per[qid] = std::move(e);
    }
    j["per_query"] = std::move(per);
    j["map"] = report.map_value;
    return j;
}

inline EvalReport eval_report_from_json(const nlohmann::json& j) {
    EvalReport report;
    report.n_values = j.at("n_values").get<std::vector<std::size_t>>();
    for (const auto& [qid, e] : j.at("per_query").items()) {
        QueryEval q;
        for (std::size_t n : report.n_values) q.p_at_n.emplace_back(n, e.at("p_at_n").at(std::to_string(n)).get<double>());
        q.ap = e.at("ap").get<double>();
        q.no_relevant = e.at("no_relevant").get<bool>();
        report.per_query.emplace(qid, std::move(q));
    }
    report.map_value = j.at("map").get<double>();
    return report;
}

} // namespace evoretrieve
