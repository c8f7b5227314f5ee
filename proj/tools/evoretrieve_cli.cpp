// evoretrieve command-line entry point.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error.
// Diagnostics go to stderr; data goes to files or stdout.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include <evoretrieve/evoretrieve.hpp>

namespace er = evoretrieve;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct EngineFlags {
    std::size_t top_n = 10;
    std::size_t suboptimal = 2;
    std::uint64_t seed = 0;
    er::GAConfig ga;
    er::DEConfig de;
    std::size_t generations = 50;
    std::size_t patience = 10;
    double epsilon = 1e-9;
    std::size_t threads = 1;
    bool timing = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--top-n", top_n, "Documents per result list")->check(CLI::PositiveNumber);
        cmd->add_option("--suboptimal", suboptimal, "Suboptimal result lists to harvest (ga/de)");
        cmd->add_option("--beta", de.scaling_factor, "DE scaling factor")->capture_default_str();
        cmd->add_option("--cr", de.crossover_prob, "DE crossover probability")->capture_default_str();
        cmd->add_option("--mating-pool", ga.mating_pool_size, "GA mating pool size")->capture_default_str();
        cmd->add_option("--elitism", ga.elitism_count, "GA elites kept per generation")->capture_default_str();
        cmd->add_option("--mutation-fraction", ga.mutation_fraction, "GA fraction of genes mutated per child")
            ->capture_default_str();
        cmd->add_option("--mutation-range", ga.mutation_range, "GA half-width of uniform mutation")
            ->capture_default_str();
        cmd->add_option("--generations", generations, "Generation budget")->capture_default_str();
        cmd->add_option("--patience", patience, "Stop after this many stagnant generations")->capture_default_str();
        cmd->add_option("--epsilon", epsilon, "Minimum champion improvement that resets stagnation")
            ->capture_default_str();
        cmd->add_option("--threads", threads, "Worker threads (results do not depend on this)")
            ->check(CLI::PositiveNumber);
        cmd->add_flag("--timing", timing, "Include wall-clock timings in output");
    }

    er::SearchRequest request(er::Algorithm algo) const {
        er::SearchRequest r;
        r.algorithm = algo;
        r.top_n = top_n;
        r.suboptimal = suboptimal;
        r.seed = seed;
        r.ga = ga;
        r.de = de;
        r.ga.generations = r.de.generations = generations;
        r.ga.stagnation_patience = r.de.stagnation_patience = patience;
        r.ga.stagnation_epsilon = r.de.stagnation_epsilon = epsilon;
        r.include_timing = timing;
        return r;
    }
};

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw er::Error(er::ErrorKind::io, "cannot write '" + path + "'");
    out << content;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw er::Error(er::ErrorKind::io, "cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw er::Error(er::ErrorKind::parse, path + ": " + e.what());
    }
}

std::vector<std::size_t> parse_n_list(const std::string& spec) {
    std::vector<std::size_t> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || v == 0) throw CLI::ValidationError("--n", "bad cutoff '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError("--n", "no cutoffs given");
    return out;
}

std::vector<er::Algorithm> parse_algos(const std::string& spec) {
    std::vector<er::Algorithm> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(er::parse_algorithm(item));
        } catch (const er::Error& e) {
            throw CLI::ValidationError("--algos", e.what());
        }
    }
    if (out.empty()) throw CLI::ValidationError("--algos", "no algorithms given");
    return out;
}

// --- ingest ---------------------------------------------------------------

struct IngestArgs {
    std::string input, out;
    bool synth = false;
    std::size_t dim = 512;
    std::uint64_t seed = 0;
};

int cmd_ingest(const IngestArgs& a) {
    std::optional<er::SynthRecipe> recipe;
    if (a.synth) recipe = er::SynthRecipe{a.dim, a.seed};
    const auto corpus = er::load_corpus_jsonl(a.input, recipe);
    er::save_binary(corpus, a.out);
    const auto stale = er::recipe_path(a.out);
    if (recipe) {
        er::save_recipe(*recipe, a.out);
    } else if (std::filesystem::exists(stale)) {
        std::filesystem::remove(stale);
    }
    std::cout << "indexed " << corpus.size() << " documents, dim " << corpus.dim << "\n";
    return kExitOk;
}

// --- search ---------------------------------------------------------------

struct SearchArgs {
    std::string index, query_text, query_id = "query", query_file, algo = "baseline", out, trace_out;
    EngineFlags engine;
};

int cmd_search(const SearchArgs& a) {
    const auto corpus = er::load_binary(a.index);
    const auto recipe = er::load_recipe(a.index);
    er::Query query;
    if (!a.query_file.empty()) {
        query = er::query_from_json(read_json_file(a.query_file), recipe);
    } else {
        if (!recipe) {
            throw er::Error(er::ErrorKind::invalid_argument,
                            "--query-text needs an index built with --synth; use --query-file with an embedding");
        }
        query = er::Query{a.query_id, a.query_text, er::synth_embed(a.query_text, recipe->dim, recipe->seed)};
    }
    if (query.embedding.dim() != corpus.dim) {
        throw er::Error(er::ErrorKind::dimension_mismatch, "query dim " + std::to_string(query.embedding.dim()) +
                                                                 " does not match index dim " +
                                                                 std::to_string(corpus.dim));
    }

    auto req = a.engine.request(er::parse_algorithm(a.algo));
    const er::Execution exec{a.engine.threads};
    const auto outcome = er::run_search(corpus, query, req, exec);
    write_output(a.out, er::results_document(corpus, query, req, outcome).dump(2) + "\n");
    if (!a.trace_out.empty()) {
        if (!outcome.trace) throw er::Error(er::ErrorKind::invalid_argument, "--trace-out needs --algo ga or de");
        write_output(a.trace_out, er::trace_to_json(*outcome.trace, er::request_config_json(req)).dump(2) + "\n");
    }
    if (outcome.results.short_harvest) {
        std::cerr << "warning: only " << outcome.results.suboptimal.size()
                  << " distinct suboptimal generation(s) were available\n";
    }
    return kExitOk;
}

// --- eval -----------------------------------------------------------------

struct EvalArgs {
    std::vector<std::string> results;
    std::string qrels, n = "1,5,10", format = "text", out;
};

int cmd_eval(const EvalArgs& a) {
    const auto n_values = parse_n_list(a.n);
    const auto qrels = er::load_qrels(a.qrels);
    std::vector<nlohmann::json> docs;
    for (const auto& path : a.results) docs.push_back(read_json_file(path));
    const auto outcome = er::evaluate_documents(docs, qrels, n_values);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
    if (a.format == "json") {
        write_output(a.out, er::eval_outcome_to_json(outcome).dump(2) + "\n");
    } else {
        write_output(a.out, er::eval_outcome_to_text(outcome));
    }
    return kExitOk;
}

// --- compare --------------------------------------------------------------

struct CompareArgs {
    std::string index, queries, algos = "baseline,ga,de", qrels, out, n = "1,5,10";
    std::size_t seeds = 1;
    std::uint64_t first_seed = 1;
    EngineFlags engine;
};

int cmd_compare(const CompareArgs& a) {
    const auto corpus = er::load_binary(a.index);
    const auto recipe = er::load_recipe(a.index);
    const auto queries = er::load_queries_jsonl(a.queries, recipe);
    std::optional<er::RelevanceJudgments> qrels;
    if (!a.qrels.empty()) qrels = er::load_qrels(a.qrels);

    er::CompareRequest req;
    req.algorithms = parse_algos(a.algos);
    req.seeds = a.seeds;
    req.first_seed = a.first_seed;
    req.base = a.engine.request(er::Algorithm::baseline);
    req.base.include_timing = false;
    req.n_values = parse_n_list(a.n);
    req.out_dir = a.out;

    // Exhaustive-scan cost on this index, reported alongside the summary.
    double scan_ms = 0.0;
    if (!queries.empty()) {
        const auto start = std::chrono::steady_clock::now();
        (void)er::rank_exhaustive(queries.front(), corpus, req.base.top_n);
        scan_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }

    const auto outcome = er::run_compare(corpus, queries, req, qrels, er::Execution{a.engine.threads});
    const auto summary = er::compare_summary_json(outcome, req);
    er::detail::write_file_atomic(std::filesystem::path(a.out) / "summary.json", summary.dump(2) + "\n");

    er::ojson timing;
    timing["baseline_scan_ms"] = scan_ms;
    timing["index"] = {{"dim", corpus.dim}, {"count", corpus.size()}};
    timing["mean_wall_ms"] = outcome.mean_wall_ms;
    er::detail::write_file_atomic(std::filesystem::path(a.out) / "timing.json", timing.dump(2) + "\n");

    std::cout << er::compare_summary_text(outcome);
    std::cout << "baseline exhaustive scan (" << corpus.size() << " docs x dim " << corpus.dim
              << ", 1 thread): " << scan_ms << " ms\n";
    for (const auto& f : outcome.failures) {
        std::cerr << "error: query '" << f.query_id << "' " << f.algorithm << " seed " << f.seed << ": "
                  << f.message << "\n";
    }
    return outcome.failures.empty() ? kExitOk : kExitData;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolutionary top-N document retrieval over sentence embeddings"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Build a binary index from corpus JSONL");
    ingest_cmd->add_option("--input", ingest.input, "Corpus JSONL")->required();
    ingest_cmd->add_option("--out", ingest.out, "Binary index to write")->required();
    ingest_cmd->add_flag("--synth", ingest.synth, "Embed text with the synthetic embedder");
    ingest_cmd->add_option("--dim", ingest.dim, "Synthetic embedding dimension")->check(CLI::PositiveNumber);
    ingest_cmd->add_option("--seed", ingest.seed, "Synthetic embedder seed");

    SearchArgs search;
    auto* search_cmd = app.add_subcommand("search", "Retrieve the top-N documents for one query");
    search_cmd->add_option("--index", search.index, "Binary index")->required();
    auto* qt = search_cmd->add_option("--query-text", search.query_text, "Query text (synthetic indexes only)");
    auto* qf = search_cmd->add_option("--query-file", search.query_file, "Query JSON {id, text, embedding}");
    qt->excludes(qf);
    search_cmd->add_option("--query-id", search.query_id, "Id used with --query-text");
    search_cmd->add_option("--algo", search.algo, "baseline, ga or de")
        ->check(CLI::IsMember({"baseline", "ga", "de"}));
    search_cmd->add_option("--seed", search.engine.seed, "Random seed");
    search_cmd->add_option("--out", search.out, "Results JSON (default stdout)");
    search_cmd->add_option("--trace-out", search.trace_out, "Write the full run trace JSON here");
    search.engine.attach(search_cmd);

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "P@n, AP and MAP of results documents");
    eval_cmd->add_option("--results", eval.results, "Results JSON (repeatable)")->required();
    eval_cmd->add_option("--qrels", eval.qrels, "Relevance judgments TSV")->required();
    eval_cmd->add_option("--n", eval.n, "Comma-separated cutoffs")->capture_default_str();
    eval_cmd->add_option("--format", eval.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    eval_cmd->add_option("--out", eval.out, "Write report here (default stdout)");

    CompareArgs compare;
    auto* compare_cmd = app.add_subcommand("compare", "Run algorithms over many queries and seeds");
    compare_cmd->add_option("--index", compare.index, "Binary index")->required();
    compare_cmd->add_option("--queries", compare.queries, "Queries JSONL")->required();
    compare_cmd->add_option("--algos", compare.algos, "Comma-separated algorithms")->capture_default_str();
    compare_cmd->add_option("--qrels", compare.qrels, "Relevance judgments TSV");
    compare_cmd->add_option("--seeds", compare.seeds, "Seeds per evolutionary algorithm")->check(CLI::PositiveNumber);
    compare_cmd->add_option("--first-seed", compare.first_seed, "First seed; later seeds count up");
    compare_cmd->add_option("--n", compare.n, "Comma-separated cutoffs")->capture_default_str();
    compare_cmd->add_option("--out", compare.out, "Output directory")->required();
    compare.engine.attach(compare_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ingest_cmd) return cmd_ingest(ingest);
        if (*search_cmd) {
            if (search.query_text.empty() && search.query_file.empty()) {
                std::cerr << "error: one of --query-text or --query-file is required\n";
                return kExitUsage;
            }
            return cmd_search(search);
        }
        if (*eval_cmd) return cmd_eval(eval);
        if (*compare_cmd) return cmd_compare(compare);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const er::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == er::ErrorKind::internal ? kExitInternal : kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
