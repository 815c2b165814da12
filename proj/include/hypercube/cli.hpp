#pragma once

#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypercube/bench.hpp"
#include "hypercube/builder.hpp"
#include "hypercube/config.hpp"
#include "hypercube/eval.hpp"
#include "hypercube/index.hpp"
#include "hypercube/metrics.hpp"
#include "hypercube/ranking.hpp"
#include "hypercube/report.hpp"
#include "hypercube/retrieval.hpp"

namespace hypercube {

/// Stands in when no chat backend is configured; callers that can degrade
/// (summarization, consolidation) treat the failure as "unresolved".
class NullChatBackend : public ChatBackend {
public:
    std::string chat(const std::string&, const std::string&, double) override {
        throw BackendError("no chat backend configured");
    }
};

struct AppContext {
    AppConfig config;
    std::shared_ptr<ChatBackend> chat;  // null for the gazetteer backend
    std::shared_ptr<LlmClient> llm;     // always set; NullChatBackend when no chat
    std::shared_ptr<CachingEmbedder> embedder;
    std::shared_ptr<Gazetteer> gazetteer;  // set for the gazetteer backend
};

// The HTTP-backed context pieces live behind a factory hook so that builds
// without http_backend.hpp can still link the CLI; the tool registers the
// real factory in its main.
using HttpFactory = std::function<std::shared_ptr<ChatBackend>(const AppConfig&)>;

inline AppContext make_context(AppConfig config, const HttpFactory& http_factory = {}) {
    config.validate_paths();
    AppContext ctx;
    ctx.config = std::move(config);

    switch (ctx.config.backend) {
        case BackendKind::gazetteer:
            ctx.gazetteer = std::make_shared<Gazetteer>(Gazetteer::load(ctx.config.gazetteer_path));
            break;
        case BackendKind::scripted:
            ctx.chat = ScriptedChatBackend::from_file(ctx.config.scripted_path);
            break;
        case BackendKind::llm:
            if (!http_factory)
                throw UsageError("llm backend is not available in this build");
            ctx.chat = http_factory(ctx.config);
            break;
    }

    PromptSet prompts = ctx.config.prompts_path.empty()
                            ? PromptSet::defaults()
                            : PromptSet::load(ctx.config.prompts_path);
    std::shared_ptr<ChatBackend> chat_for_client =
        ctx.chat ? ctx.chat : std::make_shared<NullChatBackend>();
    LlmOptions llm_options = ctx.config.llm;
    if (ctx.config.backend == BackendKind::scripted)
        llm_options.retry_base_ms = 0;  // scripted failures never heal with time
    ctx.llm = std::make_shared<LlmClient>(chat_for_client, std::move(prompts), llm_options);

    ctx.embedder = std::make_shared<CachingEmbedder>(std::make_shared<TrigramEmbedder>());
    return ctx;
}

inline std::unique_ptr<ExtractionBackend> make_extraction_backend(const AppContext& ctx) {
    if (ctx.config.backend == BackendKind::gazetteer)
        return std::make_unique<GazetteerBackend>(*ctx.gazetteer);
    return std::make_unique<LlmExtractionBackend>(ctx.llm);
}

// ---------------------------------------------------------------------------
// Shared pieces

inline std::vector<DimensionSchema> load_schema_file(const fs::path& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::exception& e) {
        throw DataError("invalid schema file " + path.string() + ": " + e.what());
    }
    std::vector<DimensionSchema> dims;
    const Json& arr = j.is_array() ? j : j.at("dimensions");
    for (const auto& d : arr) dims.push_back(DimensionSchema::from_json(d));
    if (dims.empty()) throw DataError("schema file has no dimensions: " + path.string());
    return dims;
}

inline std::vector<QueryComponent> load_components_file(const fs::path& path,
                                                        const HypercubeIndex& index) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::exception& e) {
        throw DataError("invalid components file " + path.string() + ": " + e.what());
    }
    std::vector<QueryComponent> components;
    for (const auto& item : j) {
        std::string dim = normalize_text(item.at("dimension").get<std::string>());
        auto content = normalize_label(item.at("content").get<std::string>());
        if (!content) continue;
        if (!index.has_dimension(dim))
            throw DataError("components file references unknown dimension '" + dim + "'");
        components.push_back({dim, *content});
    }
    if (components.empty()) throw DataError("components file yielded no components");
    return components;
}

/// Decomposition policy: chat-capable backends use the LLM route and fall
/// back to vocabulary matching when the backend fails; the gazetteer backend
/// goes straight to vocabulary matching.
inline std::vector<QueryComponent> decompose_for_query(const AppContext& ctx,
                                                       const HypercubeIndex& index,
                                                       const std::string& query,
                                                       std::ostream& err) {
    if (ctx.chat) {
        try {
            DecomposeResult r = decompose_query(query, index.dimensions(), *ctx.llm);
            for (const auto& w : r.warnings) err << "warning: " << w << "\n";
            return r.components;
        } catch (const BackendError& e) {
            err << "warning: " << e.what() << "; falling back to vocabulary matching\n";
        }
    }
    return fallback_decompose(query, index);
}

inline std::string format_documents_block(const HypercubeIndex& index,
                                          const std::vector<std::string>& doc_ids) {
    std::string block;
    for (const auto& id : doc_ids) {
        block += "[doc " + id + "]\n";
        block += index.doc(id).text;
        block += "\n\n";
    }
    return block;
}

// ---------------------------------------------------------------------------
// Commands. Each prints its primary artifact to `out` and diagnostics to
// `err`; tests drive them directly.

struct BuildOptions {
    fs::path corpus_path;
    fs::path schema_path;  // mutually exclusive with discover
    bool discover = false;
    size_t k = 10;
    size_t summary_sample_size = 30;
    fs::path out_dir;
    double max_failure_fraction = 0.05;
};

inline IndexBuildResult cmd_build(const AppContext& ctx, const BuildOptions& options,
                                  std::ostream& out, std::ostream& err) {
    if (options.corpus_path.empty() || !fs::exists(options.corpus_path))
        throw UsageError("build: corpus path missing or does not exist: " +
                         options.corpus_path.string());
    if (options.schema_path.empty() == !options.discover)
        throw UsageError("build: pass exactly one of --dimensions or --discover");

    std::vector<CorpusDoc> corpus = load_corpus_jsonl(options.corpus_path);
    auto backend = make_extraction_backend(ctx);

    std::vector<DimensionSchema> dimensions;
    if (!options.schema_path.empty()) {
        dimensions = load_schema_file(options.schema_path);
    } else {
        // Discovery pipeline; intermediates land beside the index directory
        // and are reused when present, making the pipeline resumable.
        fs::path artifacts = options.out_dir;
        artifacts += ".artifacts";
        fs::create_directories(artifacts);

        EntityPool pool;
        fs::path pool_file = artifacts / "entity_pool.json";
        if (fs::exists(pool_file)) {
            pool = EntityPool::from_json(Json::parse(read_file(pool_file)));
            err << "resume: loaded entity pool (" << pool.entities.size() << " entities)\n";
        } else {
            pool = build_entity_pool(corpus, *backend);
            write_file_atomic(pool_file, pool.to_json().dump(2) + "\n");
        }
        if (!pool.failed_doc_ids.empty())
            err << "warning: entity extraction failed for " << pool.failed_doc_ids.size()
                << " docs\n";

        std::vector<DimensionCandidate> candidates;
        fs::path candidates_file = artifacts / "candidates.json";
        if (fs::exists(candidates_file)) {
            for (const auto& j : Json::parse(read_file(candidates_file)))
                candidates.push_back(DimensionCandidate::from_json(j));
            err << "resume: loaded " << candidates.size() << " dimension candidates\n";
        } else {
            size_t k = std::min(options.k, pool.entities.size());
            if (k == 0) throw DataError("discovery: entity pool is empty");
            EntityClusters clustered = cluster_entities(pool, *ctx.embedder, k, ctx.config.seed);
            write_file_atomic(artifacts / "clusters.json", clustered.to_json().dump(2) + "\n");

            candidates = summarize_clusters(clustered, options.summary_sample_size, *ctx.llm,
                                            *ctx.embedder);
            Json cand_json = Json::array();
            for (const auto& c : candidates) cand_json.push_back(c.to_json());
            write_file_atomic(candidates_file, cand_json.dump(2) + "\n");
        }

        ConsolidationResult consolidated = consolidate_dimensions(candidates, *ctx.llm);
        if (consolidated.fallback_used)
            err << "warning: consolidation fell back to one dimension per cluster\n";
        dimensions = std::move(consolidated.dimensions);
    }

    IndexBuildOptions build_options;
    build_options.max_failure_fraction = options.max_failure_fraction;
    IndexBuildResult result = index_corpus(corpus, dimensions, *backend, build_options);
    result.index.save(options.out_dir);

    Json report = result.report.to_json();
    report["index_dir"] = options.out_dir.string();
    out << report.dump(2) << "\n";
    return result;
}

struct QueryOptions {
    fs::path index_dir;
    std::string query;
    fs::path components_path;
    RetrievalConfig retrieval;
    std::string format = "json";  // json | table
};

struct RetrieveOutcome {
    std::vector<QueryComponent> components;
    RankedList ranked;
    std::vector<ExplanationRecord> explanations;
    Json report;
};

inline RetrieveOutcome run_retrieve(const AppContext& ctx, const HypercubeIndex& index,
                                    const QueryOptions& options, std::ostream& err) {
    RetrieveOutcome outcome;
    if (!options.components_path.empty())
        outcome.components = load_components_file(options.components_path, index);
    else
        outcome.components = decompose_for_query(ctx, index, options.query, err);
    if (outcome.components.empty()) throw DataError("no components");

    std::vector<MatchResult> matches =
        retrieve(outcome.components, index, options.retrieval, *ctx.embedder);
    outcome.ranked = rank(matches, outcome.components.size(), options.retrieval.top_k);

    std::map<std::string, const MatchResult*> by_id;
    for (const auto& m : matches) by_id[m.doc_id] = &m;
    for (const auto& e : outcome.ranked.entries)
        outcome.explanations.push_back(explain(*by_id.at(e.doc_id), index, outcome.components));

    outcome.report = make_retrieval_report(options.query, outcome.components, outcome.ranked,
                                           outcome.explanations);
    return outcome;
}

inline RetrieveOutcome cmd_retrieve(const AppContext& ctx, const QueryOptions& options,
                                    std::ostream& out, std::ostream& err) {
    HypercubeIndex index = HypercubeIndex::load(options.index_dir);
    RetrieveOutcome outcome = run_retrieve(ctx, index, options, err);
    if (options.format == "table")
        out << render_explanation_table(index, outcome.ranked, outcome.explanations);
    else
        out << outcome.report.dump(2) << "\n";
    return outcome;
}

struct AnswerOutcome {
    std::string answer;
    bool no_support = false;
    Json report;
};

inline AnswerOutcome cmd_answer(const AppContext& ctx, const QueryOptions& options,
                                std::ostream& out, std::ostream& err) {
    if (!ctx.chat)
        throw UsageError("answer requires a chat-capable backend (scripted or llm)");
    HypercubeIndex index = HypercubeIndex::load(options.index_dir);
    RetrieveOutcome retrieved = run_retrieve(ctx, index, options, err);

    AnswerOutcome outcome;
    std::vector<std::string> doc_ids;
    for (const auto& e : retrieved.ranked.entries) doc_ids.push_back(e.doc_id);

    if (doc_ids.empty()) {
        outcome.no_support = true;
        outcome.answer = "";
        outcome.report = Json{{"query", options.query},
                              {"answer", nullptr},
                              {"no_support", true},
                              {"marker", "no supporting documents"}};
        out << outcome.report.dump(2) << "\n";
        return outcome;
    }

    outcome.answer = ctx.llm->chat(
        "answer",
        {{"question", options.query}, {"documents", format_documents_block(index, doc_ids)}});
    outcome.report = Json{{"query", options.query},
                          {"answer", outcome.answer},
                          {"no_support", false},
                          {"provenance", retrieved.report}};
    out << outcome.report.dump(2) << "\n";
    return outcome;
}

struct EvalOptions {
    fs::path index_dir;
    fs::path qa_path;
    RetrievalConfig retrieval;
    bool judge = false;
    std::string format = "table";  // table | json
    fs::path out_path;             // optional JSON report file
};

inline EvalHooks make_eval_hooks(const AppContext& ctx, const HypercubeIndex& index,
                                 const EvalOptions& options, std::ostream& err) {
    EvalHooks hooks;
    hooks.decompose = [&ctx, &index, &err](const std::string& q) {
        return decompose_for_query(ctx, index, q, err);
    };
    if (ctx.chat) {
        hooks.answer = [&ctx, &index](const std::string& q, const std::vector<std::string>& ids) {
            if (ids.empty()) return std::string();
            return ctx.llm->chat(
                "answer", {{"question", q}, {"documents", format_documents_block(index, ids)}});
        };
        if (options.judge) {
            hooks.judge = [&ctx](const std::string& q, const std::string& gold,
                                 const std::string& pred) {
                return llm_judge(q, gold, pred, *ctx.llm);
            };
        }
    } else if (options.judge) {
        err << "warning: --judge needs a chat-capable backend; judging skipped\n";
    }
    return hooks;
}

inline MetricReport cmd_eval(const AppContext& ctx, const EvalOptions& options, std::ostream& out,
                             std::ostream& err) {
    HypercubeIndex index = HypercubeIndex::load(options.index_dir);
    std::vector<QaRecord> records = load_qa_jsonl(options.qa_path);
    EvalHooks hooks = make_eval_hooks(ctx, index, options, err);
    MetricReport report = run_eval(index, records, options.retrieval, *ctx.embedder, hooks);

    for (const auto& q : report.per_query)
        if (q.skipped) err << "warning: skipped '" << q.question << "': " << q.skip_reason << "\n";

    if (options.format == "json")
        out << report.to_json().dump(2) << "\n";
    else
        out << report.to_table();
    if (!options.out_path.empty())
        write_file_atomic(options.out_path, report.to_json().dump(2) + "\n");
    return report;
}

struct BenchOptions {
    std::vector<size_t> sizes = {500, 1000, 2500, 5000};
    size_t repetitions = 5;
    size_t n_queries = 8;
    double noise_fraction = 0.9;
    fs::path out_csv;
};

inline BenchResult cmd_bench(const AppContext& ctx, const BenchOptions& options, std::ostream& out,
                             std::ostream& /*err*/) {
    LatencyBenchOptions bench_options;
    bench_options.sizes = options.sizes;
    bench_options.repetitions = options.repetitions;
    bench_options.n_queries = options.n_queries;
    bench_options.noise_fraction = options.noise_fraction;
    bench_options.seed = ctx.config.seed;
    BenchResult result = latency_bench(bench_options, *ctx.embedder);
    std::string csv = result.to_csv();
    out << csv;
    if (!options.out_csv.empty()) write_file_atomic(options.out_csv, csv);
    return result;
}

struct SweepOptions {
    fs::path index_dir;
    fs::path qa_path;
    std::vector<double> taus = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
    RetrievalConfig retrieval;
    fs::path out_dir;  // optional: one JSON report per tau
};

inline std::vector<std::pair<double, MetricReport>> cmd_sweep_tau(const AppContext& ctx,
                                                                  const SweepOptions& options,
                                                                  std::ostream& out,
                                                                  std::ostream& err) {
    HypercubeIndex index = HypercubeIndex::load(options.index_dir);
    std::vector<QaRecord> records = load_qa_jsonl(options.qa_path);

    EvalOptions eval_options;
    eval_options.retrieval = options.retrieval;
    EvalHooks hooks = make_eval_hooks(ctx, index, eval_options, err);

    std::vector<std::pair<double, MetricReport>> reports;
    if (!options.out_dir.empty()) fs::create_directories(options.out_dir);
    out << "tau,precision_at_k,recall_at_k,token_f1,mean_latency_ms\n";
    for (double tau : options.taus) {
        RetrievalConfig config = options.retrieval;
        config.tau = tau;
        config.validate();
        MetricReport report = run_eval(index, records, config, *ctx.embedder, hooks);
        std::ostringstream tau_str;
        tau_str << tau;
        out << tau_str.str() << ',' << report.mean_precision << ',' << report.mean_recall << ','
            << (report.qa_scored ? report.mean_f1 : 0.0) << ',' << report.latency.mean_ms << "\n";
        if (!options.out_dir.empty())
            write_file_atomic(options.out_dir / ("tau-" + tau_str.str() + ".json"),
                              report.to_json().dump(2) + "\n");
        reports.emplace_back(tau, std::move(report));
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Argument parsing and dispatch

namespace detail {

inline void add_retrieval_flags(CLI::App* cmd, RetrievalConfig& config,
                                std::vector<std::string>& disabled) {
    cmd->add_option("--top-k", config.top_k, "results to return")->check(CLI::PositiveNumber);
    cmd->add_option("--tau", config.tau, "semantic similarity threshold")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_flag_callback("--no-semantic", [&config] { config.semantic_enabled = false; },
                           "disable the embedding fallback");
    cmd->add_flag_callback("--no-exact", [&config] { config.exact_enabled = false; },
                           "disable exact lexical matching");
    cmd->add_option("--disable-dim", disabled, "exclude a dimension (repeatable)");
}

// Config-file values fill in whatever the command line left untouched.
inline void merge_retrieval_config(CLI::App* cmd, RetrievalConfig& rc,
                                   const std::vector<std::string>& disabled,
                                   const RetrievalConfig& defaults) {
    if (cmd->count("--top-k") == 0) rc.top_k = defaults.top_k;
    if (cmd->count("--tau") == 0) rc.tau = defaults.tau;
    if (cmd->count("--no-semantic") == 0) rc.semantic_enabled = defaults.semantic_enabled;
    if (cmd->count("--no-exact") == 0) rc.exact_enabled = defaults.exact_enabled;
    rc.disabled_dimensions = defaults.disabled_dimensions;
    for (const auto& d : disabled) rc.disabled_dimensions.insert(d);
    rc.validate();
}

}  // namespace detail

/// Full CLI entry point; returns the process exit code.
/// 0 success, 1 usage, 2 data error, 3 backend error.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err,
                   const HttpFactory& http_factory = {}) {
    CLI::App app{"multi-dimensional label index retrieval engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::string backend_override;
    int64_t seed_override = -1;
    app.add_option("--config", config_path, "config file (JSON)");
    app.add_option("--backend", backend_override, "backend: llm, gazetteer, or scripted");
    app.add_option("--seed", seed_override, "seed for clustering and benchmarks");

    BuildOptions build_options;
    auto* build = app.add_subcommand("build", "index a corpus");
    build->add_option("--corpus", build_options.corpus_path, "corpus.jsonl")->required();
    build->add_option("--dimensions", build_options.schema_path, "schema.json (skip discovery)");
    build->add_flag("--discover", build_options.discover, "discover dimensions from the corpus");
    build->add_option("--k", build_options.k, "cluster count for discovery");
    build->add_option("--sample-size", build_options.summary_sample_size,
                      "entities shown to the summarizer per cluster");
    build->add_option("--out", build_options.out_dir, "index directory")->required();
    build->add_option("--max-failure-frac", build_options.max_failure_fraction,
                      "abort when more than this fraction of docs fail extraction");

    QueryOptions retrieve_options;
    std::vector<std::string> retrieve_disabled;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "retrieve documents for a query");
    retrieve_cmd->add_option("--index", retrieve_options.index_dir, "index directory");
    retrieve_cmd->add_option("--query", retrieve_options.query, "query text")->required();
    retrieve_cmd->add_option("--components", retrieve_options.components_path,
                             "precomputed components file (JSON)");
    retrieve_cmd->add_option("--format", retrieve_options.format, "json or table")
        ->check(CLI::IsMember({"json", "table"}));
    detail::add_retrieval_flags(retrieve_cmd, retrieve_options.retrieval, retrieve_disabled);

    QueryOptions answer_options;
    std::vector<std::string> answer_disabled;
    auto* answer_cmd = app.add_subcommand("answer", "answer a query over retrieved documents");
    answer_cmd->add_option("--index", answer_options.index_dir, "index directory");
    answer_cmd->add_option("--query", answer_options.query, "query text")->required();
    answer_cmd->add_option("--components", answer_options.components_path,
                           "precomputed components file (JSON)");
    detail::add_retrieval_flags(answer_cmd, answer_options.retrieval, answer_disabled);

    EvalOptions eval_options;
    std::vector<std::string> eval_disabled;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate retrieval and answers over a QA set");
    eval_cmd->add_option("--index", eval_options.index_dir, "index directory");
    eval_cmd->add_option("--qa", eval_options.qa_path, "qa.jsonl")->required();
    eval_cmd->add_flag("--judge", eval_options.judge, "run the LLM judge");
    eval_cmd->add_option("--format", eval_options.format, "table or json")
        ->check(CLI::IsMember({"table", "json"}));
    eval_cmd->add_option("--out", eval_options.out_path, "write the JSON report here");
    detail::add_retrieval_flags(eval_cmd, eval_options.retrieval, eval_disabled);

    BenchOptions bench_options;
    auto* bench_cmd = app.add_subcommand("bench", "latency benchmark on synthetic corpora");
    bench_cmd->add_option("--sizes", bench_options.sizes, "corpus sizes");
    bench_cmd->add_option("--reps", bench_options.repetitions, "repetitions per query");
    bench_cmd->add_option("--queries", bench_options.n_queries, "queries per corpus");
    bench_cmd->add_option("--noise", bench_options.noise_fraction, "fraction of label-free docs");
    bench_cmd->add_option("--out", bench_options.out_csv, "write CSV here");

    SweepOptions sweep_options;
    std::vector<std::string> sweep_disabled;
    auto* sweep_cmd = app.add_subcommand("sweep-tau", "evaluate across a tau sweep");
    sweep_cmd->add_option("--index", sweep_options.index_dir, "index directory");
    sweep_cmd->add_option("--qa", sweep_options.qa_path, "qa.jsonl")->required();
    sweep_cmd->add_option("--taus", sweep_options.taus, "thresholds to sweep");
    sweep_cmd->add_option("--out-dir", sweep_options.out_dir, "one JSON report per tau");
    detail::add_retrieval_flags(sweep_cmd, sweep_options.retrieval, sweep_disabled);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        // app.exit prints help for help requests and the message otherwise;
        // any parse failure maps onto the usage exit code.
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        AppConfig config =
            config_path.empty() ? AppConfig() : AppConfig::load(config_path);
        if (!backend_override.empty()) config.backend = parse_backend_kind(backend_override);
        if (seed_override >= 0) config.seed = static_cast<uint64_t>(seed_override);

        if (app.got_subcommand(build)) {
            AppContext ctx = make_context(config, http_factory);
            cmd_build(ctx, build_options, out, err);
        } else if (app.got_subcommand(retrieve_cmd)) {
            detail::merge_retrieval_config(retrieve_cmd, retrieve_options.retrieval,
                                           retrieve_disabled, config.retrieval);
            if (retrieve_options.index_dir.empty()) retrieve_options.index_dir = config.index_dir;
            AppContext ctx = make_context(config, http_factory);
            cmd_retrieve(ctx, retrieve_options, out, err);
        } else if (app.got_subcommand(answer_cmd)) {
            detail::merge_retrieval_config(answer_cmd, answer_options.retrieval, answer_disabled,
                                           config.retrieval);
            if (answer_options.index_dir.empty()) answer_options.index_dir = config.index_dir;
            AppContext ctx = make_context(config, http_factory);
            cmd_answer(ctx, answer_options, out, err);
        } else if (app.got_subcommand(eval_cmd)) {
            detail::merge_retrieval_config(eval_cmd, eval_options.retrieval, eval_disabled,
                                           config.retrieval);
            if (eval_options.index_dir.empty()) eval_options.index_dir = config.index_dir;
            AppContext ctx = make_context(config, http_factory);
            cmd_eval(ctx, eval_options, out, err);
        } else if (app.got_subcommand(bench_cmd)) {
            // The benchmark synthesizes its own corpora and gazetteer, so it
            // needs no backend paths from the config.
            AppContext ctx;
            ctx.config = config;
            ctx.embedder = std::make_shared<CachingEmbedder>(std::make_shared<TrigramEmbedder>());
            cmd_bench(ctx, bench_options, out, err);
        } else if (app.got_subcommand(sweep_cmd)) {
            detail::merge_retrieval_config(sweep_cmd, sweep_options.retrieval, sweep_disabled,
                                           config.retrieval);
            if (sweep_options.index_dir.empty()) sweep_options.index_dir = config.index_dir;
            AppContext ctx = make_context(config, http_factory);
            cmd_sweep_tau(ctx, sweep_options, out, err);
        }
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace hypercube
