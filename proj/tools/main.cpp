#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "recalleval/cache.hpp"
#include "recalleval/errors.hpp"
#include "recalleval/jsonl.hpp"
#include "recalleval/metaeval.hpp"
#include "recalleval/runconfig.hpp"
#include "recalleval/runner.hpp"

namespace {

using recalleval::RunConfig;

/// Shared evaluate/baseline/extract flag set. Values land in the config
/// only for flags the user actually passed, so a config file provides the
/// base layer and flags override it.
struct RunFlags {
    std::string config_path;
    std::string dataset;
    std::string method;
    std::string output;
    std::string cache_dir;
    std::string cache_mode;
    std::string chat_kind;
    std::string chat_endpoint;
    std::string chat_model;
    std::string chat_api_key_env;
    std::string chat_script;
    std::string embedding_kind;
    std::string embedding_endpoint;
    std::string embedding_model;
    std::string embedding_api_key_env;
    std::string extraction_mode;
    std::string template_dir;
    std::size_t embedding_dim = 0;
    std::size_t parallelism = 0;
    std::size_t top_k = 0;
    std::size_t max_output_tokens = 0;
    std::size_t max_in_flight = 0;
    std::size_t retry_attempts = 0;
    std::size_t retry_base_delay_ms = 0;
    double fuzzy_threshold = 0.0;
    double lcs_threshold = 0.0;
    double cosine_threshold = 0.0;
    double fuzzy_token_similarity = 0.0;
    double erecall_threshold = 0.0;
    std::uint64_t seed = 0;
    bool coref = false;
    bool word_boundary = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
    cmd->add_option("-c,--config", flags.config_path, "JSON config file (base layer)");
    cmd->add_option("-d,--dataset", flags.dataset, "Instance JSONL file");
    cmd->add_option("-o,--output", flags.output, "Report output path (default stdout)");
    cmd->add_option("--cache-dir", flags.cache_dir, "Response cache directory");
    cmd->add_option("--cache-mode", flags.cache_mode, "readwrite or replay");
    cmd->add_option("--chat", flags.chat_kind, "Chat provider: none, http, scripted");
    cmd->add_option("--chat-endpoint", flags.chat_endpoint, "Chat completions URL");
    cmd->add_option("--chat-model", flags.chat_model, "Chat model id");
    cmd->add_option("--chat-api-key-env", flags.chat_api_key_env,
                    "Env var holding the chat API key");
    cmd->add_option("--chat-script", flags.chat_script,
                    "Rule file for the scripted chat provider");
    cmd->add_option("--embedding", flags.embedding_kind, "Embedding provider: hash, http");
    cmd->add_option("--embedding-endpoint", flags.embedding_endpoint, "Embedding service URL");
    cmd->add_option("--embedding-model", flags.embedding_model, "Embedding model id");
    cmd->add_option("--embedding-api-key-env", flags.embedding_api_key_env,
                    "Env var holding the embedding API key");
    cmd->add_option("--embedding-dim", flags.embedding_dim, "Hash embedding dimension");
    cmd->add_option("--extraction-mode", flags.extraction_mode,
                    "listed or mirrored_sentences");
    cmd->add_flag("--coref", flags.coref, "Rewrite pronouns via the chat provider");
    cmd->add_option("--templates", flags.template_dir,
                    "Directory with prompt template overrides");
    cmd->add_option("--parallelism,-j", flags.parallelism, "Worker thread count");
    cmd->add_option("--max-in-flight", flags.max_in_flight,
                    "Cap on concurrent provider requests (0 = unbounded)");
    cmd->add_option("--retry-attempts", flags.retry_attempts, "Provider retry attempts");
    cmd->add_option("--retry-base-delay-ms", flags.retry_base_delay_ms,
                    "Initial retry backoff in milliseconds");
    cmd->add_option("--fuzzy-threshold", flags.fuzzy_threshold,
                    "Lexical fuzzy-Jaccard admission threshold");
    cmd->add_option("--lcs-threshold", flags.lcs_threshold, "LCS ratio threshold");
    cmd->add_option("--cosine-threshold", flags.cosine_threshold,
                    "Semantic cosine admission threshold");
    cmd->add_option("--top-k", flags.top_k, "Candidates kept per filter stage");
    cmd->add_option("--fuzzy-token-similarity", flags.fuzzy_token_similarity,
                    "Levenshtein similarity for two tokens to count as equal");
    cmd->add_option("--erecall-threshold", flags.erecall_threshold,
                    "Substring-ratio threshold for the erecall method");
    cmd->add_flag("--word-boundary", flags.word_boundary,
                  "arecall: anchors must match at word boundaries");
    cmd->add_option("--max-output-tokens", flags.max_output_tokens,
                    "Completion length limit per chat call");
    cmd->add_option("--seed", flags.seed, "Deterministic sampling seed");
}

/// Builds the final config: file base (when given), then every flag the
/// user actually set on the command line.
RunConfig resolve_config(const CLI::App* cmd, const RunFlags& flags) {
    RunConfig cfg;
    if (!flags.config_path.empty()) cfg = RunConfig::from_file(flags.config_path);

    auto passed = [&](const std::string& name) { return cmd->count(name) > 0; };
    if (passed("--dataset")) cfg.dataset_path = flags.dataset;
    if (passed("--output")) cfg.output_path = flags.output;
    if (passed("--cache-dir")) cfg.cache_dir = flags.cache_dir;
    if (passed("--cache-mode")) cfg.cache_mode = flags.cache_mode;
    if (passed("--chat")) cfg.chat_kind = flags.chat_kind;
    if (passed("--chat-endpoint")) cfg.chat_endpoint = flags.chat_endpoint;
    if (passed("--chat-model")) cfg.chat_model = flags.chat_model;
    if (passed("--chat-api-key-env")) cfg.chat_api_key_env = flags.chat_api_key_env;
    if (passed("--chat-script")) cfg.chat_script_path = flags.chat_script;
    if (passed("--embedding")) cfg.embedding_kind = flags.embedding_kind;
    if (passed("--embedding-endpoint")) cfg.embedding_endpoint = flags.embedding_endpoint;
    if (passed("--embedding-model")) cfg.embedding_model = flags.embedding_model;
    if (passed("--embedding-api-key-env"))
        cfg.embedding_api_key_env = flags.embedding_api_key_env;
    if (passed("--embedding-dim")) cfg.embedding_dim = flags.embedding_dim;
    if (passed("--extraction-mode")) cfg.extraction_mode = flags.extraction_mode;
    if (passed("--coref")) cfg.coref = flags.coref;
    if (passed("--templates")) cfg.template_dir = flags.template_dir;
    if (passed("--parallelism")) cfg.parallelism = flags.parallelism;
    if (passed("--max-in-flight")) cfg.max_in_flight = flags.max_in_flight;
    if (passed("--retry-attempts")) cfg.retry_attempts = flags.retry_attempts;
    if (passed("--retry-base-delay-ms")) cfg.retry_base_delay_ms = flags.retry_base_delay_ms;
    if (passed("--fuzzy-threshold"))
        cfg.pipeline.fuzzy_jaccard_threshold = flags.fuzzy_threshold;
    if (passed("--lcs-threshold")) cfg.pipeline.lcs_threshold = flags.lcs_threshold;
    if (passed("--cosine-threshold")) cfg.pipeline.cosine_threshold = flags.cosine_threshold;
    if (passed("--top-k")) cfg.pipeline.top_k = flags.top_k;
    if (passed("--fuzzy-token-similarity"))
        cfg.pipeline.fuzzy_token_similarity = flags.fuzzy_token_similarity;
    if (passed("--erecall-threshold"))
        cfg.pipeline.erecall_threshold = flags.erecall_threshold;
    if (passed("--word-boundary")) cfg.arecall_word_boundary = flags.word_boundary;
    if (passed("--max-output-tokens")) cfg.max_output_tokens = flags.max_output_tokens;
    if (passed("--seed")) cfg.seed = flags.seed;
    return cfg;
}

int run_with_config(RunConfig cfg) {
    return recalleval::run(cfg, std::cout, std::cerr);
}

std::string read_format(const std::string& format) {
    if (format != "markdown" && format != "csv")
        throw recalleval::ConfigError("format must be markdown or csv");
    return format;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw recalleval::RecallError("cannot write output file: " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recall evaluation over extracted facts: staged filtering with entailment"
                 " verification, lexical baselines, and evaluator meta-statistics"};
    app.require_subcommand(1);

    // ---- extract ----------------------------------------------------------
    RunFlags extract_flags;
    auto* extract_cmd =
        app.add_subcommand("extract", "Split raw generated answers into fact lists");
    add_run_flags(extract_cmd, extract_flags);

    // ---- evaluate ---------------------------------------------------------
    RunFlags eval_flags;
    auto* eval_cmd = app.add_subcommand(
        "evaluate", "Run the staged filter + entailment pipeline (method longrecall)");
    add_run_flags(eval_cmd, eval_flags);

    // ---- baseline ---------------------------------------------------------
    RunFlags base_flags;
    auto* base_cmd =
        app.add_subcommand("baseline", "Run a comparison method: arecall, erecall, holistic");
    add_run_flags(base_cmd, base_flags);
    base_cmd->add_option("-m,--method", base_flags.method, "arecall, erecall, or holistic")
        ->required();

    // ---- meta-eval --------------------------------------------------------
    auto* meta_cmd = app.add_subcommand("meta-eval", "Statistics over pair-label tables");
    meta_cmd->require_subcommand(1);

    std::string labels_path, format = "markdown", out_path;
    std::vector<std::string> majority_sources;
    std::string majority_tie;
    auto* agree_cmd = meta_cmd->add_subcommand(
        "agreement", "Fleiss' kappa across all label sources");
    agree_cmd->add_option("-l,--labels", labels_path, "Pair-label JSONL")->required();
    agree_cmd->add_option("-f,--format", format, "markdown or csv");
    agree_cmd->add_option("-o,--output", out_path, "Write table here instead of stdout");
    agree_cmd->add_option("--majority-of", majority_sources,
                          "Also report each source's kappa against a majority vote of these"
                          " sources");
    agree_cmd->add_option("--tie", majority_tie,
                          "Majority tie-break (match or no_match); required if ties occur");

    std::string tiers_labels, tiers_format = "markdown", tiers_out;
    auto* tiers_cmd =
        meta_cmd->add_subcommand("tiers", "Agreement-tier counts over method labels");
    tiers_cmd->add_option("-l,--labels", tiers_labels, "Pair-label JSONL")->required();
    tiers_cmd->add_option("-f,--format", tiers_format, "markdown or csv");
    tiers_cmd->add_option("-o,--output", tiers_out, "Write table here instead of stdout");

    std::string prf_labels, prf_gold, prf_format = "markdown", prf_out;
    auto* prf_cmd = meta_cmd->add_subcommand(
        "prf", "Precision/recall/F1 of every source against a gold source");
    prf_cmd->add_option("-l,--labels", prf_labels, "Pair-label JSONL")->required();
    prf_cmd->add_option("-g,--gold", prf_gold, "Source id holding gold labels")->required();
    prf_cmd->add_option("-f,--format", prf_format, "markdown or csv");
    prf_cmd->add_option("-o,--output", prf_out, "Write table here instead of stdout");

    std::string sample_labels, sample_standard_out, sample_challenging_out;
    std::size_t standard_n = 0, challenging_n = 0;
    std::uint64_t sample_seed = 0;
    auto* sample_cmd = meta_cmd->add_subcommand(
        "sample", "Draw standard and challenging evaluation subsets");
    sample_cmd->add_option("-l,--labels", sample_labels, "Pair-label JSONL")->required();
    sample_cmd->add_option("--standard-n", standard_n, "Standard subset size")->required();
    sample_cmd->add_option("--challenging-n", challenging_n, "Challenging subset size")
        ->required();
    sample_cmd->add_option("--seed", sample_seed, "Sampling seed");
    sample_cmd->add_option("--out-standard", sample_standard_out, "Standard subset JSONL")
        ->required();
    sample_cmd
        ->add_option("--out-challenging", sample_challenging_out, "Challenging subset JSONL")
        ->required();

    // ---- cache ------------------------------------------------------------
    auto* cache_cmd = app.add_subcommand("cache", "Inspect or verify a response cache");
    cache_cmd->require_subcommand(1);
    std::string cache_dir;
    auto* inspect_cmd = cache_cmd->add_subcommand("inspect", "Count records by kind");
    inspect_cmd->add_option("--dir", cache_dir, "Cache directory")->required();
    auto* verify_cmd =
        cache_cmd->add_subcommand("verify", "Recompute digests and check record shape");
    verify_cmd->add_option("--dir", cache_dir, "Cache directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract_cmd->parsed()) {
            RunConfig cfg = resolve_config(extract_cmd, extract_flags);
            if (cfg.dataset_path.empty())
                throw recalleval::ConfigError("extract needs --dataset");
            if (cfg.output_path.empty())
                throw recalleval::ConfigError("extract needs --output");
            auto warnings = recalleval::run_extract(cfg, cfg.output_path);
            for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";
            std::cout << "wrote " << cfg.output_path << "\n";
            return 0;
        }
        if (eval_cmd->parsed()) {
            RunConfig cfg = resolve_config(eval_cmd, eval_flags);
            cfg.method = "longrecall";
            return run_with_config(std::move(cfg));
        }
        if (base_cmd->parsed()) {
            RunConfig cfg = resolve_config(base_cmd, base_flags);
            cfg.method = base_flags.method;
            if (cfg.method == "longrecall")
                throw recalleval::ConfigError(
                    "baseline runs arecall, erecall, or holistic; use evaluate for"
                    " longrecall");
            return run_with_config(std::move(cfg));
        }
        if (agree_cmd->parsed()) {
            auto table = recalleval::LabelTable::make(recalleval::load_pair_labels(labels_path));
            std::vector<std::pair<std::string, double>> rows;
            auto overall = recalleval::fleiss_kappa(table);
            rows.emplace_back("all sources", overall.kappa);
            for (const auto& warning : overall.warnings)
                std::cerr << "warning: " << warning << "\n";
            if (!majority_sources.empty()) {
                std::optional<recalleval::PairLabelValue> tie;
                if (agree_cmd->count("--tie") > 0)
                    tie = recalleval::parse_pair_label(majority_tie);
                auto majority = recalleval::majority_source(table, majority_sources,
                                                            "majority", tie);
                for (const auto& source : table.sources()) {
                    auto merged = recalleval::LabelTable::make([&] {
                        std::vector<recalleval::PairLabel> pair_labels;
                        for (const auto& pair : table.pairs()) {
                            pair_labels.push_back({pair.first, pair.second, source,
                                                   *table.label(pair, source)});
                            pair_labels.push_back({pair.first, pair.second, "majority",
                                                   *majority.label(pair, "majority")});
                        }
                        return pair_labels;
                    }());
                    auto result = recalleval::fleiss_kappa(merged);
                    rows.emplace_back(source + " vs majority", result.kappa);
                }
            }
            auto text = read_format(format) == "csv" ? recalleval::render_kappa_csv(rows)
                                                     : recalleval::render_kappa_markdown(rows);
            write_text(out_path, text);
            return 0;
        }
        if (tiers_cmd->parsed()) {
            auto table = recalleval::LabelTable::make(recalleval::load_pair_labels(tiers_labels));
            auto counts = recalleval::agreement_tiers(table);
            auto text = read_format(tiers_format) == "csv"
                            ? recalleval::render_tiers_csv(counts)
                            : recalleval::render_tiers_markdown(counts);
            write_text(tiers_out, text);
            return 0;
        }
        if (prf_cmd->parsed()) {
            auto table = recalleval::LabelTable::make(recalleval::load_pair_labels(prf_labels));
            auto gold = table.select_source(prf_gold);
            if (gold.empty())
                throw recalleval::ConfigError("gold source " + prf_gold +
                                              " labels no pairs in this file");
            std::vector<std::pair<std::string, recalleval::PrfResult>> rows;
            for (const auto& source : table.sources()) {
                if (source == prf_gold) continue;
                rows.emplace_back(source,
                                  recalleval::pair_prf(table.select_source(source), gold));
            }
            auto text = read_format(prf_format) == "csv" ? recalleval::render_prf_csv(rows)
                                                         : recalleval::render_prf_markdown(rows);
            write_text(prf_out, text);
            return 0;
        }
        if (sample_cmd->parsed()) {
            auto table =
                recalleval::LabelTable::make(recalleval::load_pair_labels(sample_labels));
            auto tiers = recalleval::assign_tiers(table);
            auto result = recalleval::sample_eval_sets(tiers, standard_n, challenging_n,
                                                       sample_seed);
            auto write_pairs = [](const std::string& path,
                                  const std::vector<recalleval::PairKey>& pairs) {
                std::ofstream out(path, std::ios::binary | std::ios::trunc);
                if (!out) throw recalleval::RecallError("cannot write " + path);
                for (const auto& pair : pairs) {
                    nlohmann::json obj;
                    obj["instance_id"] = pair.first;
                    obj["reference_id"] = pair.second;
                    out << obj.dump() << "\n";
                }
            };
            write_pairs(sample_standard_out, result.standard_set);
            write_pairs(sample_challenging_out, result.challenging_set);
            for (const auto& line : result.log) std::cout << line << "\n";
            std::cout << "standard: " << result.standard_set.size() << " pairs, challenging: "
                      << result.challenging_set.size() << " pairs\n";
            return 0;
        }
        if (inspect_cmd->parsed() || verify_cmd->parsed()) {
            recalleval::ResponseCache cache(cache_dir, recalleval::CacheMode::replay);
            if (verify_cmd->parsed()) {
                auto count = cache.verify();
                std::cout << count << " records verified\n";
                return 0;
            }
            std::size_t chat = 0, embedding = 0, other = 0;
            for (const auto& entry : std::filesystem::directory_iterator(cache_dir)) {
                if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
                std::ifstream in(entry.path());
                nlohmann::json record;
                try {
                    in >> record;
                } catch (const nlohmann::json::exception&) {
                    ++other;
                    continue;
                }
                auto kind = record.value("kind", "");
                if (kind == "chat") ++chat;
                else if (kind == "embedding") ++embedding;
                else ++other;
            }
            std::cout << "chat records: " << chat << "\nembedding records: " << embedding
                      << "\nunrecognized: " << other << "\n";
            return 0;
        }
    } catch (const recalleval::RecallError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
