#include "recalleval/runner.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <thread>

#include "recalleval/baselines.hpp"
#include "recalleval/cache.hpp"
#include "recalleval/entailment.hpp"
#include "recalleval/errors.hpp"
#include "recalleval/extraction.hpp"
#include "recalleval/jsonl.hpp"
#include "recalleval/pipeline.hpp"
#include "recalleval/preprocess.hpp"
#include "recalleval/prompts.hpp"
#include "recalleval/report_json.hpp"

namespace recalleval {

namespace {

/// All live objects a run needs, owning the providers and cache.
struct RunContext {
    std::unique_ptr<UsageMeter> meter = std::make_unique<UsageMeter>();
    std::unique_ptr<ResponseCache> cache;
    std::unique_ptr<ChatTransport> transport;
    std::unique_ptr<CachedChatClient> chat;
    std::unique_ptr<EmbeddingProvider> base_embedder;
    std::unique_ptr<CachedEmbeddingProvider> cached_embedder;
    ChatParams params;
    PromptTemplate one_to_one;
    PromptTemplate multi_choice;
    PromptTemplate coref;
    PromptTemplate holistic;
};

PromptTemplate load_template(const std::string& dir, const char* name,
                             const PromptTemplate& fallback) {
    if (dir.empty()) return fallback;
    auto path = std::filesystem::path(dir) / (std::string(name) + ".txt");
    if (!std::filesystem::exists(path)) return fallback;
    return PromptTemplate::from_file(path.string());
}

RunContext build_context(const RunConfig& cfg) {
    RunContext ctx;

    if (!cfg.cache_dir.empty())
        ctx.cache = std::make_unique<ResponseCache>(cfg.cache_dir,
                                                    parse_cache_mode(cfg.cache_mode));

    if (cfg.chat_kind == "http") {
        ctx.transport = std::make_unique<HttpChatTransport>(cfg.chat_endpoint,
                                                            cfg.chat_api_key_env);
        ctx.params.provider_id = "http";
        ctx.params.model_id = cfg.chat_model;
    } else if (cfg.chat_kind == "scripted") {
        ctx.transport = std::make_unique<ScriptedChatTransport>(
            ScriptedChatTransport::from_file(cfg.chat_script_path));
        ctx.params.provider_id = "scripted";
        ctx.params.model_id = cfg.chat_model.empty() ? "scripted" : cfg.chat_model;
    } else {
        // chat_kind=none still gets a client: replay caches can answer.
        ctx.params.provider_id = "http";
        ctx.params.model_id = cfg.chat_model;
    }
    ctx.params.max_output_tokens = cfg.max_output_tokens;

    RetryPolicy retry{cfg.retry_attempts, cfg.retry_base_delay_ms};
    ctx.chat = std::make_unique<CachedChatClient>(ctx.transport.get(), ctx.cache.get(),
                                                  ctx.meter.get(), retry, cfg.max_in_flight);

    std::string embed_provider_id = cfg.embedding_kind;
    std::string embed_model =
        cfg.embedding_kind == "hash" ? "fnv1a-" + std::to_string(cfg.embedding_dim)
                                     : cfg.embedding_model;
    if (cfg.embedding_kind == "http")
        ctx.base_embedder = std::make_unique<HttpEmbeddingProvider>(
            cfg.embedding_endpoint, cfg.embedding_model, cfg.embedding_api_key_env);
    else
        ctx.base_embedder = std::make_unique<HashingEmbedder>(cfg.embedding_dim);
    ctx.cached_embedder = std::make_unique<CachedEmbeddingProvider>(
        ctx.base_embedder.get(), embed_provider_id, embed_model, cfg.embedding_dim,
        ctx.cache.get(), ctx.meter.get());

    ctx.one_to_one = load_template(cfg.template_dir, "one_to_one",
                                   default_one_to_one_template());
    ctx.multi_choice = load_template(cfg.template_dir, "multi_choice",
                                     default_multi_choice_template());
    ctx.coref = load_template(cfg.template_dir, "coref", default_coref_template());
    ctx.holistic = load_template(cfg.template_dir, "holistic", default_holistic_template());
    return ctx;
}

/// Extracts generated facts wherever only the raw answer is present.
/// Extraction failures leave the instance with an empty generated set and a
/// warning; recall will be 0 for it, which is the honest score for an
/// answer that produced no usable facts.
std::vector<std::string> extract_all(std::vector<EvalInstance>& instances,
                                     const RunConfig& cfg, RunContext& ctx) {
    std::vector<std::string> warnings;
    ExtractionMode mode = parse_extraction_mode(cfg.extraction_mode);
    for (auto& instance : instances) {
        if (!instance.needs_extraction()) continue;
        try {
            FactSet facts = extract_facts(*instance.generated_raw, mode);
            facts = dedupe_facts(facts);
            if (cfg.coref) {
                auto resolved = resolve_coreference(facts, *ctx.chat, ctx.params, ctx.coref);
                facts = std::move(resolved.facts);
                for (auto& warning : resolved.warnings)
                    warnings.push_back(instance.instance_id + ": " + warning);
            }
            instance.generated = std::move(facts);
        } catch (const CacheMissInReplay&) {
            throw;
        } catch (const RecallError& e) {
            warnings.push_back(instance.instance_id + ": extraction failed: " + e.what());
            instance.generated = FactSet::make(std::vector<Fact>{}, FactOrigin::generated);
        }
    }
    return warnings;
}

/// Index-ordered parallel map; exceptions from workers resurface here.
void parallel_for(std::size_t count, std::size_t parallelism,
                  const std::function<void(std::size_t)>& body) {
    if (parallelism <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::size_t workers = std::min(parallelism, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                    body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        });
    }
    for (auto& worker : pool) worker.join();
    if (failure) std::rethrow_exception(failure);
}

InstanceReport all_uncovered(const EvalInstance& instance, const std::string& warning) {
    InstanceReport report;
    report.instance_id = instance.instance_id;
    for (const auto& f : instance.reference.facts()) {
        MatchDecision decision;
        decision.reference_id = f.id();
        report.decisions.push_back(std::move(decision));
    }
    report.warnings.push_back(warning);
    finalize_instance_report(report, instance.reference.size());
    return report;
}

}  // namespace

std::vector<std::string> run_extract(const RunConfig& cfg, const std::string& output_path) {
    auto instances = load_instances(cfg.dataset_path);
    RunContext ctx = build_context(cfg);
    auto warnings = extract_all(instances, cfg, ctx);
    write_instances(output_path, instances);
    return warnings;
}

int run(const RunConfig& cfg, std::ostream& summary, std::ostream& errors) {
    try {
        cfg.validate();
        auto instances = load_instances(cfg.dataset_path);
        RunContext ctx = build_context(cfg);

        auto extraction_warnings = extract_all(instances, cfg, ctx);

        CorpusReport corpus;
        std::map<std::string, HolisticMapping> holistic_audit;
        std::map<std::string, std::string> template_digests;

        if (cfg.method == "longrecall") {
            EntailmentJudge judge(*ctx.chat, ctx.params, ctx.one_to_one, ctx.multi_choice);
            PipelineProviders providers{&judge, ctx.cached_embedder.get()};
            corpus = evaluate_corpus(instances, cfg.pipeline, providers, cfg.parallelism,
                                     ctx.meter.get());
            template_digests["one_to_one"] = ctx.one_to_one.digest();
            template_digests["multi_choice"] = ctx.multi_choice.digest();
        } else if (cfg.method == "arecall" || cfg.method == "erecall") {
            std::vector<InstanceReport> reports(instances.size());
            parallel_for(instances.size(), cfg.parallelism, [&](std::size_t i) {
                reports[i] = cfg.method == "arecall"
                                 ? arecall(instances[i], cfg.arecall_word_boundary)
                                 : erecall(instances[i], cfg.pipeline.erecall_threshold);
            });
            corpus = aggregate_corpus(std::move(reports), ctx.meter.get());
        } else {  // holistic
            std::vector<InstanceReport> reports(instances.size());
            std::vector<std::optional<HolisticMapping>> mappings(instances.size());
            parallel_for(instances.size(), cfg.parallelism, [&](std::size_t i) {
                try {
                    auto result = holistic_judge(instances[i], *ctx.chat, ctx.params,
                                                 ctx.holistic);
                    reports[i] = std::move(result.report);
                    mappings[i] = std::move(result.mapping);
                } catch (const CacheMissInReplay&) {
                    throw;
                } catch (const RecallError& e) {
                    reports[i] = all_uncovered(instances[i],
                                               std::string("holistic judge failed: ") +
                                                   e.what());
                }
            });
            corpus = aggregate_corpus(std::move(reports), ctx.meter.get());
            for (std::size_t i = 0; i < instances.size(); ++i)
                if (mappings[i])
                    holistic_audit[instances[i].instance_id] = std::move(*mappings[i]);
            template_digests["holistic"] = ctx.holistic.digest();
        }
        if (cfg.coref) template_digests["coref"] = ctx.coref.digest();

        // Extraction warnings belong to the corpus ledger; keep them first.
        corpus.warnings.insert(corpus.warnings.begin(), extraction_warnings.begin(),
                               extraction_warnings.end());

        std::vector<std::string> cache_digests;
        if (ctx.cache) cache_digests = ctx.cache->digests_used();

        auto document =
            report_document(cfg, corpus, template_digests, cache_digests, holistic_audit);
        std::string payload = canonical_dump(document);
        if (cfg.output_path.empty()) {
            summary << payload;
        } else {
            std::ofstream out(cfg.output_path, std::ios::binary | std::ios::trunc);
            if (!out) throw RecallError("cannot write report: " + cfg.output_path);
            out << payload;
        }

        std::size_t lexical_covered = 0, semantic_covered = 0;
        for (const auto& report : corpus.instances)
            for (const auto& decision : report.decisions) {
                if (decision.stage == Stage::lexical) ++lexical_covered;
                else if (decision.stage == Stage::semantic) ++semantic_covered;
            }
        summary << "method: " << cfg.method << "\n"
                << "instances: " << corpus.instances.size() << "\n"
                << "mean recall: " << corpus.mean_recall << "\n"
                << "covered (lexical stage): " << lexical_covered << "\n"
                << "covered (semantic stage): " << semantic_covered << "\n"
                << "chat calls: " << corpus.usage.chat_calls
                << " (cache hits: " << corpus.usage.chat_cache_hits << ")\n"
                << "embedding calls: " << corpus.usage.embed_calls
                << " (cache hits: " << corpus.usage.embed_cache_hits << ")\n"
                << "warnings: " << corpus.warnings.size() << "\n";
        return 0;
    } catch (const RecallError& e) {
        errors << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace recalleval
