#include "recalleval/pipeline.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "recalleval/errors.hpp"

namespace recalleval {

const char* to_string(TrailVerdict verdict) {
    switch (verdict) {
        case TrailVerdict::match: return "match";
        case TrailVerdict::no_match: return "no_match";
        case TrailVerdict::error: return "error";
    }
    return "error";
}

namespace {

enum class StageOutcome { covered, rejected, failed };

/// Runs entailment over one stage's candidates, recording the trail and
/// blocking rejected pairs. Empty candidate lists are the caller's problem.
StageOutcome run_stage(const Fact& f, const FactSet& generated, const std::string& question,
                       Stage stage, const std::vector<Candidate>& candidates,
                       const EntailmentJudge& judge, MatchDecision& decision,
                       BlockedPairs& blocked) {
    if (candidates.size() == 1) {
        const auto& id = candidates.front().generated_id;
        TrailEntry entry{{id}, Protocol::one_to_one, TrailVerdict::error};
        try {
            Verdict verdict = judge.check_one_to_one(
                question, f, generated.at(*generated.index_of(id)));
            if (verdict.kind == VerdictKind::match) {
                entry.verdict = TrailVerdict::match;
                decision.trail.push_back(std::move(entry));
                decision.covered = true;
                decision.support = SupportSet::make({id}, generated);
                decision.stage = stage;
                return StageOutcome::covered;
            }
            entry.verdict = TrailVerdict::no_match;
            decision.trail.push_back(std::move(entry));
            blocked.emplace(f.id(), id);
            return StageOutcome::rejected;
        } catch (const CacheMissInReplay&) {
            throw;  // an incomplete replay transcript must abort the run
        } catch (const RecallError& e) {
            decision.trail.push_back(std::move(entry));
            decision.warnings.push_back("entailment failed for (" + f.id() + ", " + id +
                                        "): " + e.what());
            return StageOutcome::failed;
        }
    }

    std::vector<std::string> offered;
    offered.reserve(candidates.size());
    for (const auto& c : candidates) offered.push_back(c.generated_id);
    TrailEntry entry{offered, Protocol::multi_choice, TrailVerdict::error};
    try {
        auto support = judge.check_multi_choice(question, f, candidates, generated);
        if (support) {
            entry.verdict = TrailVerdict::match;
            decision.trail.push_back(std::move(entry));
            decision.covered = true;
            decision.support = std::move(support);
            decision.stage = stage;
            return StageOutcome::covered;
        }
        // "None of the above" rejects the offered group jointly.
        entry.verdict = TrailVerdict::no_match;
        decision.trail.push_back(std::move(entry));
        for (const auto& id : offered) blocked.emplace(f.id(), id);
        return StageOutcome::rejected;
    } catch (const CacheMissInReplay&) {
        throw;
    } catch (const RecallError& e) {
        decision.trail.push_back(std::move(entry));
        decision.warnings.push_back("entailment failed for " + f.id() + ": " + e.what());
        return StageOutcome::failed;
    }
}

}  // namespace

MatchDecision evaluate_fact(const Fact& f, const FactSet& generated,
                            const std::string& question, const PipelineConfig& cfg,
                            const PipelineProviders& providers, BlockedPairs& blocked) {
    MatchDecision decision;
    decision.reference_id = f.id();
    if (generated.empty()) return decision;
    if (providers.judge == nullptr) {
        decision.warnings.push_back("no entailment judge configured; " + f.id() +
                                    " left uncovered");
        return decision;
    }

    auto lexical = select_lexical(f, generated, blocked, cfg);
    if (!lexical.empty()) {
        auto outcome = run_stage(f, generated, question, Stage::lexical, lexical,
                                 *providers.judge, decision, blocked);
        if (outcome != StageOutcome::rejected) return decision;
        // Rejected pairs are now blocked; fall through to the semantic round.
    }

    if (providers.embedder == nullptr) {
        decision.warnings.push_back("no embedding provider configured; semantic stage skipped"
                                    " for " + f.id());
        return decision;
    }
    std::vector<Candidate> semantic;
    try {
        semantic = select_semantic(f, generated, blocked, cfg, *providers.embedder);
    } catch (const CacheMissInReplay&) {
        throw;
    } catch (const RecallError& e) {
        decision.warnings.push_back("semantic selection failed for " + f.id() + ": " +
                                    e.what());
        return decision;
    }
    if (!semantic.empty())
        run_stage(f, generated, question, Stage::semantic, semantic, *providers.judge,
                  decision, blocked);
    return decision;
}

void finalize_instance_report(InstanceReport& report, std::size_t reference_count) {
    report.covered_count = 0;
    for (const auto& decision : report.decisions) {
        if (decision.covered) ++report.covered_count;
        for (const auto& warning : decision.warnings)
            report.warnings.push_back(decision.reference_id + ": " + warning);
    }
    report.recall = reference_count == 0
                        ? 0.0
                        : static_cast<double>(report.covered_count) /
                              static_cast<double>(reference_count);
}

InstanceReport evaluate_instance(const EvalInstance& instance, const PipelineConfig& cfg,
                                 const PipelineProviders& providers) {
    if (!instance.generated.has_value())
        throw std::invalid_argument("instance " + instance.instance_id +
                                    " has no extracted generated facts");
    InstanceReport report;
    report.instance_id = instance.instance_id;
    BlockedPairs blocked;  // fresh ledger per instance
    for (const auto& f : instance.reference.facts())
        report.decisions.push_back(evaluate_fact(f, *instance.generated, instance.question,
                                                 cfg, providers, blocked));
    finalize_instance_report(report, instance.reference.size());
    return report;
}

CorpusReport aggregate_corpus(std::vector<InstanceReport> instances, const UsageMeter* meter) {
    CorpusReport corpus;
    corpus.instances = std::move(instances);
    double total = 0.0;
    for (const auto& report : corpus.instances) {
        total += report.recall;
        for (const auto& warning : report.warnings)
            corpus.warnings.push_back(report.instance_id + ": " + warning);
        for (const auto& decision : report.decisions)
            for (const auto& entry : decision.trail)
                if (entry.protocol == Protocol::multi_choice &&
                    entry.verdict == TrailVerdict::no_match)
                    ++corpus.joint_rejections;
    }
    if (corpus.instances.empty()) {
        corpus.warnings.push_back("corpus is empty; mean recall reported as 0");
        corpus.mean_recall = 0.0;
    } else {
        corpus.mean_recall = total / static_cast<double>(corpus.instances.size());
    }
    if (meter != nullptr) corpus.usage = snapshot(*meter);
    return corpus;
}

CorpusReport evaluate_corpus(const std::vector<EvalInstance>& instances,
                             const PipelineConfig& cfg, const PipelineProviders& providers,
                             std::size_t parallelism, const UsageMeter* meter) {
    std::vector<InstanceReport> reports(instances.size());
    if (parallelism <= 1 || instances.size() <= 1) {
        for (std::size_t i = 0; i < instances.size(); ++i)
            reports[i] = evaluate_instance(instances[i], cfg, providers);
    } else {
        std::atomic<std::size_t> next{0};
        std::size_t workers = std::min(parallelism, instances.size());
        std::vector<std::thread> pool;
        pool.reserve(workers);
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                try {
                    for (std::size_t i = next.fetch_add(1); i < instances.size();
                         i = next.fetch_add(1))
                        reports[i] = evaluate_instance(instances[i], cfg, providers);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(instances.size());  // stop handing out work
                }
            });
        }
        for (auto& worker : pool) worker.join();
        if (failure) std::rethrow_exception(failure);
    }
    return aggregate_corpus(std::move(reports), meter);
}

}  // namespace recalleval
