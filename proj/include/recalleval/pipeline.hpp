#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recalleval/candidates.hpp"
#include "recalleval/config.hpp"
#include "recalleval/embedding.hpp"
#include "recalleval/entailment.hpp"
#include "recalleval/fact.hpp"
#include "recalleval/provider.hpp"

namespace recalleval {

enum class TrailVerdict { match, no_match, error };

const char* to_string(TrailVerdict verdict);

/// One entailment consultation: which generated facts were offered, under
/// which protocol, and what came back.
struct TrailEntry {
    std::vector<std::string> generated_ids;
    Protocol protocol = Protocol::one_to_one;
    TrailVerdict verdict = TrailVerdict::no_match;
};

/// Outcome for one reference fact. covered, support and stage move together:
/// a covered fact has a support set and the stage that produced it; an
/// uncovered fact has neither.
struct MatchDecision {
    std::string reference_id;
    bool covered = false;
    std::optional<SupportSet> support;
    Stage stage = Stage::none;
    std::vector<TrailEntry> trail;
    std::vector<std::string> warnings;
};

struct InstanceReport {
    std::string instance_id;
    std::vector<MatchDecision> decisions;  // one per reference fact, input order
    std::size_t covered_count = 0;
    double recall = 0.0;  // covered_count / |F|
    std::vector<std::string> warnings;
};

struct CorpusReport {
    std::vector<InstanceReport> instances;
    double mean_recall = 0.0;
    UsageTotals usage;
    /// How often a multi-choice "None of the above" rejected a whole
    /// candidate group at once, kept visible so joint blocking is auditable.
    std::uint64_t joint_rejections = 0;
    std::vector<std::string> warnings;
};

/// Everything evaluate_* needs to reach the outside world.
struct PipelineProviders {
    const EntailmentJudge* judge = nullptr;
    EmbeddingProvider* embedder = nullptr;
};

/// Runs the two-round filter/verify loop for one reference fact: lexical
/// candidates, entailment, blocking of rejected pairs, then semantic
/// candidates over the remainder, entailment again. Covered facts stop at
/// the earliest stage. A stage with one candidate uses the one-to-one
/// protocol, with several the multi-choice protocol, with none it is
/// skipped. Provider or parse failures leave the fact uncovered with a
/// warning instead of aborting.
MatchDecision evaluate_fact(const Fact& f, const FactSet& generated,
                            const std::string& question, const PipelineConfig& cfg,
                            const PipelineProviders& providers, BlockedPairs& blocked);

/// Evaluates every reference fact with a fresh blocked ledger and applies
/// the recall ratio: covered facts over total reference facts.
InstanceReport evaluate_instance(const EvalInstance& instance, const PipelineConfig& cfg,
                                 const PipelineProviders& providers);

/// Evaluates instances (in parallel when parallelism > 1; results keep input
/// order) and aggregates the arithmetic mean of instance recalls.
CorpusReport evaluate_corpus(const std::vector<EvalInstance>& instances,
                             const PipelineConfig& cfg, const PipelineProviders& providers,
                             std::size_t parallelism, const UsageMeter* meter = nullptr);

/// Recomputes covered_count, recall and instance warnings for a report whose
/// decisions are already filled in; shared by the pipeline and baselines.
void finalize_instance_report(InstanceReport& report, std::size_t reference_count);

/// Mean recall + usage totals wrapper shared by all corpus-level runners.
CorpusReport aggregate_corpus(std::vector<InstanceReport> instances, const UsageMeter* meter);

}  // namespace recalleval
