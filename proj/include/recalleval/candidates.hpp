#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "recalleval/config.hpp"
#include "recalleval/embedding.hpp"
#include "recalleval/fact.hpp"

namespace recalleval {

enum class Stage { lexical, semantic, none };

const char* to_string(Stage stage);

/// One generated fact admitted by a filter stage, with its admission score.
struct Candidate {
    std::string generated_id;
    double score = 0.0;
    Stage stage = Stage::lexical;
    double tiebreak_score = 0.0;  // subsequence LCS for lexical, 0 for semantic
};

/// (reference id, generated id) pairs already rejected by an entailment
/// verdict; excluded from every later selection round.
using BlockedPairs = std::set<std::pair<std::string, std::string>>;

/// Surface-similarity filter. Admits generated facts whose fuzzy Jaccard
/// against f reaches cfg.fuzzy_jaccard_threshold, ranked by score with the
/// subsequence-LCS ratio breaking ties and input order breaking the rest,
/// truncated to cfg.top_k. When both facts carry anchors the anchors are
/// compared; otherwise the full texts are.
std::vector<Candidate> select_lexical(const Fact& f, const FactSet& generated,
                                      const BlockedPairs& blocked, const PipelineConfig& cfg);

/// Embedding filter for paraphrased matches lexical overlap misses. Embeds
/// full texts (reference as query, generated as documents), admits cosine >=
/// cfg.cosine_threshold, ranks by cosine then input order, truncates to
/// cfg.top_k. Blocked pairs never reappear.
std::vector<Candidate> select_semantic(const Fact& f, const FactSet& generated,
                                       const BlockedPairs& blocked, const PipelineConfig& cfg,
                                       EmbeddingProvider& embedder);

}  // namespace recalleval
