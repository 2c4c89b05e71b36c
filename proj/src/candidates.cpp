#include "recalleval/candidates.hpp"

#include <algorithm>

#include "recalleval/similarity.hpp"

namespace recalleval {

const char* to_string(Stage stage) {
    switch (stage) {
        case Stage::lexical: return "lexical";
        case Stage::semantic: return "semantic";
        default: return "none";
    }
}

namespace {

struct Scored {
    std::size_t ordinal;
    Candidate candidate;
};

std::vector<Candidate> rank_and_truncate(std::vector<Scored> scored, std::size_t top_k) {
    std::sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
        if (x.candidate.score != y.candidate.score) return x.candidate.score > y.candidate.score;
        if (x.candidate.tiebreak_score != y.candidate.tiebreak_score) {
            return x.candidate.tiebreak_score > y.candidate.tiebreak_score;
        }
        return x.ordinal < y.ordinal;
    });
    if (scored.size() > top_k) scored.resize(top_k);
    std::vector<Candidate> out;
    out.reserve(scored.size());
    for (auto& s : scored) out.push_back(std::move(s.candidate));
    return out;
}

}  // namespace

std::vector<Candidate> select_lexical(const Fact& f, const FactSet& generated,
                                      const BlockedPairs& blocked, const PipelineConfig& cfg) {
    std::vector<Scored> scored;
    for (std::size_t i = 0; i < generated.size(); ++i) {
        const Fact& g = generated.at(i);
        if (blocked.count({f.id(), g.id()})) continue;
        // Anchors carry the strongest alignment signal on split-span facts.
        const bool use_anchors = f.anchor().has_value() && g.anchor().has_value();
        const std::string& fa = use_anchors ? *f.anchor() : f.text();
        const std::string& ga = use_anchors ? *g.anchor() : g.text();
        const double score = fuzzy_jaccard(fa, ga, cfg.fuzzy_token_similarity);
        if (score < cfg.fuzzy_jaccard_threshold) continue;
        scored.push_back({i, Candidate{g.id(), score, Stage::lexical,
                                       lcs_subsequence_ratio(fa, ga)}});
    }
    return rank_and_truncate(std::move(scored), cfg.top_k);
}

std::vector<Candidate> select_semantic(const Fact& f, const FactSet& generated,
                                       const BlockedPairs& blocked, const PipelineConfig& cfg,
                                       EmbeddingProvider& embedder) {
    std::vector<std::size_t> ordinals;
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < generated.size(); ++i) {
        const Fact& g = generated.at(i);
        if (blocked.count({f.id(), g.id()})) continue;
        ordinals.push_back(i);
        texts.push_back(g.text());
    }
    if (ordinals.empty()) return {};

    const auto query = embedder.embed({f.text()}, EmbedRole::query);
    const auto docs = embedder.embed(texts, EmbedRole::document);

    std::vector<Scored> scored;
    for (std::size_t k = 0; k < ordinals.size(); ++k) {
        const double score = cosine(query.at(0), docs.at(k));
        if (score < cfg.cosine_threshold) continue;
        const Fact& g = generated.at(ordinals[k]);
        scored.push_back({ordinals[k], Candidate{g.id(), score, Stage::semantic, 0.0}});
    }
    return rank_and_truncate(std::move(scored), cfg.top_k);
}

}  // namespace recalleval
