#pragma once

#include <map>
#include <string>
#include <vector>

#include "recalleval/cache.hpp"
#include "recalleval/fact.hpp"
#include "recalleval/pipeline.hpp"
#include "recalleval/prompts.hpp"
#include "recalleval/provider.hpp"

namespace recalleval {

/// Anchor containment: a reference fact is covered when its anchor occurs
/// as a contiguous substring of any generated fact's text (both sides
/// already normalized). Substring semantics keep the metric's documented
/// false-positive mode ("bergman" inside "bergman jr."); pass word_boundary
/// to require whole-word hits instead. Throws MissingAnchor for a reference
/// fact without an anchor.
InstanceReport arecall(const EvalInstance& instance, bool word_boundary = false);

/// Longest-common-substring coverage: covered when the max substring ratio
/// against any generated fact strictly exceeds the threshold.
InstanceReport erecall(const EvalInstance& instance, double threshold = 0.4);

/// What the holistic judge said, kept verbatim for audit. Only ids that
/// exist in G survive into mapping; ids echoing a reference id (the
/// self-mapping failure mode) and unknown ids are stripped and counted.
struct HolisticMapping {
    std::map<std::string, std::vector<std::string>> mapping;
    std::string raw_response;
    std::size_t invalid_id_count = 0;
    std::size_t self_map_count = 0;
};

struct HolisticResult {
    HolisticMapping mapping;
    InstanceReport report;
};

/// One prompt carrying the question and both fact sets; the reply maps each
/// reference id to the generated ids covering it (or "none"). A reference
/// fact is covered when its validated list is non-empty.
HolisticResult holistic_judge(const EvalInstance& instance, CachedChatClient& chat,
                              const ChatParams& params, const PromptTemplate& holistic_template);

}  // namespace recalleval
