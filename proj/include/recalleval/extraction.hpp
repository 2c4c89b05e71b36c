#pragma once

#include <string>
#include <vector>

#include "recalleval/cache.hpp"
#include "recalleval/fact.hpp"
#include "recalleval/prompts.hpp"
#include "recalleval/provider.hpp"

namespace recalleval {

/// How a generated answer is decomposed into facts. "listed" segments on
/// list structure (bracketed heads, numbering, bullets, blank lines) and is
/// the right mode when references are entry-per-line; "mirrored_sentences"
/// segments on sentence boundaries to mirror sentence-granular references.
enum class ExtractionMode { listed, mirrored_sentences };

ExtractionMode parse_extraction_mode(const std::string& name);
const char* to_string(ExtractionMode mode);

struct ExtractionPolicy {
    ExtractionMode mode = ExtractionMode::listed;
    bool coref = false;  // rewrite pronouns to explicit mentions via the chat provider
};

/// Splits a raw list-shaped answer into one fact per entry. Entry detection
/// precedence: bracketed heads, then "N." / "N)" numbering, then bullet
/// glyphs, then blank-line paragraphs; an answer with none of these becomes
/// a single fact. An entry opening with "[head]: evidence" or a short
/// colon-terminated head becomes a split-span fact (head as anchor);
/// everything else is monolithic. Throws EmptyAnswer when nothing survives
/// normalization.
FactSet extract_list_facts(const std::string& answer);

/// Splits a raw prose answer at sentence boundaries: terminal punctuation,
/// optional closing quotes/brackets, whitespace, then an uppercase letter,
/// digit, or opening character. A guard list (honorifics, month
/// abbreviations, "e.g."/"i.e.", single initials) keeps abbreviations
/// intact. Each sentence is one monolithic fact. Throws EmptyAnswer.
FactSet extract_mirrored_facts(const std::string& answer);

/// Dispatches on policy mode. A hook for finer LLM-driven decomposition can
/// slot in here later; the two modes above cover list- and prose-shaped
/// answers.
FactSet extract_facts(const std::string& answer, ExtractionMode mode);

struct CorefResult {
    FactSet facts;
    std::vector<std::string> warnings;
};

/// Rewrites anaphoric expressions ("he", "it") to explicit mentions with a
/// single chat call covering the whole answer, so cross-sentence context is
/// available. Fact count, order, ids, and anchors never change. On provider
/// or parse failure the original facts are kept and a warning is recorded;
/// this never throws for provider-side problems.
CorefResult resolve_coreference(const FactSet& facts, CachedChatClient& chat,
                                const ChatParams& params,
                                const PromptTemplate& coref_template);

}  // namespace recalleval
