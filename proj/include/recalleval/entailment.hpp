#pragma once

#include <optional>
#include <string>
#include <vector>

#include "recalleval/cache.hpp"
#include "recalleval/candidates.hpp"
#include "recalleval/fact.hpp"
#include "recalleval/prompts.hpp"
#include "recalleval/provider.hpp"

namespace recalleval {

enum class VerdictKind { match, no_match };

/// Which protocol produced a verdict: a single-candidate yes/no question or
/// a lettered multiple-choice question.
enum class Protocol { one_to_one, multi_choice };

const char* to_string(VerdictKind kind);
const char* to_string(Protocol protocol);

struct Verdict {
    VerdictKind kind;
    Protocol source;
};

/// Generated fact ids credited with covering a reference fact. Always
/// non-empty, ids unique and present in the generated set.
class SupportSet {
public:
    static SupportSet make(std::vector<std::string> ids, const FactSet& generated);
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::vector<std::string> ids_;
};

/// Result of parsing a lettered multiple-choice reply: either the explicit
/// "none" option or one or more candidate indices (0-based, ascending).
struct OptionSelection {
    bool none = false;
    std::vector<std::size_t> indices;
};

/// Reads a Match / No Match verdict off the final non-empty line of a raw
/// model reply; nullopt when the line fits neither.
std::optional<VerdictKind> parse_match_verdict(const std::string& raw);

/// Reads option letters (or the none option) off the final non-empty line.
/// `option_count` includes the none option, which is always the last letter.
/// Returns nullopt for replies that are empty, mix none with letters, pick
/// letters outside the option range, or contain no recognizable choice.
std::optional<OptionSelection> parse_option_selection(const std::string& raw,
                                                      std::size_t option_count);

/// Option letter for a 0-based index: "A", "B", ... (at most 26 options).
std::string option_letter(std::size_t index);

/// Issues entailment questions through a cached chat client. A malformed
/// reply gets exactly one clarification round trip; a second malformed reply
/// is a ParseError naming the pair. All requests run at temperature 0.
class EntailmentJudge {
public:
    EntailmentJudge(CachedChatClient& chat, ChatParams params, PromptTemplate one_to_one,
                    PromptTemplate multi_choice);

    /// Asks whether g entails f. Never throws ParseError without having
    /// retried once with a clarification suffix.
    Verdict check_one_to_one(const std::string& question, const Fact& f, const Fact& g) const;

    /// Offers candidates (two or more) as lettered options plus "None of the
    /// above". Returns the supporting ids on a match, nullopt when the model
    /// picks none.
    std::optional<SupportSet> check_multi_choice(const std::string& question, const Fact& f,
                                                 const std::vector<Candidate>& candidates,
                                                 const FactSet& generated) const;

    const PromptTemplate& one_to_one_template() const { return one_to_one_; }
    const PromptTemplate& multi_choice_template() const { return multi_choice_; }

private:
    ChatRequest make_request(const std::string& prompt, const std::string& digest) const;

    CachedChatClient& chat_;
    ChatParams params_;
    PromptTemplate one_to_one_;
    PromptTemplate multi_choice_;
};

}  // namespace recalleval
