#include "recalleval/entailment.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "recalleval/errors.hpp"

namespace recalleval {

const char* to_string(VerdictKind kind) {
    return kind == VerdictKind::match ? "match" : "no_match";
}

const char* to_string(Protocol protocol) {
    return protocol == Protocol::one_to_one ? "one_to_one" : "multi_choice";
}

SupportSet SupportSet::make(std::vector<std::string> ids, const FactSet& generated) {
    if (ids.empty()) throw std::invalid_argument("support set must name at least one fact");
    std::set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second)
            throw std::invalid_argument("support set repeats fact id: " + id);
        if (!generated.index_of(id))
            throw std::invalid_argument("support set names unknown generated fact: " + id);
    }
    SupportSet support;
    support.ids_ = std::move(ids);
    return support;
}

namespace {

/// Final non-empty line of a reply, lowercased, with surrounding space and
/// ASCII punctuation noise trimmed off.
std::string final_line(const std::string& raw) {
    std::string line;
    std::size_t end = raw.size();
    while (end > 0) {
        std::size_t start = raw.rfind('\n', end - 1);
        std::size_t begin = (start == std::string::npos) ? 0 : start + 1;
        line = raw.substr(begin, end - begin);
        auto is_blank = [](unsigned char c) { return std::isspace(c) != 0; };
        if (!std::all_of(line.begin(), line.end(), is_blank)) break;
        line.clear();
        if (start == std::string::npos) break;
        end = start;
    }
    std::string folded;
    folded.reserve(line.size());
    for (unsigned char c : line) folded.push_back(static_cast<char>(std::tolower(c)));
    while (!folded.empty() && (std::isspace(static_cast<unsigned char>(folded.back())) ||
                               std::ispunct(static_cast<unsigned char>(folded.back()))))
        folded.pop_back();
    while (!folded.empty() && (std::isspace(static_cast<unsigned char>(folded.front())) ||
                               std::ispunct(static_cast<unsigned char>(folded.front()))))
        folded.erase(folded.begin());
    return folded;
}

}  // namespace

std::optional<VerdictKind> parse_match_verdict(const std::string& raw) {
    std::string line = final_line(raw);
    if (line.empty()) return std::nullopt;
    // "no match" must win over the "match" it contains.
    if (line.find("no match") != std::string::npos ||
        line.find("no-match") != std::string::npos ||
        line.find("no_match") != std::string::npos)
        return VerdictKind::no_match;
    if (line.find("match") != std::string::npos) return VerdictKind::match;
    return std::nullopt;
}

std::string option_letter(std::size_t index) {
    if (index >= 26) throw std::invalid_argument("option index out of letter range");
    return std::string(1, static_cast<char>('A' + index));
}

std::optional<OptionSelection> parse_option_selection(const std::string& raw,
                                                      std::size_t option_count) {
    if (option_count < 2 || option_count > 26) return std::nullopt;
    std::string line = final_line(raw);
    if (line.empty()) return std::nullopt;

    // Tokenize on anything non-alphanumeric; single letters are option picks,
    // the word "none" is the none option, other words are chatter.
    std::vector<std::string> words;
    std::string current;
    for (unsigned char c : line) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(c));
        } else if (!current.empty()) {
            words.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) words.push_back(current);

    const std::size_t none_index = option_count - 1;
    bool none = false;
    std::set<std::size_t> picked;
    for (const auto& word : words) {
        if (word == "none") {
            none = true;
        } else if (word.size() == 1 && word[0] >= 'a' && word[0] <= 'z') {
            auto index = static_cast<std::size_t>(word[0] - 'a');
            if (index >= option_count) return std::nullopt;  // letter beyond the options
            if (index == none_index)
                none = true;
            else
                picked.insert(index);
        }
    }
    if (none && !picked.empty()) return std::nullopt;  // contradictory reply
    if (!none && picked.empty()) return std::nullopt;

    OptionSelection selection;
    selection.none = none;
    selection.indices.assign(picked.begin(), picked.end());
    return selection;
}

EntailmentJudge::EntailmentJudge(CachedChatClient& chat, ChatParams params,
                                 PromptTemplate one_to_one, PromptTemplate multi_choice)
    : chat_(chat),
      params_(std::move(params)),
      one_to_one_(std::move(one_to_one)),
      multi_choice_(std::move(multi_choice)) {}

ChatRequest EntailmentJudge::make_request(const std::string& prompt,
                                          const std::string& digest) const {
    ChatRequest request;
    request.provider_id = params_.provider_id;
    request.model_id = params_.model_id;
    request.prompt = prompt;
    request.max_output_tokens = params_.max_output_tokens;
    request.template_digest = digest;
    return request;
}

namespace {

constexpr const char* kClarifyOneToOne =
    "\n\nYour previous reply could not be parsed. Answer again, and make the"
    " final line exactly \"Match\" or \"No Match\".";
constexpr const char* kClarifyMultiChoice =
    "\n\nYour previous reply could not be parsed. Answer again, and make the"
    " final line only option letters separated by commas.";

}  // namespace

Verdict EntailmentJudge::check_one_to_one(const std::string& question, const Fact& f,
                                          const Fact& g) const {
    std::string prompt = one_to_one_.render(
        {{"question", question}, {"reference", f.text()}, {"candidate", g.text()}});
    auto reply = chat_.complete(make_request(prompt, one_to_one_.digest()));
    auto verdict = parse_match_verdict(reply.text);
    if (!verdict) {
        // One clarification round trip before giving up on the pair.
        auto retry = chat_.complete(make_request(prompt + kClarifyOneToOne, one_to_one_.digest()));
        verdict = parse_match_verdict(retry.text);
        if (!verdict)
            throw ParseError("unparseable entailment verdict for pair (" + f.id() + ", " +
                             g.id() + "): " + retry.text);
    }
    return Verdict{*verdict, Protocol::one_to_one};
}

std::optional<SupportSet> EntailmentJudge::check_multi_choice(
    const std::string& question, const Fact& f, const std::vector<Candidate>& candidates,
    const FactSet& generated) const {
    if (candidates.size() < 2)
        throw std::invalid_argument("multi-choice protocol needs at least two candidates");
    if (candidates.size() > 25)
        throw std::invalid_argument("multi-choice protocol supports at most 25 candidates");

    std::ostringstream options;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto index = generated.index_of(candidates[i].generated_id);
        if (!index)
            throw std::invalid_argument("candidate names unknown generated fact: " +
                                        candidates[i].generated_id);
        options << option_letter(i) << ") " << generated.at(*index).text() << "\n";
    }
    const std::size_t none_index = candidates.size();
    options << option_letter(none_index) << ") None of the above";

    std::string prompt = multi_choice_.render(
        {{"question", question}, {"reference", f.text()}, {"options", options.str()}});
    const std::size_t option_count = candidates.size() + 1;

    auto reply = chat_.complete(make_request(prompt, multi_choice_.digest()));
    auto selection = parse_option_selection(reply.text, option_count);
    if (!selection) {
        auto retry =
            chat_.complete(make_request(prompt + kClarifyMultiChoice, multi_choice_.digest()));
        selection = parse_option_selection(retry.text, option_count);
        if (!selection) {
            std::ostringstream ids;
            for (const auto& c : candidates) ids << " " << c.generated_id;
            throw ParseError("unparseable option selection for reference " + f.id() +
                             " against" + ids.str() + ": " + retry.text);
        }
    }
    if (selection->none) return std::nullopt;
    std::vector<std::string> ids;
    for (auto index : selection->indices) ids.push_back(candidates[index].generated_id);
    return SupportSet::make(std::move(ids), generated);
}

}  // namespace recalleval
