#include "recalleval/extraction.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "recalleval/errors.hpp"
#include "recalleval/text.hpp"

namespace recalleval {

ExtractionMode parse_extraction_mode(const std::string& name) {
    if (name == "listed") return ExtractionMode::listed;
    if (name == "mirrored_sentences") return ExtractionMode::mirrored_sentences;
    throw ConfigError("unknown extraction mode: " + name);
}

const char* to_string(ExtractionMode mode) {
    return mode == ExtractionMode::listed ? "listed" : "mirrored_sentences";
}

namespace {

std::string strip(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    lines.push_back(current);
    return lines;
}

bool starts_bracketed(const std::string& line) {
    auto s = strip(line);
    return !s.empty() && s.front() == '[';
}

/// "1. x", "2) y", "(3) z" style entry openers; returns the marker length
/// within the stripped line, or 0.
std::size_t numbering_prefix(const std::string& stripped) {
    std::size_t i = 0;
    bool parenthesized = false;
    if (i < stripped.size() && stripped[i] == '(') {
        parenthesized = true;
        ++i;
    }
    std::size_t digits_start = i;
    while (i < stripped.size() && std::isdigit(static_cast<unsigned char>(stripped[i]))) ++i;
    if (i == digits_start) return 0;
    if (i >= stripped.size()) return 0;
    if (parenthesized) {
        if (stripped[i] != ')') return 0;
        ++i;
    } else {
        if (stripped[i] != '.' && stripped[i] != ')') return 0;
        ++i;
    }
    if (i < stripped.size() && !std::isspace(static_cast<unsigned char>(stripped[i]))) return 0;
    while (i < stripped.size() && std::isspace(static_cast<unsigned char>(stripped[i]))) ++i;
    return i;
}

/// "- x", "* x", "• x" entry openers; returns marker length or 0.
std::size_t bullet_prefix(const std::string& stripped) {
    std::size_t glyph = 0;
    if (!stripped.empty() && (stripped[0] == '-' || stripped[0] == '*'))
        glyph = 1;
    else if (stripped.rfind("\xE2\x80\xA2", 0) == 0)  // U+2022 bullet
        glyph = 3;
    if (glyph == 0) return 0;
    std::size_t i = glyph;
    if (i < stripped.size() && !std::isspace(static_cast<unsigned char>(stripped[i]))) return 0;
    while (i < stripped.size() && std::isspace(static_cast<unsigned char>(stripped[i]))) ++i;
    return i;
}

/// Cuts the answer into entry strings using the highest-precedence marker
/// family that appears anywhere: bracketed heads, numbering, bullets, then
/// blank-line paragraphs. Marker-less lines continue the current entry;
/// preamble lines before the first marker (such as "Here are the facts:")
/// are dropped in the marker modes.
std::vector<std::string> segment_entries(const std::string& answer) {
    auto lines = split_lines(answer);

    bool any_bracket = false, any_number = false, any_bullet = false;
    for (const auto& line : lines) {
        auto stripped = strip(line);
        if (stripped.empty()) continue;
        if (starts_bracketed(stripped)) any_bracket = true;
        if (numbering_prefix(stripped) > 0) any_number = true;
        if (bullet_prefix(stripped) > 0) any_bullet = true;
    }

    std::vector<std::string> entries;
    auto append_continuation = [&](const std::string& stripped) {
        if (entries.empty() || stripped.empty()) return;
        entries.back() += " " + stripped;
    };

    if (any_bracket || any_number || any_bullet) {
        for (const auto& line : lines) {
            auto stripped = strip(line);
            if (stripped.empty()) continue;
            if (any_bracket) {
                if (starts_bracketed(stripped))
                    entries.push_back(stripped);
                else
                    append_continuation(stripped);
            } else if (any_number) {
                if (auto n = numbering_prefix(stripped); n > 0)
                    entries.push_back(stripped.substr(n));
                else
                    append_continuation(stripped);
            } else {
                if (auto n = bullet_prefix(stripped); n > 0)
                    entries.push_back(stripped.substr(n));
                else
                    append_continuation(stripped);
            }
        }
        return entries;
    }

    // No list markers: blank lines separate paragraphs; each paragraph is
    // one entry, and a single paragraph means one fact for the whole answer.
    std::string paragraph;
    for (const auto& line : lines) {
        if (is_blank(line)) {
            if (!paragraph.empty()) entries.push_back(paragraph);
            paragraph.clear();
        } else {
            if (!paragraph.empty()) paragraph += " ";
            paragraph += strip(line);
        }
    }
    if (!paragraph.empty()) entries.push_back(paragraph);
    return entries;
}

constexpr std::size_t kMaxHeadLength = 60;

struct HeadSplit {
    std::optional<std::string> anchor;
    std::string text;
};

/// Detects "[head]: evidence" and short colon-terminated heads. A head must
/// be short, free of sentence punctuation, and the colon must not sit
/// between digits (times like "3:30" are not heads).
HeadSplit split_entry_head(const std::string& entry) {
    if (!entry.empty() && entry.front() == '[') {
        auto close = entry.find(']');
        if (close != std::string::npos) {
            std::string head = strip(entry.substr(1, close - 1));
            std::size_t rest_start = close + 1;
            if (rest_start < entry.size() && entry[rest_start] == ':') ++rest_start;
            std::string rest = strip(entry.substr(rest_start));
            if (!head.empty()) return {head, rest.empty() ? head : rest};
        }
        return {std::nullopt, entry};
    }
    auto colon = entry.find(':');
    if (colon != std::string::npos && colon > 0) {
        bool digit_colon = colon + 1 < entry.size() &&
                           std::isdigit(static_cast<unsigned char>(entry[colon - 1])) &&
                           std::isdigit(static_cast<unsigned char>(entry[colon + 1]));
        std::string head = strip(entry.substr(0, colon));
        bool clean = !head.empty() && head.size() <= kMaxHeadLength &&
                     head.find_first_of(".!?") == std::string::npos;
        if (clean && !digit_colon) {
            std::string rest = strip(entry.substr(colon + 1));
            return {head, rest.empty() ? head : rest};
        }
    }
    return {std::nullopt, entry};
}

FactSet facts_from_entries(const std::vector<std::string>& entries, bool detect_heads) {
    std::vector<Fact> facts;
    for (const auto& entry : entries) {
        if (normalize_text(entry).empty()) continue;
        HeadSplit head = detect_heads ? split_entry_head(entry) : HeadSplit{std::nullopt, entry};
        auto id = make_fact_id(FactOrigin::generated, facts.size() + 1);
        facts.push_back(Fact::make(id, head.anchor, head.text, FactOrigin::generated));
    }
    if (facts.empty()) throw EmptyAnswer("no fact survives normalization");
    return FactSet::make(std::move(facts), FactOrigin::generated);
}

const std::array<const char*, 32>& abbreviation_guard() {
    static const std::array<const char*, 32> guard = {
        "mr",  "mrs", "ms",  "dr",  "prof", "sr",  "jr",   "st",  "rev", "gen", "col",
        "lt",  "sgt", "capt", "jan", "feb",  "mar", "apr",  "jun", "jul", "aug", "sep",
        "sept", "oct", "nov", "dec", "etc",  "vs",  "cf",   "al",  "no",  "fig"};
    return guard;
}

/// Whether the '.' at position i ends a guarded abbreviation ("Dr.", "e.g.",
/// a single initial) rather than a sentence.
bool guarded_abbreviation(const std::string& text, std::size_t i) {
    std::size_t end = i;
    std::size_t begin = end;
    while (begin > 0) {
        unsigned char c = static_cast<unsigned char>(text[begin - 1]);
        if (std::isalpha(c) || c == '.') --begin;
        else break;
    }
    if (begin == end) return false;
    std::string word = text.substr(begin, end - begin);
    std::string folded;
    for (char c : word)
        if (c != '.') folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (folded.size() == 1) return true;  // single initial, "J. Smith"
    if (word.find('.') != std::string::npos &&
        (folded == "eg" || folded == "ie")) return true;
    for (const char* g : abbreviation_guard())
        if (folded == g) return true;
    return false;
}

bool is_closing(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }
bool is_opening(char c) { return c == '"' || c == '\'' || c == '(' || c == '[' || c == '{'; }

std::vector<std::string> segment_sentences(const std::string& answer) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < answer.size(); ++i) {
        char c = answer[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (c == '.' && guarded_abbreviation(answer, i)) continue;
        std::size_t j = i + 1;
        while (j < answer.size() &&
               (answer[j] == '.' || answer[j] == '!' || answer[j] == '?' ||
                is_closing(answer[j])))
            ++j;
        std::size_t ws = j;
        while (ws < answer.size() && std::isspace(static_cast<unsigned char>(answer[ws]))) ++ws;
        if (ws == j) continue;  // punctuation must be followed by whitespace
        if (ws >= answer.size()) {
            sentences.push_back(answer.substr(start, j - start));
            start = answer.size();
            i = answer.size();
            break;
        }
        unsigned char next = static_cast<unsigned char>(answer[ws]);
        if (std::isupper(next) || std::isdigit(next) || is_opening(static_cast<char>(next))) {
            sentences.push_back(answer.substr(start, j - start));
            start = ws;
            i = ws - 1;
        }
    }
    if (start < answer.size()) sentences.push_back(answer.substr(start));
    return sentences;
}

}  // namespace

FactSet extract_list_facts(const std::string& answer) {
    if (normalize_text(answer).empty()) throw EmptyAnswer("generated answer is empty");
    return facts_from_entries(segment_entries(answer), /*detect_heads=*/true);
}

FactSet extract_mirrored_facts(const std::string& answer) {
    if (normalize_text(answer).empty()) throw EmptyAnswer("generated answer is empty");
    return facts_from_entries(segment_sentences(answer), /*detect_heads=*/false);
}

FactSet extract_facts(const std::string& answer, ExtractionMode mode) {
    return mode == ExtractionMode::listed ? extract_list_facts(answer)
                                          : extract_mirrored_facts(answer);
}

CorefResult resolve_coreference(const FactSet& facts, CachedChatClient& chat,
                                const ChatParams& params,
                                const PromptTemplate& coref_template) {
    CorefResult result{facts, {}};
    if (facts.empty()) return result;

    std::ostringstream listing;
    for (std::size_t i = 0; i < facts.size(); ++i)
        listing << (i + 1) << ". " << facts.at(i).text() << "\n";

    ChatRequest request;
    request.provider_id = params.provider_id;
    request.model_id = params.model_id;
    request.prompt = coref_template.render({{"facts", listing.str()}});
    request.max_output_tokens = params.max_output_tokens;
    request.template_digest = coref_template.digest();

    std::string reply;
    try {
        reply = chat.complete(request).text;
    } catch (const RecallError& e) {
        result.warnings.push_back(std::string("coreference call failed, facts kept as-is: ") +
                                  e.what());
        return result;
    }

    // Expect one "N. text" line per fact, each ordinal exactly once.
    std::vector<std::optional<std::string>> rewritten(facts.size());
    std::size_t matched = 0;
    std::istringstream lines(reply);
    std::string line;
    while (std::getline(lines, line)) {
        auto stripped = strip(line);
        std::size_t marker = numbering_prefix(stripped);
        if (marker == 0) continue;
        std::size_t ordinal = 0;
        for (char c : stripped) {
            if (!std::isdigit(static_cast<unsigned char>(c))) break;
            ordinal = ordinal * 10 + static_cast<std::size_t>(c - '0');
        }
        if (ordinal == 0 || ordinal > facts.size() || rewritten[ordinal - 1].has_value()) {
            result.warnings.push_back("coreference reply misnumbered, facts kept as-is");
            return result;
        }
        rewritten[ordinal - 1] = stripped.substr(marker);
        ++matched;
    }
    if (matched != facts.size()) {
        result.warnings.push_back("coreference reply has " + std::to_string(matched) +
                                  " lines for " + std::to_string(facts.size()) +
                                  " facts, facts kept as-is");
        return result;
    }

    std::vector<Fact> updated;
    for (std::size_t i = 0; i < facts.size(); ++i) {
        auto text = normalize_text(*rewritten[i]);
        if (text.empty()) {
            result.warnings.push_back("coreference rewrite of " + facts.at(i).id() +
                                      " is empty, original kept");
            updated.push_back(facts.at(i));
        } else {
            updated.push_back(facts.at(i).with_text(text));
        }
    }
    result.facts = FactSet::make(std::move(updated), facts.origin());
    return result;
}

}  // namespace recalleval
