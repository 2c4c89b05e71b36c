#include "recalleval/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "recalleval/errors.hpp"
#include "recalleval/similarity.hpp"

namespace recalleval {

namespace {

bool is_word_byte(unsigned char c) {
    // Multibyte sequences count as word characters; boundaries are ASCII-only.
    return std::isalnum(c) != 0 || c >= 0x80;
}

bool contains_at_word_boundary(const std::string& haystack, const std::string& needle) {
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + 1)) {
        bool left_ok = pos == 0 || !is_word_byte(static_cast<unsigned char>(haystack[pos - 1]));
        std::size_t end = pos + needle.size();
        bool right_ok =
            end == haystack.size() || !is_word_byte(static_cast<unsigned char>(haystack[end]));
        if (left_ok && right_ok) return true;
    }
    return false;
}

MatchDecision lexical_decision(const Fact& f, const FactSet& generated,
                               std::vector<std::string> support_ids) {
    MatchDecision decision;
    decision.reference_id = f.id();
    if (!support_ids.empty()) {
        decision.covered = true;
        decision.stage = Stage::lexical;
        decision.support = SupportSet::make(std::move(support_ids), generated);
    }
    return decision;
}

const FactSet& generated_or_throw(const EvalInstance& instance) {
    if (!instance.generated.has_value())
        throw std::invalid_argument("instance " + instance.instance_id +
                                    " has no extracted generated facts");
    return *instance.generated;
}

}  // namespace

InstanceReport arecall(const EvalInstance& instance, bool word_boundary) {
    const FactSet& generated = generated_or_throw(instance);
    InstanceReport report;
    report.instance_id = instance.instance_id;
    for (const auto& f : instance.reference.facts()) {
        if (!f.anchor().has_value())
            throw MissingAnchor("reference fact " + f.id() + " in instance " +
                                instance.instance_id + " has no anchor");
        std::vector<std::string> hits;
        for (const auto& g : generated.facts()) {
            bool hit = word_boundary
                           ? contains_at_word_boundary(g.text(), *f.anchor())
                           : g.text().find(*f.anchor()) != std::string::npos;
            if (hit) hits.push_back(g.id());
        }
        report.decisions.push_back(lexical_decision(f, generated, std::move(hits)));
    }
    finalize_instance_report(report, instance.reference.size());
    return report;
}

InstanceReport erecall(const EvalInstance& instance, double threshold) {
    const FactSet& generated = generated_or_throw(instance);
    InstanceReport report;
    report.instance_id = instance.instance_id;
    for (const auto& f : instance.reference.facts()) {
        std::vector<std::string> hits;
        for (const auto& g : generated.facts()) {
            // Strictly above the threshold, so a ratio equal to it does not count.
            if (lcs_substring_ratio(f.text(), g.text()) > threshold) hits.push_back(g.id());
        }
        report.decisions.push_back(lexical_decision(f, generated, std::move(hits)));
    }
    finalize_instance_report(report, instance.reference.size());
    return report;
}

namespace {

std::string strip_copy(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && (std::isspace(static_cast<unsigned char>(s[begin])) ||
                           s[begin] == '-' || s[begin] == '*'))
        ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::vector<std::string> split_id_tokens(const std::string& s) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
            current.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

}  // namespace

HolisticResult holistic_judge(const EvalInstance& instance, CachedChatClient& chat,
                              const ChatParams& params,
                              const PromptTemplate& holistic_template) {
    const FactSet& generated = generated_or_throw(instance);
    const FactSet& reference = instance.reference;

    HolisticResult result;
    result.report.instance_id = instance.instance_id;

    auto uncovered = [](const std::string& id) {
        MatchDecision decision;
        decision.reference_id = id;
        return decision;
    };

    if (generated.empty()) {
        for (const auto& f : reference.facts()) {
            result.mapping.mapping[f.id()] = {};
            result.report.decisions.push_back(uncovered(f.id()));
        }
        finalize_instance_report(result.report, reference.size());
        return result;
    }

    std::ostringstream ref_lines, gen_lines;
    for (const auto& f : reference.facts()) ref_lines << f.id() << ": " << f.text() << "\n";
    for (const auto& g : generated.facts()) gen_lines << g.id() << ": " << g.text() << "\n";

    ChatRequest request;
    request.provider_id = params.provider_id;
    request.model_id = params.model_id;
    request.prompt = holistic_template.render({{"question", instance.question},
                                               {"reference_facts", ref_lines.str()},
                                               {"generated_facts", gen_lines.str()}});
    request.max_output_tokens = params.max_output_tokens;
    request.template_digest = holistic_template.digest();

    result.mapping.raw_response = chat.complete(request).text;

    // Pull "reference-id: id, id" lines out of the reply.
    std::map<std::string, std::vector<std::string>> parsed;
    std::istringstream lines(result.mapping.raw_response);
    std::string line;
    while (std::getline(lines, line)) {
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string left = strip_copy(line.substr(0, colon));
        if (!reference.index_of(left)) continue;
        if (parsed.count(left) > 0) continue;  // first mapping line wins
        std::vector<std::string> ids;
        std::set<std::string> seen;
        for (const auto& token : split_id_tokens(line.substr(colon + 1))) {
            if (token == "none") continue;
            if (!seen.insert(token).second) continue;
            if (generated.index_of(token)) {
                ids.push_back(token);
            } else if (reference.index_of(token)) {
                ++result.mapping.self_map_count;  // judge mapped the fact to itself
            } else {
                ++result.mapping.invalid_id_count;
            }
        }
        parsed[left] = std::move(ids);
    }
    if (parsed.empty())
        throw ParseError("holistic reply for instance " + instance.instance_id +
                         " contains no recognizable mapping lines");

    for (const auto& f : reference.facts()) {
        auto found = parsed.find(f.id());
        MatchDecision decision = uncovered(f.id());
        if (found == parsed.end()) {
            decision.warnings.push_back("holistic reply never mentions " + f.id() +
                                        "; treated as uncovered");
            result.mapping.mapping[f.id()] = {};
        } else {
            result.mapping.mapping[f.id()] = found->second;
            if (!found->second.empty()) {
                decision.covered = true;
                decision.stage = Stage::semantic;
                decision.support = SupportSet::make(found->second, generated);
            }
        }
        result.report.decisions.push_back(std::move(decision));
    }
    finalize_instance_report(result.report, reference.size());
    return result;
}

}  // namespace recalleval
