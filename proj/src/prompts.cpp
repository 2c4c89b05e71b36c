#include "recalleval/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "recalleval/digest.hpp"
#include "recalleval/errors.hpp"

namespace recalleval {

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
    digest_ = sha256_hex(text_);
}

PromptTemplate PromptTemplate::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read prompt template: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return PromptTemplate(buf.str());
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    out.reserve(text_.size());
    std::size_t i = 0;
    const std::size_t n = text_.size();
    while (i < n) {
        if (text_[i] == '{') {
            std::size_t j = i + 1;
            while (j < n && (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_')) {
                ++j;
            }
            if (j < n && j > i + 1 && text_[j] == '}') {
                const std::string name = text_.substr(i + 1, j - i - 1);
                auto it = values.find(name);
                if (it == values.end()) {
                    throw ConfigError("template placeholder '" + name + "' has no value");
                }
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out.push_back(text_[i]);
        ++i;
    }
    return out;
}

const PromptTemplate& default_coref_template() {
    static const PromptTemplate tmpl(
        R"(Rewrite each fact below so that it stands alone: replace pronouns and other
anaphoric expressions with the explicit names or entities they refer to.
Keep meaning, wording and order otherwise unchanged. Return exactly one
rewritten fact per line, numbered to match the input.

Facts:
{facts}
)");
    return tmpl;
}

const PromptTemplate& default_one_to_one_template() {
    static const PromptTemplate tmpl(
        R"(You are verifying whether a candidate statement fully entails a reference fact.

Question: {question}

Reference fact: {reference}

Candidate fact: {candidate}

Does the candidate fact fully entail the reference fact, including its key
details? Reason briefly if needed, then answer on the final line with exactly
"Match" or "No Match".
)");
    return tmpl;
}

const PromptTemplate& default_multi_choice_template() {
    static const PromptTemplate tmpl(
        R"(You are checking which candidate statements entail a reference fact.

Question: {question}

Reference fact: {reference}

Candidates:
{options}

Select the single best candidate that fully entails the reference fact, or the
minimal set of candidates that collectively entail it. If nothing suffices,
select the "None of the above" option. Answer on the final line with option
letters only, comma-separated (for example "B" or "A, C").
)");
    return tmpl;
}

const PromptTemplate& default_holistic_template() {
    static const PromptTemplate tmpl(
        R"(You are measuring how completely a generated answer covers a reference answer.

Question: {question}

Reference facts:
{reference_facts}

Generated facts:
{generated_facts}

For every reference fact, decide which generated facts, if any, fully cover
it. Use only the listed generated fact ids. Answer with one line per reference
fact in the form "<reference id>: <comma-separated generated ids>" or
"<reference id>: none".
)");
    return tmpl;
}

}  // namespace recalleval
