#pragma once

#include <map>
#include <string>

namespace recalleval {

/// Text template with {name} placeholders. Values are inserted verbatim and
/// never rescanned, so fact text containing braces is safe.
class PromptTemplate {
public:
    PromptTemplate() = default;
    explicit PromptTemplate(std::string text);

    static PromptTemplate from_file(const std::string& path);

    /// Replaces every placeholder; throws ConfigError if the template names
    /// a placeholder the map does not provide.
    std::string render(const std::map<std::string, std::string>& values) const;

    const std::string& text() const { return text_; }

    /// Content digest, mixed into provider cache keys so template edits
    /// invalidate stale entries.
    const std::string& digest() const { return digest_; }

private:
    std::string text_;
    std::string digest_;
};

// Built-in templates, used unless a run overrides them with template files.
// Placeholders: coref {facts}; one-to-one {question} {reference} {candidate};
// multi-choice {question} {reference} {options}; holistic {question}
// {reference_facts} {generated_facts}.
const PromptTemplate& default_coref_template();
const PromptTemplate& default_one_to_one_template();
const PromptTemplate& default_multi_choice_template();
const PromptTemplate& default_holistic_template();

}  // namespace recalleval
