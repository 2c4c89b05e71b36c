#pragma once

#include <optional>
#include <string>
#include <vector>

namespace recalleval {

enum class FactOrigin { reference, generated };
enum class FactKind { split_span, monolithic };

const char* to_string(FactOrigin origin);
const char* to_string(FactKind kind);

/// A self-contained statement extracted from a reference or generated answer.
/// Split-span facts carry a short anchor (entity or answer phrase) next to
/// the evidence text; monolithic facts are a single span. Immutable.
class Fact {
public:
    /// Normalizes both spans and validates the invariants: text non-empty
    /// after normalization, anchor present exactly when kind is split_span.
    /// Throws std::invalid_argument on violation.
    static Fact make(std::string id, std::optional<std::string> anchor, std::string text,
                     FactOrigin origin);

    const std::string& id() const { return id_; }
    const std::optional<std::string>& anchor() const { return anchor_; }
    const std::string& text() const { return text_; }
    FactOrigin origin() const { return origin_; }
    FactKind kind() const { return kind_; }

    /// Same fact with different text (already-normalized input expected);
    /// id, anchor and origin are preserved. Used by coreference rewriting.
    Fact with_text(std::string text) const;

private:
    Fact() = default;
    std::string id_;
    std::optional<std::string> anchor_;
    std::string text_;
    FactOrigin origin_ = FactOrigin::reference;
    FactKind kind_ = FactKind::monolithic;
};

/// Ordered collection of facts sharing one origin, with unique ids.
class FactSet {
public:
    FactSet() = default;

    /// Validates shared origin and id uniqueness; throws std::invalid_argument.
    static FactSet make(std::vector<Fact> facts, FactOrigin origin);

    const std::vector<Fact>& facts() const { return facts_; }
    FactOrigin origin() const { return origin_; }
    std::size_t size() const { return facts_.size(); }
    bool empty() const { return facts_.empty(); }
    const Fact& at(std::size_t i) const { return facts_.at(i); }

    /// Index of the fact with the given id, or nullopt.
    std::optional<std::size_t> index_of(const std::string& id) const;

private:
    std::vector<Fact> facts_;
    FactOrigin origin_ = FactOrigin::reference;
};

/// Fact ids follow "<origin>-<ordinal>", 1-based, so reports stay diffable.
std::string make_fact_id(FactOrigin origin, std::size_t ordinal);

/// One question with its reference facts and the generated side, which may
/// still be a raw answer awaiting extraction.
struct EvalInstance {
    std::string instance_id;
    std::string question;
    FactSet reference;                        // origin = reference
    std::optional<std::string> generated_raw; // raw answer, list markup intact for extraction
    std::optional<FactSet> generated;         // origin = generated

    bool needs_extraction() const { return !generated.has_value(); }
};

}  // namespace recalleval
