#include "recalleval/fact.hpp"

#include <stdexcept>
#include <unordered_set>

#include "recalleval/text.hpp"

namespace recalleval {

const char* to_string(FactOrigin origin) {
    return origin == FactOrigin::reference ? "reference" : "generated";
}

const char* to_string(FactKind kind) {
    return kind == FactKind::split_span ? "split_span" : "monolithic";
}

Fact Fact::make(std::string id, std::optional<std::string> anchor, std::string text,
                FactOrigin origin) {
    if (id.empty()) throw std::invalid_argument("fact id must be non-empty");
    Fact f;
    f.id_ = std::move(id);
    f.text_ = normalize_text(text);
    if (f.text_.empty()) {
        throw std::invalid_argument("fact '" + f.id_ + "' has empty text after normalization");
    }
    if (anchor.has_value()) {
        std::string a = normalize_text(*anchor);
        if (a.empty()) {
            throw std::invalid_argument("fact '" + f.id_ + "' has empty anchor after normalization");
        }
        f.anchor_ = std::move(a);
        f.kind_ = FactKind::split_span;
    } else {
        f.kind_ = FactKind::monolithic;
    }
    f.origin_ = origin;
    return f;
}

Fact Fact::with_text(std::string text) const {
    return make(id_, anchor_, std::move(text), origin_);
}

FactSet FactSet::make(std::vector<Fact> facts, FactOrigin origin) {
    std::unordered_set<std::string> seen;
    for (const auto& f : facts) {
        if (f.origin() != origin) {
            throw std::invalid_argument("fact '" + f.id() + "' origin differs from its set");
        }
        if (!seen.insert(f.id()).second) {
            throw std::invalid_argument("duplicate fact id '" + f.id() + "'");
        }
    }
    FactSet s;
    s.facts_ = std::move(facts);
    s.origin_ = origin;
    return s;
}

std::optional<std::size_t> FactSet::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < facts_.size(); ++i) {
        if (facts_[i].id() == id) return i;
    }
    return std::nullopt;
}

std::string make_fact_id(FactOrigin origin, std::size_t ordinal) {
    return std::string(to_string(origin)) + "-" + std::to_string(ordinal);
}

}  // namespace recalleval
