#include "recalleval/preprocess.hpp"

#include "recalleval/similarity.hpp"

namespace recalleval {

FactSet dedupe_facts(const FactSet& set, double near_dup_ratio) {
    std::vector<Fact> kept;
    kept.reserve(set.size());
    for (const auto& fact : set.facts()) {
        bool duplicate = false;
        for (const auto& prior : kept) {
            if (prior.text() == fact.text() ||
                lcs_substring_ratio(prior.text(), fact.text()) >= near_dup_ratio) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(fact);
    }
    return FactSet::make(std::move(kept), set.origin());
}

}  // namespace recalleval
