#include "recalleval/config.hpp"

#include <string>

#include "recalleval/errors.hpp"

namespace recalleval {

namespace {
void check_ratio(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError(std::string(name) + " must lie in [0,1], got " + std::to_string(v));
    }
}
}  // namespace

void PipelineConfig::validate() const {
    check_ratio(fuzzy_jaccard_threshold, "fuzzy_jaccard_threshold");
    check_ratio(lcs_threshold, "lcs_threshold");
    check_ratio(cosine_threshold, "cosine_threshold");
    check_ratio(fuzzy_token_similarity, "fuzzy_token_similarity");
    check_ratio(erecall_threshold, "erecall_threshold");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
}

}  // namespace recalleval
