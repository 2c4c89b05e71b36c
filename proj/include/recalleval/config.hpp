#pragma once

#include <cstddef>

namespace recalleval {

/// Thresholds and limits for the candidate-selection stages. Defaults sit at
/// the midpoints of the working ranges that held up across benchmarks; every
/// field is overridable per dataset.
struct PipelineConfig {
    double fuzzy_jaccard_threshold = 0.35;
    double lcs_threshold = 0.70;
    double cosine_threshold = 0.625;
    std::size_t top_k = 3;
    double fuzzy_token_similarity = 0.8;
    double erecall_threshold = 0.4;

    /// Throws ConfigError unless all ratios lie in [0,1] and top_k >= 1.
    void validate() const;
};

}  // namespace recalleval
