#pragma once

#include <string>
#include <vector>

namespace recalleval {

/// Whitespace tokenizer for normalized text. Leading and trailing ASCII
/// punctuation is stripped from each token, interior punctuation is kept
/// ("jean-luc" stays whole), empty tokens are dropped.
std::vector<std::string> tokenize(const std::string& text);

/// Normalized Levenshtein similarity: 1 - distance / max(|a|, |b|),
/// computed over code points. 1.0 when both are empty.
double levenshtein_similarity(const std::string& a, const std::string& b);

/// Token-level Jaccard overlap that tolerates small spelling variations.
/// Tokens are paired greedily in descending Levenshtein similarity; a pair
/// counts as matched when its similarity reaches token_sim. Returns
/// |matched| / (|A| + |B| - |matched|); 1.0 when both token lists are empty.
/// Symmetric and bounded in [0,1].
double fuzzy_jaccard(const std::string& a, const std::string& b, double token_sim = 0.8);

/// Longest common character subsequence over code points, divided by the
/// shorter length. 1.0 when both empty, 0.0 when exactly one is empty.
double lcs_subsequence_ratio(const std::string& a, const std::string& b);

/// Longest common contiguous substring over code points, divided by the
/// shorter length. Same edge conventions as the subsequence variant.
double lcs_substring_ratio(const std::string& a, const std::string& b);

}  // namespace recalleval
