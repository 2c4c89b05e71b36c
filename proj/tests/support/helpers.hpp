#pragma once

// Shared fixtures and independent oracles for the test suite. The oracles
// are deliberately written in the most direct way possible (full DP tables,
// textbook formulas) so they cannot share a bug with the library code they
// check.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "recalleval/fact.hpp"
#include "recalleval/provider.hpp"
#include "recalleval/rng.hpp"
#include "recalleval/text.hpp"

namespace testsupport {

inline recalleval::Fact rfact(std::size_t ordinal, const std::string& text,
                              std::optional<std::string> anchor = std::nullopt) {
    return recalleval::Fact::make(
        recalleval::make_fact_id(recalleval::FactOrigin::reference, ordinal),
        std::move(anchor), text, recalleval::FactOrigin::reference);
}

inline recalleval::Fact gfact(std::size_t ordinal, const std::string& text,
                              std::optional<std::string> anchor = std::nullopt) {
    return recalleval::Fact::make(
        recalleval::make_fact_id(recalleval::FactOrigin::generated, ordinal),
        std::move(anchor), text, recalleval::FactOrigin::generated);
}

inline recalleval::FactSet ref_set(const std::vector<std::string>& texts) {
    std::vector<recalleval::Fact> facts;
    for (std::size_t i = 0; i < texts.size(); ++i) facts.push_back(rfact(i + 1, texts[i]));
    return recalleval::FactSet::make(std::move(facts), recalleval::FactOrigin::reference);
}

inline recalleval::FactSet gen_set(const std::vector<std::string>& texts) {
    std::vector<recalleval::Fact> facts;
    for (std::size_t i = 0; i < texts.size(); ++i) facts.push_back(gfact(i + 1, texts[i]));
    return recalleval::FactSet::make(std::move(facts), recalleval::FactOrigin::generated);
}

inline recalleval::EvalInstance make_instance(const std::string& id,
                                              const std::vector<std::string>& reference,
                                              const std::vector<std::string>& generated,
                                              const std::string& question = "q") {
    recalleval::EvalInstance instance;
    instance.instance_id = id;
    instance.question = question;
    instance.reference = ref_set(reference);
    instance.generated = gen_set(generated);
    return instance;
}

/// Scripted verdict table keyed on normalized fact texts. Drives a
/// MockChatTransport handler that understands the default one-to-one and
/// multi-choice prompt layouts, so tests exercise the real render/parse
/// path end to end.
class VerdictTable {
public:
    void set(const std::string& reference_text, const std::string& generated_text,
             bool entails) {
        table_[{recalleval::normalize_text(reference_text),
                recalleval::normalize_text(generated_text)}] = entails;
    }

    bool entails(const std::string& reference_text, const std::string& generated_text) const {
        auto it = table_.find({reference_text, generated_text});
        return it != table_.end() && it->second;
    }

    /// Handler for MockChatTransport covering both entailment protocols.
    recalleval::MockChatTransport::Handler handler() const {
        return [this](const recalleval::ChatRequest& request) {
            return answer(request.prompt);
        };
    }

private:
    static std::string slice(const std::string& text, const std::string& marker,
                             const std::string& end) {
        auto start = text.find(marker);
        if (start == std::string::npos) return "";
        start += marker.size();
        auto stop = text.find(end, start);
        if (stop == std::string::npos) stop = text.size();
        return text.substr(start, stop - start);
    }

    std::string answer(const std::string& prompt) const {
        std::string reference = slice(prompt, "Reference fact: ", "\n\n");
        if (prompt.find("Candidates:\n") != std::string::npos) {
            // Multi-choice: pick every candidate the table marks as entailing.
            std::string block = slice(prompt, "Candidates:\n", "\n\nSelect");
            std::istringstream lines(block);
            std::string line;
            std::string none_letter = "A";
            std::vector<std::string> picks;
            while (std::getline(lines, line)) {
                if (line.size() < 3 || line[1] != ')') continue;
                std::string letter(1, line[0]);
                std::string text = line.substr(3);
                if (text == "None of the above") {
                    none_letter = letter;
                    continue;
                }
                if (entails(reference, text)) picks.push_back(letter);
            }
            if (picks.empty()) return none_letter;
            std::string joined;
            for (const auto& letter : picks) {
                if (!joined.empty()) joined += ", ";
                joined += letter;
            }
            return joined;
        }
        std::string candidate = slice(prompt, "Candidate fact: ", "\n\n");
        return entails(reference, candidate) ? "Match" : "No Match";
    }

    std::map<std::pair<std::string, std::string>, bool> table_;
};

// ---- independent oracles -------------------------------------------------

/// Multiset (bag) Jaccard: sum of min counts over sum of max counts.
inline double bag_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::map<std::string, std::size_t> ca, cb;
    for (const auto& t : a) ++ca[t];
    for (const auto& t : b) ++cb[t];
    std::size_t min_sum = 0, max_sum = 0;
    std::set<std::string> keys;
    for (const auto& [k, _] : ca) keys.insert(k);
    for (const auto& [k, _] : cb) keys.insert(k);
    for (const auto& k : keys) {
        std::size_t x = ca.count(k) ? ca[k] : 0;
        std::size_t y = cb.count(k) ? cb[k] : 0;
        min_sum += std::min(x, y);
        max_sum += std::max(x, y);
    }
    if (max_sum == 0) return 1.0;  // both empty
    return static_cast<double>(min_sum) / static_cast<double>(max_sum);
}

/// Full-table subsequence LCS length over bytes (tests feed ASCII).
inline std::size_t lcs_subsequence_length(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> dp(a.size() + 1,
                                             std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1
                                            : std::max(dp[i - 1][j], dp[i][j - 1]);
    return dp[a.size()][b.size()];
}

/// Full-table longest common substring length over bytes.
inline std::size_t lcs_substring_length(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> dp(a.size() + 1,
                                             std::vector<std::size_t>(b.size() + 1, 0));
    std::size_t best = 0;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            if (a[i - 1] == b[j - 1]) {
                dp[i][j] = dp[i - 1][j - 1] + 1;
                best = std::max(best, dp[i][j]);
            }
    return best;
}

/// Textbook Fleiss kappa from an items x categories count matrix.
inline double fleiss_direct(const std::vector<std::vector<std::size_t>>& counts) {
    const std::size_t items = counts.size();
    const std::size_t categories = counts.front().size();
    std::size_t n = 0;
    for (auto c : counts.front()) n += c;

    double p_bar = 0.0;
    for (const auto& row : counts) {
        double sum_sq = 0.0;
        for (auto c : row) sum_sq += static_cast<double>(c) * static_cast<double>(c);
        p_bar += (sum_sq - static_cast<double>(n)) /
                 (static_cast<double>(n) * (static_cast<double>(n) - 1.0));
    }
    p_bar /= static_cast<double>(items);

    double p_e = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
        double col = 0.0;
        for (const auto& row : counts) col += static_cast<double>(row[j]);
        double p_j = col / static_cast<double>(items * n);
        p_e += p_j * p_j;
    }
    return (p_bar - p_e) / (1.0 - p_e);
}

// ---- random data ----------------------------------------------------------

inline std::string random_token(std::mt19937_64& rng, std::size_t max_len = 8) {
    static const char alphabet[] = "abcdefghij";
    std::size_t len = 1 + recalleval::uniform_below(rng, max_len);
    std::string token;
    for (std::size_t i = 0; i < len; ++i)
        token.push_back(alphabet[recalleval::uniform_below(rng, sizeof(alphabet) - 1)]);
    return token;
}

inline std::vector<std::string> random_token_list(std::mt19937_64& rng, std::size_t max_len = 6) {
    std::size_t len = recalleval::uniform_below(rng, max_len + 1);
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < len; ++i) tokens.push_back(random_token(rng, 4));
    return tokens;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& token : tokens) {
        if (!out.empty()) out += " ";
        out += token;
    }
    return out;
}

inline std::string random_string(std::mt19937_64& rng, std::size_t max_len = 12) {
    static const char alphabet[] = "abcde";
    std::size_t len = recalleval::uniform_below(rng, max_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i)
        s.push_back(alphabet[recalleval::uniform_below(rng, sizeof(alphabet) - 1)]);
    return s;
}

/// Unique temporary directory under the system temp root.
inline std::string make_temp_dir(const std::string& hint) {
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("recalleval-test-" + hint + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace testsupport
