#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace recalleval {

enum class PairLabelValue { match, no_match };

PairLabelValue parse_pair_label(const std::string& name);
const char* to_string(PairLabelValue value);

/// One rater's or method's judgment of one (instance, reference fact) pair.
struct PairLabel {
    std::string instance_id;
    std::string reference_id;
    std::string source_id;  // method name or rater id
    PairLabelValue label = PairLabelValue::no_match;
};

using PairKey = std::pair<std::string, std::string>;  // (instance_id, reference_id)

/// Labels indexed by pair and source, with at most one label per (pair,
/// source). Pairs and sources are exposed in sorted order so every
/// downstream computation is order-independent of the input file.
class LabelTable {
public:
    static LabelTable make(const std::vector<PairLabel>& labels);

    const std::vector<PairKey>& pairs() const { return pairs_; }
    const std::vector<std::string>& sources() const { return sources_; }
    std::optional<PairLabelValue> label(const PairKey& pair, const std::string& source) const;
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    /// Restriction to a single source; used to compare one method to gold.
    LabelTable select_source(const std::string& source) const;

private:
    std::map<PairKey, std::map<std::string, PairLabelValue>> cells_;
    std::vector<PairKey> pairs_;
    std::vector<std::string> sources_;
};

struct KappaResult {
    double kappa = 0.0;
    /// True when expected agreement is 1 (a single category everywhere), in
    /// which case the statistic is fixed at 1.0 by convention.
    bool degenerate = false;
    std::vector<std::string> warnings;
};

/// Fleiss' kappa over the table. Every pair must be labeled by the same
/// number (at least two) of sources; otherwise UnequalRaterCounts.
KappaResult fleiss_kappa(const LabelTable& labels);

struct PrfResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    /// Set when any of the three hit an empty denominator and fell back to 0.
    bool zero_denominator = false;
};

/// Precision/recall/F1 of a single-source prediction table against a
/// single-source gold table over the identical pair set ("match" is the
/// positive class). Pair set differences raise PairSetMismatch.
PrfResult pair_prf(const LabelTable& predictions, const LabelTable& gold);

enum class Tier { full, partial, singleton, no_match };

const char* to_string(Tier tier);

struct TierInfo {
    Tier tier = Tier::no_match;
    std::string method;  // set only for singleton tiers
};

/// Per-pair tier assignment over M methods: all M said match (full), 2..M-1
/// did (partial), exactly one did (singleton, credited to that method), or
/// none did. Requires a complete table (IncompleteLabeling otherwise).
std::map<PairKey, TierInfo> assign_tiers(const LabelTable& method_labels);

struct TierCounts {
    std::size_t full = 0;
    std::size_t partial = 0;
    std::map<std::string, std::size_t> singleton;
    std::size_t no_match = 0;
    std::size_t total = 0;  // always the exact sum of the buckets
};

TierCounts count_tiers(const std::map<PairKey, TierInfo>& assignment);
TierCounts agreement_tiers(const LabelTable& method_labels);

struct SampleResult {
    std::vector<PairKey> standard_set;
    std::vector<PairKey> challenging_set;
    std::vector<std::string> log;  // quota shortfalls and redistributions
};

/// Draws the two meta-evaluation subsets. The standard set is stratified
/// proportionally to tier frequencies; the challenging set is half
/// partial-agreement pairs and half singletons with equal per-method quotas.
/// All rounding is largest-remainder; shortfalls move to the buckets that
/// still have population, proportionally to their remaining capacity, and
/// are logged. Identical seeds give identical samples on every platform.
SampleResult sample_eval_sets(const std::map<PairKey, TierInfo>& tiers, std::size_t standard_n,
                              std::size_t challenging_n, std::uint64_t seed);

/// Largest-remainder apportionment of `total` into weighted shares; ties on
/// remainder resolve to the earliest bucket. Exposed for direct testing.
std::vector<std::size_t> largest_remainder_quotas(std::size_t total,
                                                  const std::vector<double>& weights);

/// Synthesizes a majority-vote source over the named sources (every pair
/// must be labeled by all of them). With an even source count a tie can
/// occur; tie_break decides it, and because no convention is obviously
/// right, a tie with no tie_break configured is a ConfigError rather than a
/// silent guess.
LabelTable majority_source(const LabelTable& labels, const std::vector<std::string>& sources,
                           const std::string& majority_name,
                           std::optional<PairLabelValue> tie_break);

// Report tables. Markdown for humans, CSV for spreadsheets; same rows.
std::string render_kappa_markdown(const std::vector<std::pair<std::string, double>>& rows);
std::string render_kappa_csv(const std::vector<std::pair<std::string, double>>& rows);
std::string render_tiers_markdown(const TierCounts& counts);
std::string render_tiers_csv(const TierCounts& counts);
std::string render_prf_markdown(const std::vector<std::pair<std::string, PrfResult>>& rows);
std::string render_prf_csv(const std::vector<std::pair<std::string, PrfResult>>& rows);

}  // namespace recalleval
