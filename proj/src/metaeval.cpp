#include "recalleval/metaeval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "recalleval/errors.hpp"
#include "recalleval/rng.hpp"

namespace recalleval {

PairLabelValue parse_pair_label(const std::string& name) {
    if (name == "match") return PairLabelValue::match;
    if (name == "no_match") return PairLabelValue::no_match;
    throw SchemaError("label must be \"match\" or \"no_match\", got \"" + name + "\"");
}

const char* to_string(PairLabelValue value) {
    return value == PairLabelValue::match ? "match" : "no_match";
}

const char* to_string(Tier tier) {
    switch (tier) {
        case Tier::full: return "full";
        case Tier::partial: return "partial";
        case Tier::singleton: return "singleton";
        case Tier::no_match: return "no_match";
    }
    return "no_match";
}

LabelTable LabelTable::make(const std::vector<PairLabel>& labels) {
    LabelTable table;
    std::map<std::string, bool> source_seen;
    for (const auto& label : labels) {
        PairKey key{label.instance_id, label.reference_id};
        auto [cell, inserted] =
            table.cells_[key].emplace(label.source_id, label.label);
        if (!inserted)
            throw SchemaError("duplicate label for pair (" + label.instance_id + ", " +
                              label.reference_id + ") from source " + label.source_id);
        source_seen[label.source_id] = true;
    }
    table.pairs_.reserve(table.cells_.size());
    for (const auto& [key, _] : table.cells_) table.pairs_.push_back(key);
    table.sources_.reserve(source_seen.size());
    for (const auto& [source, _] : source_seen) table.sources_.push_back(source);
    return table;
}

std::optional<PairLabelValue> LabelTable::label(const PairKey& pair,
                                               const std::string& source) const {
    auto row = cells_.find(pair);
    if (row == cells_.end()) return std::nullopt;
    auto cell = row->second.find(source);
    if (cell == row->second.end()) return std::nullopt;
    return cell->second;
}

LabelTable LabelTable::select_source(const std::string& source) const {
    std::vector<PairLabel> subset;
    for (const auto& [key, row] : cells_) {
        auto cell = row.find(source);
        if (cell != row.end())
            subset.push_back(PairLabel{key.first, key.second, source, cell->second});
    }
    return make(subset);
}

KappaResult fleiss_kappa(const LabelTable& labels) {
    if (labels.empty()) throw std::invalid_argument("label table is empty");

    // Per-item category counts; every item must carry the same rater count.
    const std::size_t items = labels.pairs().size();
    std::size_t raters = 0;
    std::vector<std::size_t> match_counts(items, 0);
    for (std::size_t i = 0; i < items; ++i) {
        std::size_t n = 0;
        for (const auto& source : labels.sources()) {
            auto value = labels.label(labels.pairs()[i], source);
            if (!value) continue;
            ++n;
            if (*value == PairLabelValue::match) ++match_counts[i];
        }
        if (i == 0) raters = n;
        if (n != raters)
            throw UnequalRaterCounts("pair (" + labels.pairs()[i].first + ", " +
                                     labels.pairs()[i].second + ") has " + std::to_string(n) +
                                     " labels, expected " + std::to_string(raters));
    }
    if (raters < 2)
        throw UnequalRaterCounts("agreement needs at least 2 raters per pair, got " +
                                 std::to_string(raters));

    // Degeneracy is decided on integer totals, not float comparisons.
    std::size_t total_match = 0;
    for (auto count : match_counts) total_match += count;
    const std::size_t total_labels = items * raters;
    KappaResult result;
    if (total_match == 0 || total_match == total_labels) {
        result.kappa = 1.0;
        result.degenerate = true;
        result.warnings.push_back(
            "all labels fall in one category; expected agreement is 1, kappa reported as 1.0"
            " by convention");
        return result;
    }

    const double n = static_cast<double>(raters);
    double p_bar = 0.0;
    for (auto count : match_counts) {
        const double m = static_cast<double>(count);
        const double o = n - m;
        p_bar += (m * m + o * o - n) / (n * (n - 1.0));
    }
    p_bar /= static_cast<double>(items);

    const double p_match =
        static_cast<double>(total_match) / static_cast<double>(total_labels);
    const double p_no = 1.0 - p_match;
    const double p_e = p_match * p_match + p_no * p_no;
    result.kappa = (p_bar - p_e) / (1.0 - p_e);
    return result;
}

PrfResult pair_prf(const LabelTable& predictions, const LabelTable& gold) {
    if (predictions.sources().size() != 1 || gold.sources().size() != 1)
        throw std::invalid_argument(
            "pair_prf compares one prediction source against one gold source; use"
            " select_source first");
    if (predictions.pairs() != gold.pairs())
        throw PairSetMismatch("prediction and gold tables cover different pair sets (" +
                              std::to_string(predictions.pairs().size()) + " vs " +
                              std::to_string(gold.pairs().size()) + " pairs)");

    const auto& pred_source = predictions.sources().front();
    const auto& gold_source = gold.sources().front();
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& pair : predictions.pairs()) {
        bool predicted = *predictions.label(pair, pred_source) == PairLabelValue::match;
        bool actual = *gold.label(pair, gold_source) == PairLabelValue::match;
        if (predicted && actual) ++tp;
        else if (predicted && !actual) ++fp;
        else if (!predicted && actual) ++fn;
    }

    PrfResult result;
    if (tp + fp == 0) result.zero_denominator = true;
    else result.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn == 0) result.zero_denominator = true;
    else result.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (result.precision + result.recall == 0.0) result.zero_denominator = true;
    else
        result.f1 = 2.0 * result.precision * result.recall /
                    (result.precision + result.recall);
    return result;
}

std::map<PairKey, TierInfo> assign_tiers(const LabelTable& method_labels) {
    const auto& methods = method_labels.sources();
    if (methods.size() < 2)
        throw std::invalid_argument("tier assignment needs at least two methods");

    std::map<PairKey, TierInfo> assignment;
    for (const auto& pair : method_labels.pairs()) {
        std::size_t matches = 0;
        std::string lone_method;
        for (const auto& method : methods) {
            auto value = method_labels.label(pair, method);
            if (!value)
                throw IncompleteLabeling("pair (" + pair.first + ", " + pair.second +
                                         ") is missing a label from method " + method);
            if (*value == PairLabelValue::match) {
                ++matches;
                lone_method = method;
            }
        }
        TierInfo info;
        if (matches == methods.size()) info.tier = Tier::full;
        else if (matches == 1) { info.tier = Tier::singleton; info.method = lone_method; }
        else if (matches == 0) info.tier = Tier::no_match;
        else info.tier = Tier::partial;
        assignment[pair] = std::move(info);
    }
    return assignment;
}

TierCounts count_tiers(const std::map<PairKey, TierInfo>& assignment) {
    TierCounts counts;
    for (const auto& [pair, info] : assignment) {
        switch (info.tier) {
            case Tier::full: ++counts.full; break;
            case Tier::partial: ++counts.partial; break;
            case Tier::singleton: ++counts.singleton[info.method]; break;
            case Tier::no_match: ++counts.no_match; break;
        }
        ++counts.total;
    }
    return counts;
}

TierCounts agreement_tiers(const LabelTable& method_labels) {
    return count_tiers(assign_tiers(method_labels));
}

std::vector<std::size_t> largest_remainder_quotas(std::size_t total,
                                                  const std::vector<double>& weights) {
    std::vector<std::size_t> quotas(weights.size(), 0);
    double weight_sum = 0.0;
    for (double w : weights) weight_sum += w;
    if (weight_sum <= 0.0 || total == 0) return quotas;

    std::vector<double> remainders(weights.size(), 0.0);
    std::size_t allocated = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double share = static_cast<double>(total) * weights[i] / weight_sum;
        quotas[i] = static_cast<std::size_t>(std::floor(share));
        remainders[i] = share - std::floor(share);
        allocated += quotas[i];
    }
    // Hand out what flooring dropped, largest remainder first, earliest
    // bucket winning ties.
    std::vector<std::size_t> order(weights.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return remainders[a] > remainders[b];
    });
    for (std::size_t k = 0; allocated < total && k < order.size(); ++k, ++allocated)
        ++quotas[order[k]];
    return quotas;
}

namespace {

struct Bucket {
    std::string name;
    std::vector<PairKey> pool;  // sorted by key
    std::size_t quota = 0;
};

/// Clamps quotas to pool sizes, moving any deficit to buckets that still
/// have room (proportionally to remaining room, largest remainder). The
/// caller has already ensured total capacity covers the total quota.
void resolve_shortfalls(std::vector<Bucket>& buckets, std::vector<std::string>& log) {
    for (;;) {
        std::size_t deficit = 0;
        for (auto& bucket : buckets) {
            if (bucket.quota > bucket.pool.size()) {
                deficit += bucket.quota - bucket.pool.size();
                log.push_back("bucket " + bucket.name + " short by " +
                              std::to_string(bucket.quota - bucket.pool.size()) +
                              " (population " + std::to_string(bucket.pool.size()) + ")");
                bucket.quota = bucket.pool.size();
            }
        }
        if (deficit == 0) return;
        std::vector<double> room(buckets.size(), 0.0);
        double total_room = 0.0;
        for (std::size_t i = 0; i < buckets.size(); ++i) {
            room[i] = static_cast<double>(buckets[i].pool.size() - buckets[i].quota);
            total_room += room[i];
        }
        if (total_room <= 0.0)
            throw InsufficientPopulation("cannot redistribute a shortfall of " +
                                         std::to_string(deficit) + "; all buckets exhausted");
        auto extra = largest_remainder_quotas(deficit, room);
        for (std::size_t i = 0; i < buckets.size(); ++i) {
            if (extra[i] == 0) continue;
            buckets[i].quota += extra[i];
            log.push_back("redistributed " + std::to_string(extra[i]) + " to bucket " +
                          buckets[i].name);
        }
    }
}

std::vector<PairKey> draw(std::vector<Bucket>& buckets, std::mt19937_64& rng) {
    std::vector<PairKey> picked;
    for (auto& bucket : buckets) {
        deterministic_shuffle(bucket.pool, rng);
        picked.insert(picked.end(), bucket.pool.begin(),
                      bucket.pool.begin() + static_cast<std::ptrdiff_t>(bucket.quota));
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace

SampleResult sample_eval_sets(const std::map<PairKey, TierInfo>& tiers, std::size_t standard_n,
                              std::size_t challenging_n, std::uint64_t seed) {
    SampleResult result;

    // Pools per tier; map iteration gives sorted pair keys already.
    std::vector<PairKey> full_pool, partial_pool, no_match_pool;
    std::map<std::string, std::vector<PairKey>> singleton_pools;
    for (const auto& [pair, info] : tiers) {
        switch (info.tier) {
            case Tier::full: full_pool.push_back(pair); break;
            case Tier::partial: partial_pool.push_back(pair); break;
            case Tier::singleton: singleton_pools[info.method].push_back(pair); break;
            case Tier::no_match: no_match_pool.push_back(pair); break;
        }
    }

    if (standard_n > tiers.size())
        throw InsufficientPopulation("standard set of " + std::to_string(standard_n) +
                                     " requested from a population of " +
                                     std::to_string(tiers.size()));

    std::mt19937_64 rng(seed);

    // Standard set: strata proportional to tier frequencies.
    {
        std::vector<Bucket> buckets;
        buckets.push_back({"full", full_pool, 0});
        buckets.push_back({"partial", partial_pool, 0});
        for (const auto& [method, pool] : singleton_pools)
            buckets.push_back({"singleton:" + method, pool, 0});
        buckets.push_back({"no_match", no_match_pool, 0});
        std::vector<double> weights;
        for (const auto& bucket : buckets)
            weights.push_back(static_cast<double>(bucket.pool.size()));
        auto quotas = largest_remainder_quotas(standard_n, weights);
        for (std::size_t i = 0; i < buckets.size(); ++i) buckets[i].quota = quotas[i];
        resolve_shortfalls(buckets, result.log);
        result.standard_set = draw(buckets, rng);
    }

    // Challenging set: half partial, half singletons in equal method quotas.
    {
        std::size_t singleton_population = 0;
        for (const auto& [method, pool] : singleton_pools)
            singleton_population += pool.size();
        if (partial_pool.size() + singleton_population < challenging_n)
            throw InsufficientPopulation(
                "challenging set of " + std::to_string(challenging_n) +
                " requested but only " +
                std::to_string(partial_pool.size() + singleton_population) +
                " partial/singleton pairs exist");

        auto halves = largest_remainder_quotas(challenging_n, {1.0, 1.0});
        std::vector<Bucket> buckets;
        buckets.push_back({"partial", partial_pool, halves[0]});
        if (singleton_pools.empty()) {
            if (halves[1] > 0) {
                result.log.push_back("no singleton pools; whole challenging quota moved to"
                                     " partial");
                buckets[0].quota = challenging_n;
            }
        } else {
            std::vector<double> equal(singleton_pools.size(), 1.0);
            auto per_method = largest_remainder_quotas(halves[1], equal);
            std::size_t i = 0;
            for (const auto& [method, pool] : singleton_pools)
                buckets.push_back({"singleton:" + method, pool, per_method[i++]});
        }
        resolve_shortfalls(buckets, result.log);
        result.challenging_set = draw(buckets, rng);
    }

    return result;
}

LabelTable majority_source(const LabelTable& labels, const std::vector<std::string>& sources,
                           const std::string& majority_name,
                           std::optional<PairLabelValue> tie_break) {
    if (sources.size() < 2)
        throw std::invalid_argument("majority vote needs at least two sources");
    std::vector<PairLabel> votes;
    for (const auto& pair : labels.pairs()) {
        std::size_t matches = 0;
        for (const auto& source : sources) {
            auto value = labels.label(pair, source);
            if (!value)
                throw IncompleteLabeling("pair (" + pair.first + ", " + pair.second +
                                         ") is missing a label from source " + source);
            if (*value == PairLabelValue::match) ++matches;
        }
        PairLabelValue verdict;
        if (matches * 2 == sources.size()) {
            if (!tie_break)
                throw ConfigError("majority vote tied on pair (" + pair.first + ", " +
                                  pair.second + ") and no tie-break rule is configured");
            verdict = *tie_break;
        } else {
            verdict = matches * 2 > sources.size() ? PairLabelValue::match
                                                   : PairLabelValue::no_match;
        }
        votes.push_back(PairLabel{pair.first, pair.second, majority_name, verdict});
    }
    return LabelTable::make(votes);
}

namespace {

std::string fmt(double value, int precision) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", precision, value);
    return buffer;
}

}  // namespace

std::string render_kappa_markdown(const std::vector<std::pair<std::string, double>>& rows) {
    std::ostringstream out;
    out << "| Comparison | Fleiss' kappa |\n|---|---|\n";
    for (const auto& [name, kappa] : rows) out << "| " << name << " | " << fmt(kappa, 3) << " |\n";
    return out.str();
}

std::string render_kappa_csv(const std::vector<std::pair<std::string, double>>& rows) {
    std::ostringstream out;
    out << "comparison,fleiss_kappa\n";
    for (const auto& [name, kappa] : rows) out << name << "," << fmt(kappa, 6) << "\n";
    return out.str();
}

std::string render_tiers_markdown(const TierCounts& counts) {
    std::ostringstream out;
    out << "| Match type | Count |\n|---|---|\n";
    out << "| Full agreement | " << counts.full << " |\n";
    out << "| Partial agreement | " << counts.partial << " |\n";
    for (const auto& [method, count] : counts.singleton)
        out << "| Singleton (" << method << ") | " << count << " |\n";
    out << "| No match | " << counts.no_match << " |\n";
    out << "| Total | " << counts.total << " |\n";
    return out.str();
}

std::string render_tiers_csv(const TierCounts& counts) {
    std::ostringstream out;
    out << "match_type,count\n";
    out << "full_agreement," << counts.full << "\n";
    out << "partial_agreement," << counts.partial << "\n";
    for (const auto& [method, count] : counts.singleton)
        out << "singleton:" << method << "," << count << "\n";
    out << "no_match," << counts.no_match << "\n";
    out << "total," << counts.total << "\n";
    return out.str();
}

std::string render_prf_markdown(const std::vector<std::pair<std::string, PrfResult>>& rows) {
    std::ostringstream out;
    out << "| Method | Precision | Recall | F1 |\n|---|---|---|---|\n";
    for (const auto& [name, prf] : rows)
        out << "| " << name << " | " << fmt(prf.precision, 3) << " | " << fmt(prf.recall, 3)
            << " | " << fmt(prf.f1, 3) << " |\n";
    return out.str();
}

std::string render_prf_csv(const std::vector<std::pair<std::string, PrfResult>>& rows) {
    std::ostringstream out;
    out << "method,precision,recall,f1\n";
    for (const auto& [name, prf] : rows)
        out << name << "," << fmt(prf.precision, 6) << "," << fmt(prf.recall, 6) << ","
            << fmt(prf.f1, 6) << "\n";
    return out.str();
}

}  // namespace recalleval
