#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "recalleval/errors.hpp"
#include "recalleval/metaeval.hpp"
#include "recalleval/rng.hpp"

using recalleval::assign_tiers;
using recalleval::agreement_tiers;
using recalleval::ConfigError;
using recalleval::count_tiers;
using recalleval::fleiss_kappa;
using recalleval::IncompleteLabeling;
using recalleval::InsufficientPopulation;
using recalleval::LabelTable;
using recalleval::largest_remainder_quotas;
using recalleval::majority_source;
using recalleval::PairKey;
using recalleval::PairLabel;
using recalleval::PairLabelValue;
using recalleval::pair_prf;
using recalleval::PairSetMismatch;
using recalleval::parse_pair_label;
using recalleval::sample_eval_sets;
using recalleval::SchemaError;
using recalleval::Tier;
using recalleval::TierInfo;
using recalleval::UnequalRaterCounts;

namespace {

PairLabel label(const std::string& pair, const std::string& source, bool match) {
    return PairLabel{"inst", pair, source,
                     match ? PairLabelValue::match : PairLabelValue::no_match};
}

/// items x raters boolean grid -> LabelTable (true = match).
LabelTable grid_table(const std::vector<std::vector<bool>>& grid) {
    std::vector<PairLabel> labels;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t r = 0; r < grid[i].size(); ++r)
            labels.push_back(label("pair-" + std::to_string(i), "rater-" + std::to_string(r),
                                   grid[i][r]));
    return LabelTable::make(labels);
}

/// The same grid as an items x 2 category-count matrix for the oracle.
std::vector<std::vector<std::size_t>> grid_counts(const std::vector<std::vector<bool>>& grid) {
    std::vector<std::vector<std::size_t>> counts;
    for (const auto& row : grid) {
        std::size_t matches = 0;
        for (bool b : row) matches += b ? 1 : 0;
        counts.push_back({matches, row.size() - matches});
    }
    return counts;
}

}  // namespace

TEST_CASE("pair labels parse and print") {
    CHECK(parse_pair_label("match") == PairLabelValue::match);
    CHECK(parse_pair_label("no_match") == PairLabelValue::no_match);
    CHECK_THROWS_AS(parse_pair_label("Match"), SchemaError);
    CHECK(std::string(to_string(PairLabelValue::match)) == "match");
}

TEST_CASE("label tables index by pair and source") {
    auto table = LabelTable::make({label("p2", "beta", true), label("p1", "alpha", false),
                                   label("p1", "beta", true)});
    CHECK(table.size() == 2);
    CHECK(table.pairs() == std::vector<PairKey>{{"inst", "p1"}, {"inst", "p2"}});
    CHECK(table.sources() == std::vector<std::string>{"alpha", "beta"});
    CHECK(table.label({"inst", "p1"}, "alpha") == PairLabelValue::no_match);
    CHECK(table.label({"inst", "p1"}, "beta") == PairLabelValue::match);
    CHECK_FALSE(table.label({"inst", "p2"}, "alpha").has_value());
    CHECK_FALSE(table.label({"inst", "zzz"}, "alpha").has_value());

    auto beta_only = table.select_source("beta");
    CHECK(beta_only.sources() == std::vector<std::string>{"beta"});
    CHECK(beta_only.size() == 2);

    CHECK_THROWS_AS(LabelTable::make({label("p1", "alpha", true), label("p1", "alpha", true)}),
                    SchemaError);
}

TEST_CASE("perfect agreement across mixed categories scores kappa one") {
    auto table = grid_table({{true, true, true},
                             {true, true, true},
                             {false, false, false},
                             {false, false, false}});
    auto result = fleiss_kappa(table);
    CHECK(result.kappa == 1.0);
    CHECK_FALSE(result.degenerate);
}

TEST_CASE("one dissenting vote among twelve scores minus one eleventh") {
    // 4 items, 3 raters, a single no_match on the first item.
    auto table = grid_table({{true, true, false},
                             {true, true, true},
                             {true, true, true},
                             {true, true, true}});
    auto result = fleiss_kappa(table);
    CHECK(result.kappa == doctest::Approx(-1.0 / 11.0).epsilon(1e-12));
    CHECK_FALSE(result.degenerate);
}

TEST_CASE("kappa matches the textbook formula on random tables") {
    std::mt19937_64 rng(97531);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t items = 2 + recalleval::uniform_below(rng, 9);   // 2..10
        std::size_t raters = 2 + recalleval::uniform_below(rng, 4);  // 2..5
        std::vector<std::vector<bool>> grid(items, std::vector<bool>(raters));
        std::size_t total_match = 0;
        for (auto& row : grid)
            for (std::size_t r = 0; r < raters; ++r) {
                row[r] = recalleval::uniform_below(rng, 2) == 0;
                total_match += row[r] ? 1 : 0;
            }
        if (total_match == 0 || total_match == items * raters) continue;  // degenerate

        auto result = fleiss_kappa(grid_table(grid));
        double oracle = testsupport::fleiss_direct(grid_counts(grid));
        CHECK(result.kappa == doctest::Approx(oracle).epsilon(1e-12));

        // Swapping the category names everywhere must not move kappa.
        std::vector<std::vector<bool>> flipped = grid;
        for (auto& row : flipped)
            for (std::size_t r = 0; r < raters; ++r) row[r] = !row[r];
        auto mirrored = fleiss_kappa(grid_table(flipped));
        CHECK(mirrored.kappa == doctest::Approx(result.kappa).epsilon(1e-12));
    }
}

TEST_CASE("kappa requires a uniform rater count of at least two") {
    CHECK_THROWS_AS(
        fleiss_kappa(LabelTable::make({label("p1", "a", true), label("p1", "b", true),
                                       label("p2", "a", true)})),
        UnequalRaterCounts);
    CHECK_THROWS_AS(
        fleiss_kappa(LabelTable::make({label("p1", "a", true), label("p2", "a", true)})),
        UnequalRaterCounts);
    CHECK_THROWS_AS(fleiss_kappa(LabelTable::make({})), std::invalid_argument);
}

TEST_CASE("a single observed category is degenerate and pinned to one") {
    auto all_match = fleiss_kappa(grid_table({{true, true}, {true, true}}));
    CHECK(all_match.kappa == 1.0);
    CHECK(all_match.degenerate);
    REQUIRE(!all_match.warnings.empty());
    CHECK(all_match.warnings[0].find("one category") != std::string::npos);

    auto none_match = fleiss_kappa(grid_table({{false, false}, {false, false}}));
    CHECK(none_match.kappa == 1.0);
    CHECK(none_match.degenerate);
}

namespace {

LabelTable single_source(const std::string& source, const std::vector<bool>& values) {
    std::vector<PairLabel> labels;
    for (std::size_t i = 0; i < values.size(); ++i)
        labels.push_back(label("p" + std::to_string(i), source, values[i]));
    return LabelTable::make(labels);
}

}  // namespace

TEST_CASE("precision recall and f1 count match as the positive class") {
    // Six pairs: 2 TP, 1 FP, 2 FN, 1 TN.
    auto predictions = single_source("m", {true, true, true, false, false, false});
    auto gold = single_source("g", {true, true, false, true, true, false});
    auto prf = pair_prf(predictions, gold);
    CHECK(prf.precision == 2.0 / 3.0);
    CHECK(prf.recall == 0.5);
    CHECK(prf.f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK_FALSE(prf.zero_denominator);
}

TEST_CASE("identical prediction and gold tables score ones") {
    auto predictions = single_source("m", {true, false, true});
    auto gold = single_source("g", {true, false, true});
    auto prf = pair_prf(predictions, gold);
    CHECK(prf.precision == 1.0);
    CHECK(prf.recall == 1.0);
    CHECK(prf.f1 == 1.0);
}

TEST_CASE("empty denominators report zeros with a flag") {
    auto predictions = single_source("m", {false, false});
    auto gold = single_source("g", {false, false});
    auto prf = pair_prf(predictions, gold);
    CHECK(prf.precision == 0.0);
    CHECK(prf.recall == 0.0);
    CHECK(prf.f1 == 0.0);
    CHECK(prf.zero_denominator);
}

TEST_CASE("prf rejects mismatched pair sets and multi-source tables") {
    auto predictions = single_source("m", {true, false});
    auto gold = single_source("g", {true, false, true});
    CHECK_THROWS_AS(pair_prf(predictions, gold), PairSetMismatch);

    auto multi = LabelTable::make({label("p1", "a", true), label("p1", "b", true)});
    CHECK_THROWS_AS(pair_prf(multi, single_source("g", {true})), std::invalid_argument);
}

TEST_CASE("f1 is zero exactly when precision or recall is, and never beats both") {
    std::mt19937_64 rng(8642);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 1 + recalleval::uniform_below(rng, 10);
        std::vector<bool> pred(n), gold_values(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = recalleval::uniform_below(rng, 2) == 0;
            gold_values[i] = recalleval::uniform_below(rng, 2) == 0;
        }
        auto prf = pair_prf(single_source("m", pred), single_source("g", gold_values));
        CHECK((prf.f1 == 0.0) == (prf.precision == 0.0 || prf.recall == 0.0));
        CHECK(prf.f1 <= std::max(prf.precision, prf.recall) + 1e-15);
        CHECK(prf.precision >= 0.0);
        CHECK(prf.precision <= 1.0);
        CHECK(prf.recall >= 0.0);
        CHECK(prf.recall <= 1.0);
    }
}

namespace {

/// methods x verdicts per pair; pair names are zero-padded so key order is
/// construction order.
LabelTable method_table(const std::vector<std::vector<bool>>& rows,
                        const std::vector<std::string>& methods) {
    std::vector<PairLabel> labels;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "p%04zu", i);
        for (std::size_t m = 0; m < methods.size(); ++m)
            labels.push_back(label(name, methods[m], rows[i][m]));
    }
    return LabelTable::make(labels);
}

}  // namespace

TEST_CASE("tiers split by how many methods matched") {
    auto table = method_table({{true, true, true},    // full
                               {true, true, false},   // partial
                               {false, false, true},  // singleton: charlie
                               {false, false, false}, // no_match
                               {true, false, false}}, // singleton: alpha
                              {"alpha", "bravo", "charlie"});
    auto tiers = assign_tiers(table);
    CHECK(tiers.at({"inst", "p0000"}).tier == Tier::full);
    CHECK(tiers.at({"inst", "p0001"}).tier == Tier::partial);
    CHECK(tiers.at({"inst", "p0002"}).tier == Tier::singleton);
    CHECK(tiers.at({"inst", "p0002"}).method == "charlie");
    CHECK(tiers.at({"inst", "p0003"}).tier == Tier::no_match);
    CHECK(tiers.at({"inst", "p0004"}).method == "alpha");

    auto counts = count_tiers(tiers);
    CHECK(counts.full == 1);
    CHECK(counts.partial == 1);
    CHECK(counts.singleton.at("alpha") == 1);
    CHECK(counts.singleton.at("charlie") == 1);
    CHECK(counts.no_match == 1);
    CHECK(counts.total == 5);
}

TEST_CASE("tier assignment demands complete labeling and two methods minimum") {
    auto incomplete = LabelTable::make({label("p1", "a", true), label("p1", "b", true),
                                        label("p2", "a", true)});
    CHECK_THROWS_AS(assign_tiers(incomplete), IncompleteLabeling);
    CHECK_THROWS_AS(assign_tiers(single_source("a", {true, false})), std::invalid_argument);
}

TEST_CASE("tier buckets always partition the pair population") {
    std::mt19937_64 rng(1350);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t methods_n = 3 + recalleval::uniform_below(rng, 3);  // 3..5
        std::size_t pairs_n = 1 + recalleval::uniform_below(rng, 30);
        std::vector<std::string> methods;
        for (std::size_t m = 0; m < methods_n; ++m)
            methods.push_back("method-" + std::to_string(m));
        std::vector<std::vector<bool>> rows(pairs_n, std::vector<bool>(methods_n));
        for (auto& row : rows)
            for (std::size_t m = 0; m < methods_n; ++m)
                row[m] = recalleval::uniform_below(rng, 2) == 0;

        auto counts = agreement_tiers(method_table(rows, methods));
        std::size_t singletons = 0;
        for (const auto& [method, count] : counts.singleton) singletons += count;
        CHECK(counts.full + counts.partial + singletons + counts.no_match == counts.total);
        CHECK(counts.total == pairs_n);
    }
}

TEST_CASE("largest-remainder quotas split 150 four ways as 38/38/37/37") {
    auto quotas = largest_remainder_quotas(150, {1.0, 1.0, 1.0, 1.0});
    CHECK(quotas == std::vector<std::size_t>{38, 38, 37, 37});
}

TEST_CASE("largest-remainder quotas preserve totals and proportions") {
    CHECK(largest_remainder_quotas(4, {3.0, 1.0}) == std::vector<std::size_t>{3, 1});
    CHECK(largest_remainder_quotas(0, {1.0, 2.0}) == std::vector<std::size_t>{0, 0});
    CHECK(largest_remainder_quotas(5, {0.0, 0.0}) == std::vector<std::size_t>{0, 0});

    std::mt19937_64 rng(31415);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t buckets = 1 + recalleval::uniform_below(rng, 6);
        std::vector<double> weights;
        double sum = 0.0;
        for (std::size_t i = 0; i < buckets; ++i) {
            weights.push_back(static_cast<double>(recalleval::uniform_below(rng, 50)));
            sum += weights.back();
        }
        if (sum == 0.0) continue;
        std::size_t total = recalleval::uniform_below(rng, 200);
        auto quotas = largest_remainder_quotas(total, weights);
        CHECK(std::accumulate(quotas.begin(), quotas.end(), std::size_t{0}) == total);
        // Each quota is within one of its exact proportional share.
        for (std::size_t i = 0; i < buckets; ++i) {
            double share = static_cast<double>(total) * weights[i] / sum;
            CHECK(static_cast<double>(quotas[i]) >= share - 1.0);
            CHECK(static_cast<double>(quotas[i]) <= share + 1.0);
        }
    }
}

namespace {

std::map<PairKey, TierInfo> synthetic_tiers(std::size_t full, std::size_t partial,
                                            const std::map<std::string, std::size_t>& singles,
                                            std::size_t no_match) {
    std::map<PairKey, TierInfo> tiers;
    std::size_t counter = 0;
    auto add = [&](Tier tier, const std::string& method, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            char name[16];
            std::snprintf(name, sizeof(name), "p%05zu", counter++);
            TierInfo info;
            info.tier = tier;
            info.method = method;
            tiers[{"inst", name}] = info;
        }
    };
    add(Tier::full, "", full);
    add(Tier::partial, "", partial);
    for (const auto& [method, count] : singles) add(Tier::singleton, method, count);
    add(Tier::no_match, "", no_match);
    return tiers;
}

std::size_t overlap(const std::vector<PairKey>& sample,
                    const std::map<PairKey, TierInfo>& tiers, Tier tier,
                    const std::string& method = "") {
    std::size_t n = 0;
    for (const auto& key : sample) {
        const auto& info = tiers.at(key);
        if (info.tier == tier && (method.empty() || info.method == method)) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("sampling is deterministic, well-formed, and tier-faithful") {
    auto tiers = synthetic_tiers(120, 200, {{"m-a", 40}, {"m-b", 40}, {"m-c", 40}, {"m-d", 40}},
                                 140);  // population 620

    auto first = sample_eval_sets(tiers, 150, 300, 99);
    auto second = sample_eval_sets(tiers, 150, 300, 99);
    CHECK(first.standard_set == second.standard_set);
    CHECK(first.challenging_set == second.challenging_set);

    CHECK(first.standard_set.size() == 150);
    CHECK(first.challenging_set.size() == 300);
    for (const auto* sample : {&first.standard_set, &first.challenging_set}) {
        std::set<PairKey> unique(sample->begin(), sample->end());
        CHECK(unique.size() == sample->size());
        for (const auto& key : *sample) CHECK(tiers.count(key) == 1);
    }

    // The challenging set is half partial, half singletons in equal
    // per-method quotas (150 into four methods: 38/38/37/37).
    CHECK(overlap(first.challenging_set, tiers, Tier::partial) == 150);
    CHECK(overlap(first.challenging_set, tiers, Tier::full) == 0);
    CHECK(overlap(first.challenging_set, tiers, Tier::no_match) == 0);
    CHECK(overlap(first.challenging_set, tiers, Tier::singleton, "m-a") == 38);
    CHECK(overlap(first.challenging_set, tiers, Tier::singleton, "m-b") == 38);
    CHECK(overlap(first.challenging_set, tiers, Tier::singleton, "m-c") == 37);
    CHECK(overlap(first.challenging_set, tiers, Tier::singleton, "m-d") == 37);

    // The standard set is proportional to tier frequencies: 620 pairs into
    // 150 slots keeps each stratum within one of its exact share.
    double scale = 150.0 / 620.0;
    CHECK(std::abs(static_cast<double>(overlap(first.standard_set, tiers, Tier::full)) -
                   120.0 * scale) <= 1.0);
    CHECK(std::abs(static_cast<double>(overlap(first.standard_set, tiers, Tier::partial)) -
                   200.0 * scale) <= 1.0);
    CHECK(std::abs(static_cast<double>(overlap(first.standard_set, tiers, Tier::no_match)) -
                   140.0 * scale) <= 1.0);

    auto other_seed = sample_eval_sets(tiers, 150, 300, 100);
    CHECK(other_seed.standard_set != first.standard_set);
}

TEST_CASE("sampling rejects requests beyond the population") {
    auto tiers = synthetic_tiers(5, 5, {{"m-a", 5}}, 5);
    CHECK_THROWS_AS(sample_eval_sets(tiers, 21, 0, 1), InsufficientPopulation);
    CHECK_THROWS_AS(sample_eval_sets(tiers, 10, 11, 1), InsufficientPopulation);
}

TEST_CASE("challenging-set shortfalls redistribute and are logged") {
    // Partial can cover only 50 of its 100-slot half; singletons absorb it.
    auto tiers = synthetic_tiers(0, 50, {{"m-a", 100}, {"m-b", 100}}, 0);
    auto result = sample_eval_sets(tiers, 0, 200, 7);
    CHECK(result.challenging_set.size() == 200);
    CHECK(overlap(result.challenging_set, tiers, Tier::partial) == 50);
    CHECK(overlap(result.challenging_set, tiers, Tier::singleton, "m-a") == 75);
    CHECK(overlap(result.challenging_set, tiers, Tier::singleton, "m-b") == 75);
    bool logged_shortfall = false, logged_redistribution = false;
    for (const auto& line : result.log) {
        if (line.find("short by 50") != std::string::npos) logged_shortfall = true;
        if (line.find("redistributed") != std::string::npos) logged_redistribution = true;
    }
    CHECK(logged_shortfall);
    CHECK(logged_redistribution);
}

TEST_CASE("majority vote follows the majority and surfaces ties") {
    auto table = LabelTable::make({label("p1", "a", true), label("p1", "b", true),
                                   label("p1", "c", false), label("p2", "a", false),
                                   label("p2", "b", false), label("p2", "c", true)});
    auto majority = majority_source(table, {"a", "b", "c"}, "vote", std::nullopt);
    CHECK(majority.sources() == std::vector<std::string>{"vote"});
    CHECK(majority.label({"inst", "p1"}, "vote") == PairLabelValue::match);
    CHECK(majority.label({"inst", "p2"}, "vote") == PairLabelValue::no_match);

    auto tied = LabelTable::make({label("p1", "a", true), label("p1", "b", false)});
    CHECK_THROWS_AS(majority_source(tied, {"a", "b"}, "vote", std::nullopt), ConfigError);
    auto broken = majority_source(tied, {"a", "b"}, "vote", PairLabelValue::match);
    CHECK(broken.label({"inst", "p1"}, "vote") == PairLabelValue::match);

    CHECK_THROWS_AS(majority_source(table, {"a"}, "vote", std::nullopt), std::invalid_argument);
    auto missing = LabelTable::make({label("p1", "a", true)});
    CHECK_THROWS_AS(majority_source(missing, {"a", "b"}, "vote", std::nullopt),
                    IncompleteLabeling);
}

TEST_CASE("report tables render the same rows in markdown and csv") {
    auto kappa_md = recalleval::render_kappa_markdown({{"methods vs humans", 0.5215}});
    CHECK(kappa_md.find("| methods vs humans | 0.521 |") != std::string::npos);
    auto kappa_csv = recalleval::render_kappa_csv({{"methods vs humans", 0.5215}});
    CHECK(kappa_csv == "comparison,fleiss_kappa\nmethods vs humans,0.521500\n");

    recalleval::TierCounts counts;
    counts.full = 3;
    counts.partial = 2;
    counts.singleton["m"] = 1;
    counts.no_match = 4;
    counts.total = 10;
    auto tiers_md = recalleval::render_tiers_markdown(counts);
    CHECK(tiers_md.find("| Full agreement | 3 |") != std::string::npos);
    CHECK(tiers_md.find("| Singleton (m) | 1 |") != std::string::npos);
    auto tiers_csv = recalleval::render_tiers_csv(counts);
    CHECK(tiers_csv.find("singleton:m,1") != std::string::npos);
    CHECK(tiers_csv.find("total,10") != std::string::npos);

    recalleval::PrfResult prf;
    prf.precision = 2.0 / 3.0;
    prf.recall = 0.5;
    prf.f1 = 4.0 / 7.0;
    auto prf_md = recalleval::render_prf_markdown({{"m", prf}});
    CHECK(prf_md.find("| m | 0.667 | 0.500 | 0.571 |") != std::string::npos);
    auto prf_csv = recalleval::render_prf_csv({{"m", prf}});
    CHECK(prf_csv.find("m,0.666667,0.500000,0.571429") != std::string::npos);
}
