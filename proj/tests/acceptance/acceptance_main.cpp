// End-to-end acceptance checks for the recall-evaluation engine. Each check
// prints one PASS/FAIL line; the binary exits non-zero if any check fails.
// The checks favor independent oracles (textbook formulas, exhaustive
// search, byte comparison) over re-derivations of library internals.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "recalleval/baselines.hpp"
#include "recalleval/cache.hpp"
#include "recalleval/entailment.hpp"
#include "recalleval/fact.hpp"
#include "recalleval/jsonl.hpp"
#include "recalleval/metaeval.hpp"
#include "recalleval/pipeline.hpp"
#include "recalleval/prompts.hpp"
#include "recalleval/provider.hpp"
#include "recalleval/rng.hpp"
#include "recalleval/runconfig.hpp"
#include "recalleval/runner.hpp"
#include "recalleval/similarity.hpp"

using namespace recalleval;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Judge + providers around a scripted verdict table; the mock transport
/// answers through the real prompt render/parse path.
struct ScriptedJudge {
    explicit ScriptedJudge(const testsupport::VerdictTable& table)
        : mock(table.handler()),
          client(&mock, nullptr, &meter, RetryPolicy{1, 0}),
          judge(client, ChatParams{}, default_one_to_one_template(),
                default_multi_choice_template()),
          embedder(64),
          providers{&judge, &embedder} {}

    UsageMeter meter;
    MockChatTransport mock;
    CachedChatClient client;
    EntailmentJudge judge;
    HashingEmbedder embedder;
    PipelineProviders providers;
};

// ---- 1: recall is covered/total per instance, arithmetic mean per corpus --

std::string check_recall_arithmetic() {
    std::mt19937_64 rng(2026);
    std::vector<InstanceReport> reports;
    double direct_sum = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t refs = 1 + uniform_below(rng, 12);
        const std::size_t covered = uniform_below(rng, refs + 1);
        InstanceReport report;
        report.instance_id = "inst-" + std::to_string(i);
        for (std::size_t f = 0; f < refs; ++f) {
            MatchDecision decision;
            decision.reference_id = make_fact_id(FactOrigin::reference, f + 1);
            decision.covered = f < covered;
            if (decision.covered) decision.stage = Stage::lexical;
            report.decisions.push_back(std::move(decision));
        }
        finalize_instance_report(report, refs);
        const double expected =
            static_cast<double>(covered) / static_cast<double>(refs);
        if (report.covered_count != covered) return "covered count diverged from the decisions";
        if (std::abs(report.recall - expected) > 1e-12)
            return "instance recall deviated from covered/total";
        direct_sum += expected;
        reports.push_back(std::move(report));
    }
    UsageMeter meter;
    auto corpus = aggregate_corpus(std::move(reports), &meter);
    if (std::abs(corpus.mean_recall - direct_sum / 200.0) > 1e-12)
        return "corpus mean is not the arithmetic mean of instance recalls";
    return "";
}

// ---- 2 + 3: staged pipeline vs exhaustive oracle, and pair blocking -------

struct PipelineAgreement {
    std::string equivalence_error;
    std::string blocking_error;
};

PipelineAgreement check_pipeline_vs_oracle() {
    PipelineAgreement result;
    std::mt19937_64 rng(40799);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t nf = 1 + uniform_below(rng, 8);  // 1..8
        const std::size_t ng = uniform_below(rng, 9);      // 0..8

        std::vector<std::string> ref_texts, gen_texts;
        for (std::size_t i = 0; i < nf; ++i)
            ref_texts.push_back("r" + std::to_string(i) + " " +
                                testsupport::random_token(rng, 6));
        for (std::size_t j = 0; j < ng; ++j)
            gen_texts.push_back("g" + std::to_string(j) + " " +
                                testsupport::random_token(rng, 6));

        testsupport::VerdictTable table;
        std::vector<std::vector<bool>> truth(nf, std::vector<bool>(ng, false));
        for (std::size_t i = 0; i < nf; ++i)
            for (std::size_t j = 0; j < ng; ++j) {
                truth[i][j] = uniform_below(rng, 3) == 0;
                table.set(ref_texts[i], gen_texts[j], truth[i][j]);
            }

        ScriptedJudge scripted(table);
        PipelineConfig cfg;
        cfg.fuzzy_jaccard_threshold = 0.0;
        cfg.cosine_threshold = 0.0;
        cfg.top_k = std::max<std::size_t>(ng, 1);
        auto instance = testsupport::make_instance("trial-" + std::to_string(trial),
                                                   ref_texts, gen_texts);
        auto report = evaluate_instance(instance, cfg, scripted.providers);

        for (std::size_t i = 0; i < nf; ++i) {
            const auto& decision = report.decisions[i];
            bool oracle = false;
            for (std::size_t j = 0; j < ng; ++j) oracle = oracle || truth[i][j];
            if (decision.covered != oracle && result.equivalence_error.empty())
                result.equivalence_error = "coverage disagreed with the exhaustive oracle on " +
                                           instance.instance_id + "/" + decision.reference_id;
            if (decision.covered) {
                for (const auto& gid : decision.support->ids()) {
                    auto idx = instance.generated->index_of(gid);
                    if ((!idx || !truth[i][*idx]) && result.equivalence_error.empty())
                        result.equivalence_error =
                            "a support set named a non-entailing generated fact";
                }
            }
            std::set<std::string> judged_once;
            for (const auto& entry : decision.trail)
                for (const auto& gid : entry.generated_ids)
                    if (!judged_once.insert(gid).second && result.blocking_error.empty())
                        result.blocking_error = "pair (" + decision.reference_id + ", " + gid +
                                                ") was judged twice in " + instance.instance_id;
        }
    }
    return result;
}

// ---- 4: the film-directors worked example ---------------------------------

std::string check_film_directors_example() {
    const std::string question =
        "Which European film directors influenced European cinema between 1930 and 1970?";
    const std::string fellini =
        "He pioneered blending fantasy and autobiography in European cinema, directing the "
        "influential film 8\xC2\xBD (1963).";
    const std::string godard =
        "Revolutionized European cinema with \xC3\x80 bout de souffle (1960), became a "
        "hallmark of the French New Wave movement.";
    const std::string bergman =
        "Ingmar Bergman was a master of existential European cinema in the 1960s, crafting "
        "deeply introspective narratives.";
    const std::string boleslawski =
        "Directed Les Mis\xC3\xA9rables, shaping early European cinema with his "
        "sophisticated visual storytelling.";
    const std::string gen_maestro =
        "The film Eight and a Half, directed by the Italian II Maestro in 1960s, became "
        "renowned for merging imagination with personal experience on screen, fundamentally "
        "shaping the future of cinema in Europe.";
    const std::string gen_boleslavsky =
        "Richard Boleslavsky's work, especially the 1935 adaptation of Les "
        "Mis\xC3\xA9rables, has influenced many but is often overlooked in discussions of "
        "European film.";
    const std::string gen_caputo =
        "Vincenzo Caputo, a contemporary director, draws inspiration from the visual motifs "
        "seen in the films of Jean-Luc Godard.";
    const std::string gen_bergman_jr =
        "Bergman Jr. Ingmar's son, represents a contemporary wave of stylists reshaping "
        "modern European art cinema.";

    EvalInstance instance;
    instance.instance_id = "film-directors";
    instance.question = question;
    instance.reference = FactSet::make(
        {testsupport::rfact(1, fellini, "Federico Fellini"),
         testsupport::rfact(2, godard, "Jean-Luc Godard"),
         testsupport::rfact(3, bergman, "Bergman"),
         testsupport::rfact(4, boleslawski, "Ryszard Boleslawski")},
        FactOrigin::reference);
    instance.generated = FactSet::make(
        {testsupport::gfact(1, gen_maestro, "II Maestro"),
         testsupport::gfact(2, gen_boleslavsky, "Richard Boleslavsky"),
         testsupport::gfact(3, gen_caputo, "Vincenzo Caputo"),
         testsupport::gfact(4, gen_bergman_jr, "Bergman Jr.")},
        FactOrigin::generated);

    // The ideal oracle: the nickname and the transliteration entail their
    // references; the background Godard mention and the different Bergman
    // do not entail anything.
    testsupport::VerdictTable table;
    table.set(fellini, gen_maestro, true);
    table.set(boleslawski, gen_boleslavsky, true);

    ScriptedJudge scripted(table);
    PipelineConfig cfg;
    cfg.fuzzy_jaccard_threshold = 0.30;
    cfg.cosine_threshold = 0.0;
    cfg.top_k = 4;
    auto report = evaluate_instance(instance, cfg, scripted.providers);

    if (report.recall != 0.5) return "staged pipeline recall is not exactly 0.5";
    const auto& fellini_d = report.decisions[0];
    if (!fellini_d.covered || fellini_d.stage != Stage::semantic ||
        fellini_d.support->ids() != std::vector<std::string>{"generated-1"})
        return "the nickname paraphrase was not recovered at the semantic stage";
    if (report.decisions[1].covered)
        return "the background mention was wrongly counted as coverage";
    const auto& bergman_d = report.decisions[2];
    if (bergman_d.covered) return "the different-person surface match was wrongly covered";
    if (bergman_d.trail.size() != 2 || bergman_d.trail[0].protocol != Protocol::one_to_one ||
        bergman_d.trail[0].generated_ids != std::vector<std::string>{"generated-4"})
        return "the surface-match candidate was not verified one-to-one first";
    for (const auto& gid : bergman_d.trail[1].generated_ids)
        if (gid == "generated-4") return "a rejected pair resurfaced at the semantic stage";
    const auto& boleslawski_d = report.decisions[3];
    if (!boleslawski_d.covered || boleslawski_d.stage != Stage::lexical ||
        boleslawski_d.support->ids() != std::vector<std::string>{"generated-2"})
        return "the transliteration was not recovered at the lexical stage";

    auto anchor_report = arecall(instance);
    if (anchor_report.recall != 0.5) return "anchor-containment recall is not exactly 0.5";
    std::vector<bool> anchor_covered;
    for (const auto& decision : anchor_report.decisions)
        anchor_covered.push_back(decision.covered);
    if (anchor_covered != std::vector<bool>{false, true, true, false})
        return "anchor containment covered the wrong facts";
    return "";
}

// ---- 5: similarity measures against independent oracles -------------------

std::string check_similarity_oracles() {
    std::mt19937_64 rng(555);
    for (int i = 0; i < 1000; ++i) {
        auto a = testsupport::random_token_list(rng);
        auto b = testsupport::random_token_list(rng);
        const double lib = fuzzy_jaccard(testsupport::join_tokens(a),
                                         testsupport::join_tokens(b), 1.0);
        const double oracle = testsupport::bag_jaccard(a, b);
        if (lib != oracle)
            return "fuzzy jaccard at token similarity 1.0 diverged from bag jaccard";
    }
    for (int i = 0; i < 1000; ++i) {
        auto a = testsupport::random_string(rng);
        auto b = testsupport::random_string(rng);
        if (lcs_substring_ratio(a, b) > lcs_subsequence_ratio(a, b))
            return "a substring ratio exceeded the subsequence ratio";
    }
    const double pair = fuzzy_jaccard("richard boleslavsky", "ryszard boleslawski", 0.8);
    if (std::abs(pair - 1.0 / 3.0) > 1e-9)
        return "the transliterated-name pair did not score one third";
    return "";
}

// ---- 6: substring-overlap baseline threshold semantics --------------------

std::string check_erecall_threshold() {
    // Shared contiguous prefixes of 10 and 6 characters against a 20-char
    // reference: overlap ratios of exactly 0.5 and 0.3.
    auto half = testsupport::make_instance(
        "half", {"abcdefghij0123456789"}, {"abcdefghijzzzzzzzzzz"});
    auto low = testsupport::make_instance(
        "low", {"abcdefghij0123456789"}, {"abcdefzzzzzzzzzzzzzz"});
    auto covered = erecall(half, 0.4);
    if (covered.recall != 1.0 || !covered.decisions[0].covered)
        return "a 50% substring overlap was not covered at threshold 0.4";
    auto uncovered = erecall(low, 0.4);
    if (uncovered.recall != 0.0 || uncovered.decisions[0].covered)
        return "a 30% substring overlap was wrongly covered at threshold 0.4";
    return "";
}

// ---- 7: chance-corrected agreement -----------------------------------------

LabelTable grid_table(const std::vector<std::vector<bool>>& grid) {
    std::vector<PairLabel> labels;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t r = 0; r < grid[i].size(); ++r)
            labels.push_back(PairLabel{
                "inst", "pair-" + std::to_string(i), "rater-" + std::to_string(r),
                grid[i][r] ? PairLabelValue::match : PairLabelValue::no_match});
    return LabelTable::make(labels);
}

std::vector<std::vector<std::size_t>> grid_counts(const std::vector<std::vector<bool>>& grid) {
    std::vector<std::vector<std::size_t>> counts;
    for (const auto& row : grid) {
        std::size_t matches = 0;
        for (bool b : row) matches += b ? 1 : 0;
        counts.push_back({matches, row.size() - matches});
    }
    return counts;
}

std::string check_fleiss_kappa() {
    auto perfect = fleiss_kappa(grid_table(
        {{true, true, true}, {false, false, false}, {true, true, true}}));
    if (perfect.kappa != 1.0) return "perfect agreement did not score exactly 1.0";

    std::mt19937_64 rng(97531);
    int compared = 0;
    while (compared < 100) {
        std::vector<std::vector<bool>> grid(10, std::vector<bool>(5));
        std::size_t total_match = 0;
        for (auto& row : grid)
            for (std::size_t r = 0; r < 5; ++r) {
                row[r] = uniform_below(rng, 2) == 0;
                total_match += row[r] ? 1 : 0;
            }
        if (total_match == 0 || total_match == 50) continue;  // oracle undefined
        auto result = fleiss_kappa(grid_table(grid));
        if (std::abs(result.kappa - testsupport::fleiss_direct(grid_counts(grid))) > 1e-12)
            return "kappa diverged from the direct-formula oracle";
        ++compared;
    }

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t items = 2 + uniform_below(rng, 9);
        const std::size_t raters = 2 + uniform_below(rng, 4);
        std::vector<std::vector<bool>> grid(items, std::vector<bool>(raters));
        for (auto& row : grid)
            for (std::size_t r = 0; r < raters; ++r) row[r] = uniform_below(rng, 2) == 0;
        std::vector<std::vector<bool>> flipped = grid;
        for (auto& row : flipped)
            for (std::size_t r = 0; r < raters; ++r) row[r] = !row[r];
        if (std::abs(fleiss_kappa(grid_table(grid)).kappa -
                     fleiss_kappa(grid_table(flipped)).kappa) > 1e-12)
            return "kappa changed under a category swap";
    }
    return "";
}

// ---- 8: agreement tiers partition the population ---------------------------

std::string check_tier_partition() {
    std::mt19937_64 rng(1350);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t methods_n = 3 + uniform_below(rng, 3);  // 3..5
        const std::size_t pairs_n = 1 + uniform_below(rng, 40);
        std::vector<PairLabel> labels;
        for (std::size_t p = 0; p < pairs_n; ++p)
            for (std::size_t m = 0; m < methods_n; ++m)
                labels.push_back(PairLabel{"inst", "pair-" + std::to_string(p),
                                           "method-" + std::to_string(m),
                                           uniform_below(rng, 2) == 0
                                               ? PairLabelValue::match
                                               : PairLabelValue::no_match});
        auto counts = agreement_tiers(LabelTable::make(labels));
        std::size_t singletons = 0;
        for (const auto& [method, count] : counts.singleton) singletons += count;
        if (counts.full + counts.partial + singletons + counts.no_match != counts.total ||
            counts.total != pairs_n)
            return "tier buckets did not partition the pair population";
    }
    return "";
}

// ---- 9: replay runs are byte-identical across parallelism ------------------

std::string check_replay_determinism() {
    namespace fs = std::filesystem;
    auto dir = testsupport::make_temp_dir("accept-replay");

    std::mt19937_64 rng(20260814);
    auto sentence = [&rng]() {
        std::vector<std::string> tokens;
        const std::size_t len = 3 + uniform_below(rng, 3);
        for (std::size_t i = 0; i < len; ++i)
            tokens.push_back(testsupport::random_token(rng, 5));
        return testsupport::join_tokens(tokens);
    };
    std::vector<EvalInstance> instances;
    for (int i = 0; i < 50; ++i) {
        std::vector<std::string> refs, gens;
        for (int f = 0; f < 4; ++f) refs.push_back(sentence());
        for (int g = 0; g < 6; ++g) gens.push_back(sentence());
        instances.push_back(
            testsupport::make_instance("inst-" + std::to_string(i), refs, gens));
    }
    auto dataset = (fs::path(dir) / "corpus.jsonl").string();
    write_instances(dataset, instances);

    auto script = (fs::path(dir) / "script.json").string();
    {
        std::ofstream out(script);
        out << R"([{"prompt_contains": "Select", "response": "None of the above"},)"
            << R"( {"prompt_contains": "", "response": "Match"}])";
    }

    RunConfig cfg;
    cfg.dataset_path = dataset;
    cfg.method = "longrecall";
    cfg.chat_kind = "scripted";
    cfg.chat_script_path = script;
    cfg.cache_dir = (fs::path(dir) / "cache").string();
    fs::create_directories(cfg.cache_dir);
    cfg.seed = 11;

    auto run_once = [&](const std::string& mode, std::size_t parallelism,
                        const std::string& output) -> std::string {
        RunConfig attempt = cfg;
        attempt.cache_mode = mode;
        attempt.parallelism = parallelism;
        attempt.output_path = (fs::path(dir) / output).string();
        std::ostringstream summary, errors;
        if (recalleval::run(attempt, summary, errors) != 0)
            return "run failed: " + errors.str();
        return "";
    };

    if (auto err = run_once("readwrite", 1, "seed.json"); !err.empty()) return err;
    if (auto err = run_once("replay", 1, "single.json"); !err.empty()) return err;
    if (auto err = run_once("replay", 8, "parallel.json"); !err.empty()) return err;

    auto single = read_file((fs::path(dir) / "single.json").string());
    auto parallel = read_file((fs::path(dir) / "parallel.json").string());
    if (single.empty()) return "replay produced an empty report";
    if (single != parallel) return "replay reports differ between parallelism 1 and 8";
    return "";
}

// ---- 10: throughput on a synthetic corpus with mock providers --------------

std::string check_throughput(std::string& note) {
    std::mt19937_64 rng(31337);
    testsupport::VerdictTable table;
    std::vector<EvalInstance> instances;
    for (int i = 0; i < 500; ++i) {
        std::vector<std::string> refs, gens;
        for (int f = 0; f < 10; ++f)
            refs.push_back("i" + std::to_string(i) + "f" + std::to_string(f) + " " +
                           testsupport::random_token(rng, 6) + " " +
                           testsupport::random_token(rng, 6));
        for (int g = 0; g < 15; ++g)
            gens.push_back("i" + std::to_string(i) + "g" + std::to_string(g) + " " +
                           testsupport::random_token(rng, 6) + " " +
                           testsupport::random_token(rng, 6));
        for (const auto& f : refs)
            for (const auto& g : gens)
                if (uniform_below(rng, 10) == 0) table.set(f, g, true);
        instances.push_back(
            testsupport::make_instance("inst-" + std::to_string(i), refs, gens));
    }

    ScriptedJudge scripted(table);
    PipelineConfig cfg;
    cfg.fuzzy_jaccard_threshold = 0.0;
    cfg.cosine_threshold = 0.0;

    const auto start = std::chrono::steady_clock::now();
    auto corpus = evaluate_corpus(instances, cfg, scripted.providers, 1, &scripted.meter);
    const auto stop = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(stop - start).count();

    char buffer[96];
    std::snprintf(buffer, sizeof(buffer), "%.1f s for 500 instances, mean recall %.3f",
                  seconds, corpus.mean_recall);
    note = buffer;
    if (corpus.instances.size() != 500) return "corpus evaluation dropped instances";
    if (seconds >= 60.0) return std::string("too slow: ") + buffer;
    return "";
}

// ---- harness ----------------------------------------------------------------

struct CheckResult {
    std::string name;
    std::string error;
    std::string note;
};

void report(const CheckResult& result, int& failures) {
    if (result.error.empty()) {
        std::cout << "PASS  " << result.name;
        if (!result.note.empty()) std::cout << " (" << result.note << ")";
        std::cout << "\n";
    } else {
        std::cout << "FAIL  " << result.name << ": " << result.error << "\n";
        ++failures;
    }
}

std::string guarded(const std::function<std::string()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        return std::string("unexpected exception: ") + e.what();
    }
}

}  // namespace

int main() {
    int failures = 0;

    report({"instance recall is covered/total and the corpus mean is arithmetic",
            guarded(check_recall_arithmetic), ""},
           failures);

    PipelineAgreement agreement;
    std::string agreement_setup = guarded([&]() {
        agreement = check_pipeline_vs_oracle();
        return std::string();
    });
    report({"staged pipeline coverage equals the exhaustive verdict oracle",
            agreement_setup.empty() ? agreement.equivalence_error : agreement_setup, ""},
           failures);
    report({"no reference/generated pair is judged twice within a decision",
            agreement_setup.empty() ? agreement.blocking_error : agreement_setup, ""},
           failures);

    report({"film-directors example: staged and anchor recall both 0.5 with expected supports",
            guarded(check_film_directors_example), ""},
           failures);
    report({"similarity measures match independent oracles",
            guarded(check_similarity_oracles), ""},
           failures);
    report({"substring-overlap baseline covers 50% and rejects 30% at threshold 0.4",
            guarded(check_erecall_threshold), ""},
           failures);
    report({"agreement statistic is exact, oracle-equal, and category-symmetric",
            guarded(check_fleiss_kappa), ""},
           failures);
    report({"agreement tiers partition every labeled pair",
            guarded(check_tier_partition), ""},
           failures);
    report({"replay reports are byte-identical across parallelism 1 and 8",
            guarded(check_replay_determinism), ""},
           failures);

    std::string throughput_note;
    std::string throughput_error =
        guarded([&]() { return check_throughput(throughput_note); });
    report({"synthetic 500-instance corpus evaluates in under 60 s single-threaded",
            throughput_error, throughput_note},
           failures);

    if (failures == 0) {
        std::cout << "\nall 10 checks passed\n";
        return 0;
    }
    std::cout << "\n" << failures << " of 10 checks failed\n";
    return 1;
}
