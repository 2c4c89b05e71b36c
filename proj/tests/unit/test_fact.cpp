#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"
#include "recalleval/fact.hpp"

using recalleval::EvalInstance;
using recalleval::Fact;
using recalleval::FactKind;
using recalleval::FactOrigin;
using recalleval::FactSet;
using recalleval::make_fact_id;

TEST_CASE("Fact::make normalizes spans and derives the kind from the anchor") {
    auto split = Fact::make("reference-1", "Jean-Luc  Godard", "Directed “Breathless”.",
                            FactOrigin::reference);
    CHECK(split.kind() == FactKind::split_span);
    CHECK(split.anchor() == "jean-luc godard");
    CHECK(split.text() == "directed \"breathless\".");
    CHECK(split.origin() == FactOrigin::reference);

    auto mono = Fact::make("generated-1", std::nullopt, "Plain statement", FactOrigin::generated);
    CHECK(mono.kind() == FactKind::monolithic);
    CHECK_FALSE(mono.anchor().has_value());
}

TEST_CASE("Fact::make rejects degenerate spans") {
    CHECK_THROWS_AS(Fact::make("", std::nullopt, "text", FactOrigin::reference),
                    std::invalid_argument);
    CHECK_THROWS_AS(Fact::make("reference-1", std::nullopt, "   ", FactOrigin::reference),
                    std::invalid_argument);
    CHECK_THROWS_AS(Fact::make("reference-1", "  ", "text", FactOrigin::reference),
                    std::invalid_argument);
}

TEST_CASE("with_text preserves id, anchor and origin") {
    auto f = Fact::make("generated-3", "anchor", "He directed it.", FactOrigin::generated);
    auto g = f.with_text("someone directed something.");
    CHECK(g.id() == "generated-3");
    CHECK(g.anchor() == "anchor");
    CHECK(g.origin() == FactOrigin::generated);
    CHECK(g.kind() == FactKind::split_span);
    CHECK(g.text() == "someone directed something.");
    CHECK(f.text() == "he directed it.");  // original untouched
}

TEST_CASE("FactSet::make enforces shared origin and unique ids") {
    auto a = Fact::make("reference-1", std::nullopt, "a", FactOrigin::reference);
    auto b = Fact::make("reference-2", std::nullopt, "b", FactOrigin::reference);
    auto set = FactSet::make({a, b}, FactOrigin::reference);
    CHECK(set.size() == 2);
    CHECK(set.index_of("reference-2") == 1);
    CHECK_FALSE(set.index_of("reference-9").has_value());

    auto dup = Fact::make("reference-1", std::nullopt, "c", FactOrigin::reference);
    CHECK_THROWS_AS(FactSet::make({a, dup}, FactOrigin::reference), std::invalid_argument);

    auto wrong = Fact::make("generated-1", std::nullopt, "d", FactOrigin::generated);
    CHECK_THROWS_AS(FactSet::make({a, wrong}, FactOrigin::reference), std::invalid_argument);
}

TEST_CASE("fact ids are origin-ordinal strings") {
    CHECK(make_fact_id(FactOrigin::reference, 1) == "reference-1");
    CHECK(make_fact_id(FactOrigin::generated, 12) == "generated-12");
}

TEST_CASE("EvalInstance flags extraction only while generated facts are absent") {
    EvalInstance raw;
    raw.generated_raw = "1. something";
    CHECK(raw.needs_extraction());

    EvalInstance done = testsupport::make_instance("i1", {"a"}, {"b"});
    CHECK_FALSE(done.needs_extraction());
}
