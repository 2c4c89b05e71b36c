#pragma once

#include "recalleval/fact.hpp"

namespace recalleval {

/// Redundancy filter: drops facts whose normalized text equals, or whose
/// longest-common-substring ratio against an earlier kept fact reaches,
/// near_dup_ratio. Keeps the first occurrence of each duplicate group and
/// preserves input order. Idempotent.
FactSet dedupe_facts(const FactSet& set, double near_dup_ratio = 0.95);

}  // namespace recalleval
