#pragma once

#include <string>
#include <vector>

#include "recalleval/fact.hpp"
#include "recalleval/metaeval.hpp"

namespace recalleval {

/// Loads the instance corpus. One JSON object per line with instance_id,
/// question, reference (list of {anchor?, text}) and exactly one of
/// generated_answer (raw text for extraction) or generated (pre-split fact
/// list). Texts are normalized and near-duplicate facts dropped on the way
/// in. Any bad line fails the whole load (SchemaError with line number and
/// field path) so corpus statistics never come from a partial file.
std::vector<EvalInstance> load_instances(const std::string& path);

/// Writes instances back out in the same schema, with generated facts
/// materialized; the extract subcommand's output format.
void write_instances(const std::string& path, const std::vector<EvalInstance>& instances);

/// Loads pair labels: {instance_id, reference_id, source_id, label} per
/// line, label one of match / no_match. All-or-nothing like load_instances.
std::vector<PairLabel> load_pair_labels(const std::string& path);

}  // namespace recalleval
