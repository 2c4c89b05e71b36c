#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "recalleval/baselines.hpp"
#include "recalleval/pipeline.hpp"
#include "recalleval/runconfig.hpp"

namespace recalleval {

/// Canonical serialization: keys sorted, every float printed as %.6f,
/// integers verbatim, 2-space indent, trailing newline. Two equal documents
/// always produce the same bytes, which is what makes report determinism
/// byte-testable.
std::string canonical_dump(const nlohmann::json& value);

nlohmann::json instance_report_json(const InstanceReport& report);
nlohmann::json corpus_report_json(const CorpusReport& corpus);
nlohmann::json holistic_mapping_json(const HolisticMapping& mapping);

/// The config echo embedded in reports. Execution-only knobs (parallelism,
/// max_in_flight, output_path, retry pacing) are left out: they cannot
/// change results, and including them would break byte-identity between
/// runs that differ only in worker count.
nlohmann::json config_echo_json(const RunConfig& cfg);

/// Assembles the full report document: method, config echo, template
/// digests, cache digests used (sorted), and the corpus body. No timestamps
/// anywhere, by design.
nlohmann::json report_document(const RunConfig& cfg, const CorpusReport& corpus,
                               const std::map<std::string, std::string>& template_digests,
                               const std::vector<std::string>& cache_digests,
                               const std::map<std::string, HolisticMapping>& holistic);

}  // namespace recalleval
