#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "recalleval/fact.hpp"
#include "recalleval/runconfig.hpp"

namespace recalleval {

/// Loads the dataset, extracts any raw generated answers per the config's
/// extraction policy (including optional coreference rewriting), evaluates
/// the configured method over the corpus, and writes the canonical report
/// to the configured output (stdout when none). `summary` receives the
/// human-readable wrap-up: mean recall, per-stage coverage, provider usage.
/// Returns the process exit code: 0 on success, 1 on a corpus-level error.
int run(const RunConfig& cfg, std::ostream& summary, std::ostream& errors);

/// The extract subcommand's core: load, extract, write back out. Returns
/// per-instance warnings (coreference fallbacks and the like).
std::vector<std::string> run_extract(const RunConfig& cfg, const std::string& output_path);

}  // namespace recalleval
