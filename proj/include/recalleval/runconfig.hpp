#pragma once

#include <cstdint>
#include <string>

#include "recalleval/config.hpp"

namespace recalleval {

/// Everything a run needs, assembled from an optional JSON config file with
/// command-line flags layered on top. Environment variables supply API keys
/// only; every result-affecting setting lives here so a run can be redone
/// from the config echoed into its report.
struct RunConfig {
    std::string dataset_path;
    std::string method = "longrecall";  // longrecall | arecall | erecall | holistic
    PipelineConfig pipeline;

    // Extraction of raw generated answers.
    std::string extraction_mode = "listed";  // listed | mirrored_sentences
    bool coref = false;

    // Chat provider: none | http | scripted.
    std::string chat_kind = "none";
    std::string chat_endpoint;
    std::string chat_model;
    std::string chat_api_key_env;
    std::string chat_script_path;  // substring-rule script for chat_kind=scripted

    // Embedding provider: hash | http.
    std::string embedding_kind = "hash";
    std::string embedding_endpoint;
    std::string embedding_model;
    std::string embedding_api_key_env;
    std::size_t embedding_dim = 256;

    std::size_t max_output_tokens = 256;
    std::string template_dir;  // overrides built-in prompt templates when set

    std::string cache_dir;
    std::string cache_mode = "readwrite";  // readwrite | replay

    std::size_t parallelism = 1;
    std::size_t max_in_flight = 0;  // 0 = unbounded concurrent provider calls
    std::size_t retry_attempts = 3;
    std::size_t retry_base_delay_ms = 200;

    std::uint64_t seed = 0;
    bool arecall_word_boundary = false;
    std::string output_path;  // empty = stdout

    /// Checks cross-field consistency (method names, provider requirements,
    /// replay needs an existing cache, ...). Throws ConfigError.
    void validate() const;

    /// JSON round trip; parse(serialize(c)) == c. Unknown keys are rejected
    /// so typos in config files fail loudly.
    static RunConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
    static RunConfig from_file(const std::string& path);
};

}  // namespace recalleval
