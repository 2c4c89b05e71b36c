#include "recalleval/runconfig.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "recalleval/errors.hpp"

namespace recalleval {

void RunConfig::validate() const {
    pipeline.validate();

    static const std::set<std::string> methods = {"longrecall", "arecall", "erecall",
                                                  "holistic"};
    if (methods.count(method) == 0) throw ConfigError("unknown method: " + method);
    if (extraction_mode != "listed" && extraction_mode != "mirrored_sentences")
        throw ConfigError("unknown extraction mode: " + extraction_mode);
    if (chat_kind != "none" && chat_kind != "http" && chat_kind != "scripted")
        throw ConfigError("unknown chat provider kind: " + chat_kind);
    if (embedding_kind != "hash" && embedding_kind != "http")
        throw ConfigError("unknown embedding provider kind: " + embedding_kind);
    if (cache_mode != "readwrite" && cache_mode != "replay")
        throw ConfigError("unknown cache mode: " + cache_mode);
    if (parallelism == 0) throw ConfigError("parallelism must be at least 1");
    if (embedding_dim < 8) throw ConfigError("embedding_dim must be at least 8");

    if (chat_kind == "http" && (chat_endpoint.empty() || chat_model.empty()))
        throw ConfigError("chat_kind=http requires chat_endpoint and chat_model");
    if (chat_kind == "scripted" && chat_script_path.empty())
        throw ConfigError("chat_kind=scripted requires chat_script_path");
    if (embedding_kind == "http" && (embedding_endpoint.empty() || embedding_model.empty()))
        throw ConfigError("embedding_kind=http requires embedding_endpoint and embedding_model");

    const bool replay = cache_mode == "replay";
    if (replay) {
        if (cache_dir.empty()) throw ConfigError("cache_mode=replay requires cache_dir");
        if (!std::filesystem::is_directory(cache_dir))
            throw ConfigError("replay cache directory does not exist: " + cache_dir);
    }

    // Methods that talk to a chat model need some way to get answers: a live
    // or scripted provider, or a replay cache that already has them.
    const bool needs_chat = method == "longrecall" || method == "holistic" || coref;
    if (needs_chat && chat_kind == "none" && !replay)
        throw ConfigError("method " + method +
                          " needs a chat provider (chat_kind) or a replay cache");
}

namespace {

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& into,
                std::set<std::string>& remaining) {
    if (!obj.contains(key)) return;
    try {
        into = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config field '") + key + "' has the wrong type");
    }
    remaining.erase(key);
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ConfigError("config must be a JSON object");

    std::set<std::string> remaining;
    for (const auto& [key, _] : obj.items()) remaining.insert(key);

    RunConfig cfg;
    read_field(obj, "dataset_path", cfg.dataset_path, remaining);
    read_field(obj, "method", cfg.method, remaining);
    read_field(obj, "fuzzy_jaccard_threshold", cfg.pipeline.fuzzy_jaccard_threshold, remaining);
    read_field(obj, "lcs_threshold", cfg.pipeline.lcs_threshold, remaining);
    read_field(obj, "cosine_threshold", cfg.pipeline.cosine_threshold, remaining);
    read_field(obj, "top_k", cfg.pipeline.top_k, remaining);
    read_field(obj, "fuzzy_token_similarity", cfg.pipeline.fuzzy_token_similarity, remaining);
    read_field(obj, "erecall_threshold", cfg.pipeline.erecall_threshold, remaining);
    read_field(obj, "extraction_mode", cfg.extraction_mode, remaining);
    read_field(obj, "coref", cfg.coref, remaining);
    read_field(obj, "chat_kind", cfg.chat_kind, remaining);
    read_field(obj, "chat_endpoint", cfg.chat_endpoint, remaining);
    read_field(obj, "chat_model", cfg.chat_model, remaining);
    read_field(obj, "chat_api_key_env", cfg.chat_api_key_env, remaining);
    read_field(obj, "chat_script_path", cfg.chat_script_path, remaining);
    read_field(obj, "embedding_kind", cfg.embedding_kind, remaining);
    read_field(obj, "embedding_endpoint", cfg.embedding_endpoint, remaining);
    read_field(obj, "embedding_model", cfg.embedding_model, remaining);
    read_field(obj, "embedding_api_key_env", cfg.embedding_api_key_env, remaining);
    read_field(obj, "embedding_dim", cfg.embedding_dim, remaining);
    read_field(obj, "max_output_tokens", cfg.max_output_tokens, remaining);
    read_field(obj, "template_dir", cfg.template_dir, remaining);
    read_field(obj, "cache_dir", cfg.cache_dir, remaining);
    read_field(obj, "cache_mode", cfg.cache_mode, remaining);
    read_field(obj, "parallelism", cfg.parallelism, remaining);
    read_field(obj, "max_in_flight", cfg.max_in_flight, remaining);
    read_field(obj, "retry_attempts", cfg.retry_attempts, remaining);
    read_field(obj, "retry_base_delay_ms", cfg.retry_base_delay_ms, remaining);
    read_field(obj, "seed", cfg.seed, remaining);
    read_field(obj, "arecall_word_boundary", cfg.arecall_word_boundary, remaining);
    read_field(obj, "output_path", cfg.output_path, remaining);

    if (!remaining.empty())
        throw ConfigError("unknown config field: " + *remaining.begin());
    return cfg;
}

std::string RunConfig::to_json_text() const {
    nlohmann::json obj;
    obj["dataset_path"] = dataset_path;
    obj["method"] = method;
    obj["fuzzy_jaccard_threshold"] = pipeline.fuzzy_jaccard_threshold;
    obj["lcs_threshold"] = pipeline.lcs_threshold;
    obj["cosine_threshold"] = pipeline.cosine_threshold;
    obj["top_k"] = pipeline.top_k;
    obj["fuzzy_token_similarity"] = pipeline.fuzzy_token_similarity;
    obj["erecall_threshold"] = pipeline.erecall_threshold;
    obj["extraction_mode"] = extraction_mode;
    obj["coref"] = coref;
    obj["chat_kind"] = chat_kind;
    obj["chat_endpoint"] = chat_endpoint;
    obj["chat_model"] = chat_model;
    obj["chat_api_key_env"] = chat_api_key_env;
    obj["chat_script_path"] = chat_script_path;
    obj["embedding_kind"] = embedding_kind;
    obj["embedding_endpoint"] = embedding_endpoint;
    obj["embedding_model"] = embedding_model;
    obj["embedding_api_key_env"] = embedding_api_key_env;
    obj["embedding_dim"] = embedding_dim;
    obj["max_output_tokens"] = max_output_tokens;
    obj["template_dir"] = template_dir;
    obj["cache_dir"] = cache_dir;
    obj["cache_mode"] = cache_mode;
    obj["parallelism"] = parallelism;
    obj["max_in_flight"] = max_in_flight;
    obj["retry_attempts"] = retry_attempts;
    obj["retry_base_delay_ms"] = retry_base_delay_ms;
    obj["seed"] = seed;
    obj["arecall_word_boundary"] = arecall_word_boundary;
    obj["output_path"] = output_path;
    return obj.dump(2);
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

}  // namespace recalleval
