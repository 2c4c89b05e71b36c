#include "recalleval/provider.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "recalleval/errors.hpp"

namespace recalleval {

ChatResponse MockChatTransport::complete(const ChatRequest& request) {
    calls_.fetch_add(1);
    if (!handler_) throw ProviderError("mock chat transport has no handler");
    ChatResponse response;
    response.text = handler_(request);
    return response;
}

namespace {

/// Splits "http://host:port/path" into the client base and the path part.
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("chat endpoint must be a full URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpChatTransport::HttpChatTransport(std::string endpoint_url, std::string api_key_env,
                                     int timeout_seconds)
    : endpoint_url_(std::move(endpoint_url)),
      api_key_env_(std::move(api_key_env)),
      timeout_seconds_(timeout_seconds) {}

ChatResponse HttpChatTransport::complete(const ChatRequest& request) {
    auto [base, path] = split_endpoint(endpoint_url_);

    nlohmann::json body;
    body["model"] = request.model_id;
    body["temperature"] = ChatRequest::temperature;
    body["max_tokens"] = request.max_output_tokens;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}});

    httplib::Headers headers;
    if (!api_key_env_.empty()) {
        const char* key = std::getenv(api_key_env_.c_str());
        if (key == nullptr || *key == '\0')
            throw ConfigError("environment variable " + api_key_env_ + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    // One client per call keeps the transport trivially thread safe.
    httplib::Client client(base);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);

    auto started = std::chrono::steady_clock::now();
    auto result = client.Post(path, headers, body.dump(), "application/json");
    auto elapsed = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - started);

    if (!result)
        throw ProviderError("chat request to " + endpoint_url_ + " failed: " +
                            httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300)
        throw ProviderError("chat request to " + endpoint_url_ + " returned status " +
                            std::to_string(result->status));

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("chat response is not valid JSON: ") + e.what());
    }

    ChatResponse response;
    response.latency_ms = elapsed.count();
    try {
        response.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw ProviderError("chat response is missing choices[0].message.content");
    }
    if (parsed.contains("usage")) {
        const auto& usage = parsed["usage"];
        response.prompt_tokens = usage.value("prompt_tokens", std::uint64_t{0});
        response.completion_tokens = usage.value("completion_tokens", std::uint64_t{0});
    }
    return response;
}

ScriptedChatTransport ScriptedChatTransport::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open script file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("script file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_array()) throw ConfigError("script file " + path + " must hold a JSON array");
    std::vector<ScriptRule> rules;
    for (const auto& entry : doc) {
        if (!entry.contains("prompt_contains") || !entry.contains("response"))
            throw ConfigError("script rules need prompt_contains and response fields");
        rules.push_back({entry["prompt_contains"].get<std::string>(),
                         entry["response"].get<std::string>()});
    }
    return ScriptedChatTransport(std::move(rules));
}

ChatResponse ScriptedChatTransport::complete(const ChatRequest& request) {
    for (const auto& rule : rules_) {
        if (request.prompt.find(rule.prompt_contains) != std::string::npos) {
            ChatResponse response;
            response.text = rule.response;
            return response;
        }
    }
    throw ProviderError("no script rule matches the prompt (model " + request.model_id + ")");
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string endpoint_url, std::string model_id,
                                             std::string api_key_env, int timeout_seconds)
    : endpoint_url_(std::move(endpoint_url)),
      model_id_(std::move(model_id)),
      api_key_env_(std::move(api_key_env)),
      timeout_seconds_(timeout_seconds) {}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts,
                                                          EmbedRole role) {
    if (texts.empty()) return {};
    auto [base, path] = split_endpoint(endpoint_url_);

    nlohmann::json body;
    body["model"] = model_id_;
    body["input"] = texts;
    body["role"] = to_string(role);

    httplib::Headers headers;
    if (!api_key_env_.empty()) {
        const char* key = std::getenv(api_key_env_.c_str());
        if (key == nullptr || *key == '\0')
            throw ConfigError("environment variable " + api_key_env_ + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    httplib::Client client(base);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    auto result = client.Post(path, headers, body.dump(), "application/json");
    if (!result)
        throw ProviderError("embedding request to " + endpoint_url_ + " failed: " +
                            httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300)
        throw ProviderError("embedding request to " + endpoint_url_ + " returned status " +
                            std::to_string(result->status));

    try {
        auto parsed = nlohmann::json::parse(result->body);
        std::vector<EmbeddingVector> vectors;
        for (const auto& row : parsed.at("data"))
            vectors.emplace_back(row.at("embedding").get<std::vector<double>>());
        if (vectors.size() != texts.size())
            throw ProviderError("embedding response has " + std::to_string(vectors.size()) +
                                " vectors for " + std::to_string(texts.size()) + " inputs");
        return vectors;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("embedding response malformed: ") + e.what());
    }
}

ChatResponse complete_with_retries(ChatTransport& transport, const ChatRequest& request,
                                   const RetryPolicy& policy) {
    std::size_t attempts = policy.max_attempts == 0 ? 1 : policy.max_attempts;
    std::size_t delay_ms = policy.base_delay_ms;
    for (std::size_t attempt = 1;; ++attempt) {
        try {
            return transport.complete(request);
        } catch (const ProviderError&) {
            if (attempt >= attempts) throw;
            if (delay_ms > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
                delay_ms *= 2;
            }
        }
    }
}

UsageTotals snapshot(const UsageMeter& meter) {
    UsageTotals totals;
    totals.chat_calls = meter.chat_calls.load();
    totals.chat_cache_hits = meter.chat_cache_hits.load();
    totals.embed_calls = meter.embed_calls.load();
    totals.embed_cache_hits = meter.embed_cache_hits.load();
    return totals;
}

}  // namespace recalleval
