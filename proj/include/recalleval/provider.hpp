#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "recalleval/embedding.hpp"

namespace recalleval {

/// Identity and limits shared by every request a run issues.
struct ChatParams {
    std::string provider_id = "mock";
    std::string model_id = "mock-model";
    std::size_t max_output_tokens = 256;
};

/// One chat completion request. Temperature is pinned to 0.0 so judgments
/// stay deterministic; there is deliberately no way to change it.
struct ChatRequest {
    std::string provider_id;
    std::string model_id;
    std::string prompt;
    std::size_t max_output_tokens = 256;
    std::string template_digest;  // folded into the cache key
    static constexpr double temperature = 0.0;
};

struct ChatResponse {
    std::string text;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    double latency_ms = 0.0;
};

/// Raw transport to a chat provider. Implementations must be safe to call
/// from multiple threads.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Test/offline transport backed by a handler function.
class MockChatTransport : public ChatTransport {
public:
    using Handler = std::function<std::string(const ChatRequest&)>;
    explicit MockChatTransport(Handler handler) : handler_(std::move(handler)) {}

    ChatResponse complete(const ChatRequest& request) override;
    std::uint64_t calls() const { return calls_.load(); }

private:
    Handler handler_;
    std::atomic<std::uint64_t> calls_{0};
};

/// HTTP JSON transport speaking the /chat/completions convention. The
/// endpoint is a full URL; the API key (if any) is read from the named
/// environment variable at call time.
class HttpChatTransport : public ChatTransport {
public:
    HttpChatTransport(std::string endpoint_url, std::string api_key_env = "",
                      int timeout_seconds = 120);
    ChatResponse complete(const ChatRequest& request) override;

private:
    std::string endpoint_url_;
    std::string api_key_env_;
    int timeout_seconds_;
};

/// Offline transport answering from substring rules: the first rule whose
/// needle occurs in the prompt supplies the response. Lets demo runs and
/// fixtures script provider behavior from a JSON file without a network.
struct ScriptRule {
    std::string prompt_contains;
    std::string response;
};

class ScriptedChatTransport : public ChatTransport {
public:
    explicit ScriptedChatTransport(std::vector<ScriptRule> rules) : rules_(std::move(rules)) {}
    static ScriptedChatTransport from_file(const std::string& path);

    ChatResponse complete(const ChatRequest& request) override;

private:
    std::vector<ScriptRule> rules_;
};

/// HTTP JSON embedding service: POST {model, input, role} returning
/// {data: [{embedding: [...]}, ...]} in input order.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string endpoint_url, std::string model_id,
                          std::string api_key_env = "", int timeout_seconds = 120);
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                       EmbedRole role) override;

private:
    std::string endpoint_url_;
    std::string model_id_;
    std::string api_key_env_;
    int timeout_seconds_;
};

struct RetryPolicy {
    std::size_t max_attempts = 3;
    std::size_t base_delay_ms = 200;  // doubled per attempt
};

/// Calls the transport with exponential backoff on ProviderError; rethrows
/// the last error once attempts are exhausted.
ChatResponse complete_with_retries(ChatTransport& transport, const ChatRequest& request,
                                   const RetryPolicy& policy);

/// Run-wide provider accounting. All counters are atomic.
struct UsageMeter {
    std::atomic<std::uint64_t> chat_calls{0};
    std::atomic<std::uint64_t> chat_cache_hits{0};
    std::atomic<std::uint64_t> embed_calls{0};
    std::atomic<std::uint64_t> embed_cache_hits{0};
};

/// Immutable snapshot of a UsageMeter for reporting.
struct UsageTotals {
    std::uint64_t chat_calls = 0;
    std::uint64_t chat_cache_hits = 0;
    std::uint64_t embed_calls = 0;
    std::uint64_t embed_cache_hits = 0;
};

UsageTotals snapshot(const UsageMeter& meter);

}  // namespace recalleval
