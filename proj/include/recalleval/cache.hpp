#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <string>
#include <vector>

#include "recalleval/embedding.hpp"
#include "recalleval/provider.hpp"

namespace recalleval {

enum class CacheMode { readwrite, replay };

CacheMode parse_cache_mode(const std::string& name);
std::string to_string(CacheMode mode);

/// Content-addressed store for provider responses. Every record lives in its
/// own file named after the request digest, so concurrent writers for the
/// same request are idempotent and a populated directory can be shipped to
/// reproduce a run without network access (replay mode).
class ResponseCache {
public:
    ResponseCache(std::filesystem::path directory, CacheMode mode);

    CacheMode mode() const { return mode_; }
    const std::filesystem::path& directory() const { return directory_; }

    /// Digest covering everything that could change a chat response.
    static std::string chat_digest(const ChatRequest& request);
    /// Digest for an embedding batch under a given provider/model/role.
    static std::string embedding_digest(const std::string& provider_id,
                                        const std::string& model_id, EmbedRole role,
                                        std::size_t dim, const std::vector<std::string>& texts);

    std::optional<ChatResponse> lookup_chat(const std::string& digest);
    void store_chat(const std::string& digest, const ChatRequest& request,
                    const ChatResponse& response);

    std::optional<std::vector<EmbeddingVector>> lookup_embedding(const std::string& digest);
    void store_embedding(const std::string& digest, const std::vector<EmbeddingVector>& vectors);

    /// Digests consulted (hit or stored) since construction, sorted.
    std::vector<std::string> digests_used() const;

    /// Number of well-formed records on disk; throws ParseError on a corrupt one.
    std::size_t verify() const;

private:
    std::filesystem::path record_path(const std::string& digest) const;
    std::optional<std::string> read_record(const std::string& digest);
    void write_record(const std::string& digest, const std::string& payload);
    void mark_used(const std::string& digest);

    std::filesystem::path directory_;
    CacheMode mode_;
    mutable std::mutex mutex_;
    std::set<std::string> used_;
};

/// Chat access point used by judges: consults the cache, then the transport
/// (with retries), and records usage. In replay mode a miss is an error.
class CachedChatClient {
public:
    CachedChatClient(ChatTransport* transport, ResponseCache* cache, UsageMeter* meter,
                     RetryPolicy retry = {}, std::size_t max_in_flight = 0);

    ChatResponse complete(const ChatRequest& request);

private:
    ChatTransport* transport_;
    ResponseCache* cache_;
    UsageMeter* meter_;
    RetryPolicy retry_;
    std::unique_ptr<std::counting_semaphore<>> gate_;
};

/// Embedding provider that serves from the cache when possible.
class CachedEmbeddingProvider : public EmbeddingProvider {
public:
    CachedEmbeddingProvider(EmbeddingProvider* inner, std::string provider_id,
                            std::string model_id, std::size_t dim, ResponseCache* cache,
                            UsageMeter* meter);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                       EmbedRole role) override;

private:
    EmbeddingProvider* inner_;
    std::string provider_id_;
    std::string model_id_;
    std::size_t dim_;
    ResponseCache* cache_;
    UsageMeter* meter_;
};

}  // namespace recalleval
