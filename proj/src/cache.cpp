#include "recalleval/cache.hpp"

#include <atomic>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "recalleval/digest.hpp"
#include "recalleval/errors.hpp"

namespace recalleval {

CacheMode parse_cache_mode(const std::string& name) {
    if (name == "readwrite") return CacheMode::readwrite;
    if (name == "replay") return CacheMode::replay;
    throw ConfigError("unknown cache mode: " + name);
}

std::string to_string(CacheMode mode) {
    return mode == CacheMode::readwrite ? "readwrite" : "replay";
}

ResponseCache::ResponseCache(std::filesystem::path directory, CacheMode mode)
    : directory_(std::move(directory)), mode_(mode) {
    if (mode_ == CacheMode::replay) {
        if (!std::filesystem::is_directory(directory_))
            throw ConfigError("replay cache directory does not exist: " + directory_.string());
    } else {
        std::filesystem::create_directories(directory_);
    }
}

std::string ResponseCache::chat_digest(const ChatRequest& request) {
    nlohmann::json key;
    key["kind"] = "chat";
    key["provider_id"] = request.provider_id;
    key["model_id"] = request.model_id;
    key["prompt"] = request.prompt;
    key["temperature"] = ChatRequest::temperature;
    key["max_output_tokens"] = request.max_output_tokens;
    key["template_digest"] = request.template_digest;
    return sha256_hex(key.dump());
}

std::string ResponseCache::embedding_digest(const std::string& provider_id,
                                            const std::string& model_id, EmbedRole role,
                                            std::size_t dim,
                                            const std::vector<std::string>& texts) {
    nlohmann::json key;
    key["kind"] = "embedding";
    key["provider_id"] = provider_id;
    key["model_id"] = model_id;
    key["role"] = to_string(role);
    key["dim"] = dim;
    key["texts"] = texts;
    return sha256_hex(key.dump());
}

std::filesystem::path ResponseCache::record_path(const std::string& digest) const {
    return directory_ / (digest + ".json");
}

void ResponseCache::mark_used(const std::string& digest) {
    std::lock_guard lock(mutex_);
    used_.insert(digest);
}

std::optional<std::string> ResponseCache::read_record(const std::string& digest) {
    std::ifstream in(record_path(digest), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void ResponseCache::write_record(const std::string& digest, const std::string& payload) {
    if (mode_ == CacheMode::replay)
        throw RecallError("cache is read-only in replay mode");
    auto final_path = record_path(digest);
    {
        std::lock_guard lock(mutex_);
        if (std::filesystem::exists(final_path)) return;  // identical by construction
    }
    // Unique temp name, then rename: concurrent writers race harmlessly.
    static std::atomic<std::uint64_t> counter{0};
    std::ostringstream tmp_name;
    tmp_name << digest << ".tmp." << counter.fetch_add(1);
    auto tmp_path = directory_ / tmp_name.str();
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) throw RecallError("cannot write cache record: " + tmp_path.string());
        out << payload;
    }
    std::filesystem::rename(tmp_path, final_path);
}

std::optional<ChatResponse> ResponseCache::lookup_chat(const std::string& digest) {
    auto raw = read_record(digest);
    if (!raw) return std::nullopt;
    nlohmann::json record;
    try {
        record = nlohmann::json::parse(*raw);
        ChatResponse response;
        const auto& body = record.at("response");
        response.text = body.at("text").get<std::string>();
        response.prompt_tokens = body.value("prompt_tokens", std::uint64_t{0});
        response.completion_tokens = body.value("completion_tokens", std::uint64_t{0});
        response.latency_ms = body.value("latency_ms", 0.0);
        mark_used(digest);
        return response;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("corrupt cache record " + record_path(digest).string() + ": " + e.what());
    }
}

void ResponseCache::store_chat(const std::string& digest, const ChatRequest& request,
                               const ChatResponse& response) {
    nlohmann::json record;
    record["kind"] = "chat";
    record["request"]["provider_id"] = request.provider_id;
    record["request"]["model_id"] = request.model_id;
    record["request"]["prompt"] = request.prompt;
    record["request"]["temperature"] = ChatRequest::temperature;
    record["request"]["max_output_tokens"] = request.max_output_tokens;
    record["request"]["template_digest"] = request.template_digest;
    record["response"]["text"] = response.text;
    record["response"]["prompt_tokens"] = response.prompt_tokens;
    record["response"]["completion_tokens"] = response.completion_tokens;
    record["response"]["latency_ms"] = response.latency_ms;
    record["created_at"] = static_cast<std::int64_t>(std::time(nullptr));
    write_record(digest, record.dump(2));
    mark_used(digest);
}

std::optional<std::vector<EmbeddingVector>> ResponseCache::lookup_embedding(
    const std::string& digest) {
    auto raw = read_record(digest);
    if (!raw) return std::nullopt;
    try {
        auto record = nlohmann::json::parse(*raw);
        std::vector<EmbeddingVector> vectors;
        for (const auto& values : record.at("vectors"))
            vectors.emplace_back(values.get<std::vector<double>>());
        mark_used(digest);
        return vectors;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("corrupt cache record " + record_path(digest).string() + ": " + e.what());
    }
}

void ResponseCache::store_embedding(const std::string& digest,
                                    const std::vector<EmbeddingVector>& vectors) {
    nlohmann::json record;
    record["kind"] = "embedding";
    auto rows = nlohmann::json::array();
    for (const auto& vec : vectors) rows.push_back(vec.values());
    record["vectors"] = std::move(rows);
    record["created_at"] = static_cast<std::int64_t>(std::time(nullptr));
    write_record(digest, record.dump(2));
    mark_used(digest);
}

std::vector<std::string> ResponseCache::digests_used() const {
    std::lock_guard lock(mutex_);
    return {used_.begin(), used_.end()};
}

std::size_t ResponseCache::verify() const {
    std::size_t valid = 0;
    for (const auto& entry : std::filesystem::directory_iterator(directory_)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(buffer.str());
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("corrupt cache record " + entry.path().string() + ": " + e.what());
        }
        const std::string kind = record.value("kind", "");
        if (kind == "chat") {
            // Chat records carry their request, so the digest can be rechecked.
            ChatRequest request;
            try {
                const auto& req = record.at("request");
                request.provider_id = req.at("provider_id").get<std::string>();
                request.model_id = req.at("model_id").get<std::string>();
                request.prompt = req.at("prompt").get<std::string>();
                request.max_output_tokens = req.at("max_output_tokens").get<std::size_t>();
                request.template_digest = req.at("template_digest").get<std::string>();
                record.at("response").at("text").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw ParseError("corrupt cache record " + entry.path().string() + ": " +
                                 e.what());
            }
            if (chat_digest(request) != entry.path().stem().string())
                throw ParseError("cache record digest mismatch: " + entry.path().string());
        } else if (kind == "embedding") {
            if (!record.contains("vectors") || !record["vectors"].is_array())
                throw ParseError("corrupt cache record " + entry.path().string() +
                                 ": missing vectors");
        } else {
            throw ParseError("corrupt cache record " + entry.path().string() +
                             ": unknown kind \"" + kind + "\"");
        }
        ++valid;
    }
    return valid;
}

namespace {

struct GateGuard {
    std::counting_semaphore<>* gate;
    explicit GateGuard(std::counting_semaphore<>* g) : gate(g) {
        if (gate != nullptr) gate->acquire();
    }
    ~GateGuard() {
        if (gate != nullptr) gate->release();
    }
};

}  // namespace

CachedChatClient::CachedChatClient(ChatTransport* transport, ResponseCache* cache,
                                   UsageMeter* meter, RetryPolicy retry,
                                   std::size_t max_in_flight)
    : transport_(transport), cache_(cache), meter_(meter), retry_(retry) {
    if (max_in_flight > 0)
        gate_ = std::make_unique<std::counting_semaphore<>>(
            static_cast<std::ptrdiff_t>(max_in_flight));
}

ChatResponse CachedChatClient::complete(const ChatRequest& request) {
    std::string digest;
    if (cache_ != nullptr) {
        digest = ResponseCache::chat_digest(request);
        if (auto hit = cache_->lookup_chat(digest)) {
            if (meter_ != nullptr) meter_->chat_cache_hits.fetch_add(1);
            return *hit;
        }
        if (cache_->mode() == CacheMode::replay) throw CacheMissInReplay(digest);
    }
    if (transport_ == nullptr)
        throw ProviderError("no chat transport configured and request is not cached");
    ChatResponse response;
    {
        GateGuard guard(gate_.get());
        response = complete_with_retries(*transport_, request, retry_);
    }
    if (meter_ != nullptr) meter_->chat_calls.fetch_add(1);
    if (cache_ != nullptr) cache_->store_chat(digest, request, response);
    return response;
}

CachedEmbeddingProvider::CachedEmbeddingProvider(EmbeddingProvider* inner,
                                                 std::string provider_id, std::string model_id,
                                                 std::size_t dim, ResponseCache* cache,
                                                 UsageMeter* meter)
    : inner_(inner),
      provider_id_(std::move(provider_id)),
      model_id_(std::move(model_id)),
      dim_(dim),
      cache_(cache),
      meter_(meter) {}

std::vector<EmbeddingVector> CachedEmbeddingProvider::embed(
    const std::vector<std::string>& texts, EmbedRole role) {
    if (texts.empty()) return {};
    std::string digest;
    if (cache_ != nullptr) {
        digest = ResponseCache::embedding_digest(provider_id_, model_id_, role, dim_, texts);
        if (auto hit = cache_->lookup_embedding(digest)) {
            if (meter_ != nullptr) meter_->embed_cache_hits.fetch_add(1);
            return *hit;
        }
        if (cache_->mode() == CacheMode::replay) throw CacheMissInReplay(digest);
    }
    if (inner_ == nullptr)
        throw ProviderError("no embedding provider configured and batch is not cached");
    auto vectors = inner_->embed(texts, role);
    if (meter_ != nullptr) meter_->embed_calls.fetch_add(1);
    if (cache_ != nullptr) cache_->store_embedding(digest, vectors);
    return vectors;
}

}  // namespace recalleval
