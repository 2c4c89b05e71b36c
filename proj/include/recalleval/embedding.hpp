#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace recalleval {

/// Fixed-length dense vector. dim() always equals values().size().
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}

    const std::vector<double>& values() const { return values_; }
    std::size_t dim() const { return values_.size(); }
    bool is_zero() const;
    double l2_norm() const;

private:
    std::vector<double> values_;
};

/// Cosine similarity clamped into [0,1] so one threshold scale covers
/// providers with and without negative similarities. Throws DimMismatch when
/// dims differ and ZeroVector when either vector is all-zero.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Deterministic bag-of-tokens embedding: each token adds +/-1 to the
/// coordinate chosen by a stable 64-bit hash mod dim, sign taken from an
/// independent hash bit, then the vector is L2-normalized. Identical across
/// runs and platforms. Non-empty text always yields a nonzero vector: a
/// text with no tokens is hashed whole, and a fully cancelled accumulation
/// falls back to a single whole-text coordinate.
EmbeddingVector hash_embed(const std::string& text, std::size_t dim = 256);

/// Stable FNV-1a 64-bit hash, seedable so independent hash streams can be
/// derived from the same key.
std::uint64_t stable_hash64(const std::string& key, std::uint64_t seed = 0);

/// Whether an embedding request is for the query or the document side;
/// providers that distinguish retrieval roles receive it, others ignore it.
enum class EmbedRole { query, document };

const char* to_string(EmbedRole role);

/// Embedding provider surface: batch-embeds texts under a role.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                               EmbedRole role) = 0;
};

/// Offline provider backed by hash_embed; the default for tests and replay.
class HashingEmbedder : public EmbeddingProvider {
public:
    explicit HashingEmbedder(std::size_t dim = 256) : dim_(dim) {}
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                       EmbedRole role) override;
    std::size_t dim() const { return dim_; }

private:
    std::size_t dim_;
};

}  // namespace recalleval
