#include "recalleval/embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "recalleval/errors.hpp"
#include "recalleval/similarity.hpp"

namespace recalleval {

bool EmbeddingVector::is_zero() const {
    for (double v : values_) {
        if (v != 0.0) return false;
    }
    return true;
}

double EmbeddingVector::l2_norm() const {
    double acc = 0.0;
    for (double v : values_) acc += v * v;
    return std::sqrt(acc);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim()) {
        throw DimMismatch("embedding dims differ: " + std::to_string(u.dim()) + " vs " +
                          std::to_string(v.dim()));
    }
    const double nu = u.l2_norm();
    const double nv = v.l2_norm();
    if (nu == 0.0 || nv == 0.0) throw ZeroVector("cosine of all-zero vector");
    double dot = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) dot += u.values()[i] * v.values()[i];
    double c = dot / (nu * nv);
    if (c < 0.0) c = 0.0;
    if (c > 1.0) c = 1.0;
    return c;
}

std::uint64_t stable_hash64(const std::string& key, std::uint64_t seed) {
    // FNV-1a, offset basis perturbed by the seed.
    std::uint64_t h = 14695981039346656037ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

EmbeddingVector hash_embed(const std::string& text, std::size_t dim) {
    if (dim < 8) throw std::invalid_argument("hash_embed requires dim >= 8");
    std::vector<double> values(dim, 0.0);
    std::vector<std::string> tokens = tokenize(text);
    if (tokens.empty() && !text.empty()) tokens.push_back(text);
    for (const auto& tok : tokens) {
        const std::uint64_t slot = stable_hash64(tok, 1) % dim;
        const double sign = (stable_hash64(tok, 2) & 1ULL) ? 1.0 : -1.0;
        values[slot] += sign;
    }
    EmbeddingVector vec(std::move(values));
    if (vec.is_zero() && !tokens.empty()) {
        // Signed collisions cancelled everything; pin one coordinate so
        // non-empty text never maps to the zero vector.
        std::vector<double> fallback(dim, 0.0);
        fallback[stable_hash64(text, 3) % dim] = 1.0;
        vec = EmbeddingVector(std::move(fallback));
    }
    const double norm = vec.l2_norm();
    if (norm > 0.0) {
        std::vector<double> scaled = vec.values();
        for (double& v : scaled) v /= norm;
        vec = EmbeddingVector(std::move(scaled));
    }
    return vec;
}

const char* to_string(EmbedRole role) {
    return role == EmbedRole::query ? "query" : "document";
}

std::vector<EmbeddingVector> HashingEmbedder::embed(const std::vector<std::string>& texts,
                                                    EmbedRole /*role*/) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embed(t, dim_));
    return out;
}

}  // namespace recalleval
