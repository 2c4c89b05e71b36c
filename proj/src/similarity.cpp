#include "recalleval/similarity.hpp"

#include <algorithm>
#include <cstring>

#include "recalleval/text.hpp"

namespace recalleval {

namespace {

bool is_ascii_punct(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::strchr("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~", c) != nullptr;
}

std::size_t levenshtein_distance(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::size_t> prev(m + 1);
    std::vector<std::size_t> cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double levenshtein_similarity_cp(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
    if (a.empty() && b.empty()) return 1.0;
    const auto longer = std::max(a.size(), b.size());
    const auto dist = levenshtein_distance(a, b);
    return 1.0 - static_cast<double>(dist) / static_cast<double>(longer);
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    const auto is_space = [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return u == ' ' || u == '\t' || u == '\n' || u == '\r' || u == '\f' || u == '\v';
    };
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < n && !is_space(text[i])) ++i;
        if (i == start) continue;
        std::size_t lo = start;
        std::size_t hi = i;
        while (lo < hi && is_ascii_punct(text[lo])) ++lo;
        while (hi > lo && is_ascii_punct(text[hi - 1])) --hi;
        if (hi > lo) tokens.emplace_back(text.substr(lo, hi - lo));
    }
    return tokens;
}

double levenshtein_similarity(const std::string& a, const std::string& b) {
    return levenshtein_similarity_cp(utf8_decode(a), utf8_decode(b));
}

double fuzzy_jaccard(const std::string& a, const std::string& b, double token_sim) {
    std::vector<std::string> ta = tokenize(a);
    std::vector<std::string> tb = tokenize(b);
    if (ta.empty() && tb.empty()) return 1.0;
    if (ta.empty() || tb.empty()) return 0.0;
    // Canonical argument order makes the greedy pairing independent of which
    // side was passed first, so the score is exactly symmetric.
    if (std::lexicographical_compare(tb.begin(), tb.end(), ta.begin(), ta.end())) {
        std::swap(ta, tb);
    }

    std::vector<std::vector<char32_t>> pa(ta.size());
    std::vector<std::vector<char32_t>> pb(tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) pa[i] = utf8_decode(ta[i]);
    for (std::size_t j = 0; j < tb.size(); ++j) pb[j] = utf8_decode(tb[j]);

    struct Pair {
        double sim;
        std::size_t i;
        std::size_t j;
    };
    std::vector<Pair> pairs;
    pairs.reserve(ta.size() * tb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        for (std::size_t j = 0; j < pb.size(); ++j) {
            const double sim = levenshtein_similarity_cp(pa[i], pb[j]);
            if (sim >= token_sim) pairs.push_back({sim, i, j});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
        if (x.sim != y.sim) return x.sim > y.sim;
        if (x.i != y.i) return x.i < y.i;
        return x.j < y.j;
    });

    std::vector<bool> used_a(ta.size(), false);
    std::vector<bool> used_b(tb.size(), false);
    std::size_t matched = 0;
    for (const auto& p : pairs) {
        if (used_a[p.i] || used_b[p.j]) continue;
        used_a[p.i] = true;
        used_b[p.j] = true;
        ++matched;
    }
    const double denom = static_cast<double>(ta.size() + tb.size() - matched);
    return static_cast<double>(matched) / denom;
}

double lcs_subsequence_ratio(const std::string& a, const std::string& b) {
    const auto pa = utf8_decode(a);
    const auto pb = utf8_decode(b);
    if (pa.empty() && pb.empty()) return 1.0;
    if (pa.empty() || pb.empty()) return 0.0;
    const std::size_t n = pa.size();
    const std::size_t m = pb.size();
    std::vector<std::size_t> prev(m + 1, 0);
    std::vector<std::size_t> cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            if (pa[i - 1] == pb[j - 1]) {
                cur[j] = prev[j - 1] + 1;
            } else {
                cur[j] = std::max(prev[j], cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    const double lcs = static_cast<double>(prev[m]);
    return lcs / static_cast<double>(std::min(n, m));
}

double lcs_substring_ratio(const std::string& a, const std::string& b) {
    const auto pa = utf8_decode(a);
    const auto pb = utf8_decode(b);
    if (pa.empty() && pb.empty()) return 1.0;
    if (pa.empty() || pb.empty()) return 0.0;
    const std::size_t n = pa.size();
    const std::size_t m = pb.size();
    std::vector<std::size_t> prev(m + 1, 0);
    std::vector<std::size_t> cur(m + 1, 0);
    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            if (pa[i - 1] == pb[j - 1]) {
                cur[j] = prev[j - 1] + 1;
                best = std::max(best, cur[j]);
            } else {
                cur[j] = 0;
            }
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(best) / static_cast<double>(std::min(n, m));
}

}  // namespace recalleval
