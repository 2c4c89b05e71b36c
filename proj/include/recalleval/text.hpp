#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace recalleval {

// Minimal UTF-8 helpers. Invalid byte sequences are interpreted as Latin-1
// so normalization stays total and idempotent on arbitrary input.
std::vector<char32_t> utf8_decode(const std::string& text);
std::string utf8_encode(const std::vector<char32_t>& points);

/// Lowercases a single code point. Covers ASCII, Latin-1, Latin Extended-A,
/// basic Greek and basic Cyrillic; everything else passes through.
char32_t fold_case(char32_t cp);

/// Canonicalizes raw text for matching: curly quotes and dashes to ASCII,
/// fullwidth forms to their ASCII counterparts, Unicode spaces collapsed,
/// case folded, ends trimmed. Diacritics are preserved. Idempotent.
std::string normalize_text(const std::string& raw);

}  // namespace recalleval
