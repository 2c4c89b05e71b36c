#include "recalleval/text.hpp"

namespace recalleval {

std::vector<char32_t> utf8_decode(const std::string& text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    std::size_t i = 0;
    const auto n = text.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            out.push_back(b0);  // stray continuation byte, keep as Latin-1
            ++i;
            continue;
        }
        if (i + len > n) {
            out.push_back(b0);
            ++i;
            continue;
        }
        bool valid = true;
        for (std::size_t k = 1; k < len; ++k) {
            const auto bk = static_cast<unsigned char>(text[i + k]);
            if ((bk & 0xC0) != 0x80) {
                valid = false;
                break;
            }
            cp = (cp << 6) | (bk & 0x3F);
        }
        // Reject overlong encodings and surrogate range.
        if (valid && len == 2 && cp < 0x80) valid = false;
        if (valid && len == 3 && cp < 0x800) valid = false;
        if (valid && len == 4 && cp < 0x10000) valid = false;
        if (valid && cp >= 0xD800 && cp <= 0xDFFF) valid = false;
        if (valid && cp > 0x10FFFF) valid = false;
        if (!valid) {
            out.push_back(b0);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string utf8_encode(const std::vector<char32_t>& points) {
    std::string out;
    out.reserve(points.size());
    for (char32_t cp : points) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

char32_t fold_case(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    // Latin-1 supplement, excluding the multiplication sign.
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    // Latin Extended-A comes in interleaved upper/lower pairs.
    if (cp >= 0x0100 && cp <= 0x0137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x0139 && cp <= 0x0148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x014A && cp <= 0x0177) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp == 0x0130) return U'i';     // dotted capital I
    if (cp == 0x0178) return 0x00FF;   // Y with diaeresis
    if (cp >= 0x0179 && cp <= 0x017E) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x017F) return U's';     // long s
    // Greek and Cyrillic basic blocks.
    if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 0x20;
    if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
    if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
    return cp;
}

namespace {

bool is_space_cp(char32_t cp) {
    switch (cp) {
        case U' ':
        case U'\t':
        case U'\n':
        case U'\r':
        case 0x0B:
        case 0x0C:
        case 0x00A0:  // no-break space
        case 0x1680:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Quote, dash and ellipsis mappings to canonical ASCII, plus removal of
// zero-width characters. Returns the replacement string, or nullptr when
// the code point is not remapped.
const char* punct_replacement(char32_t cp) {
    switch (cp) {
        case 0x2018:
        case 0x2019:
        case 0x201A:
        case 0x201B:
        case 0x2032:  // prime
        case 0x00B4:  // acute accent used as apostrophe
            return "'";
        case 0x201C:
        case 0x201D:
        case 0x201E:
        case 0x201F:
        case 0x2033:  // double prime
        case 0x00AB:  // guillemets
        case 0x00BB:
            return "\"";
        case 0x2010:
        case 0x2011:
        case 0x2012:
        case 0x2013:
        case 0x2014:
        case 0x2015:
        case 0x2212:  // minus sign
            return "-";
        case 0x2026:
            return "...";
        case 0x200B:
        case 0x200C:
        case 0x200D:
        case 0xFEFF:
            return "";
        default:
            return nullptr;
    }
}

}  // namespace

std::string normalize_text(const std::string& raw) {
    const auto points = utf8_decode(raw);
    std::vector<char32_t> out;
    out.reserve(points.size());
    bool pending_space = false;
    for (char32_t cp : points) {
        // Fullwidth ASCII variants map onto the ASCII block.
        if (cp >= 0xFF01 && cp <= 0xFF5E) cp = cp - 0xFEE0;
        if (is_space_cp(cp)) {
            pending_space = true;
            continue;
        }
        if (const char* repl = punct_replacement(cp)) {
            if (pending_space && !out.empty()) out.push_back(U' ');
            pending_space = false;
            for (const char* p = repl; *p; ++p) out.push_back(static_cast<char32_t>(*p));
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(U' ');
        pending_space = false;
        out.push_back(fold_case(cp));
    }
    return utf8_encode(out);
}

}  // namespace recalleval
