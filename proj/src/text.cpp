#include "lemmarec/text.hpp"

#include <array>
#include <utility>

namespace lemmarec::text {

std::vector<char32_t> decode_utf8(const std::string& s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    const auto n = s.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0 && i + 1 < n && (static_cast<unsigned char>(s[i + 1]) & 0xC0) == 0x80) {
            cp = static_cast<char32_t>((b0 & 0x1F) << 6 | (static_cast<unsigned char>(s[i + 1]) & 0x3F));
            len = 2;
            if (cp < 0x80) cp = 0xFFFD;  // overlong
        } else if ((b0 & 0xF0) == 0xE0 && i + 2 < n && (static_cast<unsigned char>(s[i + 1]) & 0xC0) == 0x80 &&
                   (static_cast<unsigned char>(s[i + 2]) & 0xC0) == 0x80) {
            cp = static_cast<char32_t>((b0 & 0x0F) << 12 | (static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6 |
                                       (static_cast<unsigned char>(s[i + 2]) & 0x3F));
            len = 3;
            if (cp < 0x800) cp = 0xFFFD;
        } else if ((b0 & 0xF8) == 0xF0 && i + 3 < n && (static_cast<unsigned char>(s[i + 1]) & 0xC0) == 0x80 &&
                   (static_cast<unsigned char>(s[i + 2]) & 0xC0) == 0x80 &&
                   (static_cast<unsigned char>(s[i + 3]) & 0xC0) == 0x80) {
            cp = static_cast<char32_t>((b0 & 0x07) << 18 | (static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12 |
                                       (static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6 |
                                       (static_cast<unsigned char>(s[i + 3]) & 0x3F));
            len = 4;
            if (cp < 0x10000 || cp > 0x10FFFF) cp = 0xFFFD;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
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

namespace {

// (base, combining mark) -> precomposed. Covers the Latin letters plus the
// combining marks that occur in romanized Latin transcriptions.
struct Composition {
    char32_t base;
    char32_t mark;
    char32_t composed;
};

constexpr std::array<Composition, 74> kCompositions{{
    // grave U+0300
    {U'A', 0x0300, 0x00C0}, {U'E', 0x0300, 0x00C8}, {U'I', 0x0300, 0x00CC},
    {U'O', 0x0300, 0x00D2}, {U'U', 0x0300, 0x00D9},
    {U'a', 0x0300, 0x00E0}, {U'e', 0x0300, 0x00E8}, {U'i', 0x0300, 0x00EC},
    {U'o', 0x0300, 0x00F2}, {U'u', 0x0300, 0x00F9},
    // acute U+0301
    {U'A', 0x0301, 0x00C1}, {U'E', 0x0301, 0x00C9}, {U'I', 0x0301, 0x00CD},
    {U'O', 0x0301, 0x00D3}, {U'U', 0x0301, 0x00DA}, {U'Y', 0x0301, 0x00DD},
    {U'a', 0x0301, 0x00E1}, {U'e', 0x0301, 0x00E9}, {U'i', 0x0301, 0x00ED},
    {U'o', 0x0301, 0x00F3}, {U'u', 0x0301, 0x00FA}, {U'y', 0x0301, 0x00FD},
    {U'c', 0x0301, 0x0107}, {U'C', 0x0301, 0x0106},
    // circumflex U+0302
    {U'A', 0x0302, 0x00C2}, {U'E', 0x0302, 0x00CA}, {U'I', 0x0302, 0x00CE},
    {U'O', 0x0302, 0x00D4}, {U'U', 0x0302, 0x00DB},
    {U'a', 0x0302, 0x00E2}, {U'e', 0x0302, 0x00EA}, {U'i', 0x0302, 0x00EE},
    {U'o', 0x0302, 0x00F4}, {U'u', 0x0302, 0x00FB},
    // tilde U+0303
    {U'A', 0x0303, 0x00C3}, {U'N', 0x0303, 0x00D1}, {U'O', 0x0303, 0x00D5},
    {U'a', 0x0303, 0x00E3}, {U'n', 0x0303, 0x00F1}, {U'o', 0x0303, 0x00F5},
    // macron U+0304
    {U'A', 0x0304, 0x0100}, {U'E', 0x0304, 0x0112}, {U'I', 0x0304, 0x012A},
    {U'O', 0x0304, 0x014C}, {U'U', 0x0304, 0x016A},
    {U'a', 0x0304, 0x0101}, {U'e', 0x0304, 0x0113}, {U'i', 0x0304, 0x012B},
    {U'o', 0x0304, 0x014D}, {U'u', 0x0304, 0x016B},
    // breve U+0306
    {U'A', 0x0306, 0x0102}, {U'E', 0x0306, 0x0114}, {U'I', 0x0306, 0x012C},
    {U'O', 0x0306, 0x014E}, {U'U', 0x0306, 0x016C},
    {U'a', 0x0306, 0x0103}, {U'e', 0x0306, 0x0115}, {U'i', 0x0306, 0x012D},
    {U'o', 0x0306, 0x014F}, {U'u', 0x0306, 0x016D},
    // diaeresis U+0308
    {U'A', 0x0308, 0x00C4}, {U'E', 0x0308, 0x00CB}, {U'I', 0x0308, 0x00CF},
    {U'O', 0x0308, 0x00D6}, {U'U', 0x0308, 0x00DC},
    {U'a', 0x0308, 0x00E4}, {U'e', 0x0308, 0x00EB}, {U'i', 0x0308, 0x00EF},
    {U'o', 0x0308, 0x00F6}, {U'u', 0x0308, 0x00FC},
    // cedilla U+0327
    {U'C', 0x0327, 0x00C7}, {U'c', 0x0327, 0x00E7},
    // ring above U+030A
    {U'A', 0x030A, 0x00C5}, {U'a', 0x030A, 0x00E5},
}};

bool compose(char32_t base, char32_t mark, char32_t& out) {
    for (const auto& c : kCompositions) {
        if (c.base == base && c.mark == mark) {
            out = c.composed;
            return true;
        }
    }
    return false;
}

}  // namespace

std::string nfc_normalize(const std::string& s) {
    const auto cps = decode_utf8(s);
    std::vector<char32_t> out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        char32_t composed;
        if (!out.empty() && cp >= 0x0300 && cp <= 0x036F && compose(out.back(), cp, composed)) {
            out.back() = composed;
        } else {
            out.push_back(cp);
        }
    }
    return encode_utf8(out);
}

std::size_t count_code_points(const std::string& s) { return decode_utf8(s).size(); }

}  // namespace lemmarec::text
