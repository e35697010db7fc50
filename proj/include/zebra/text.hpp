// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace zebra::text {

// Minimal UTF-8 handling, enough for the Germanic-language bundles this
// library ships: ASCII plus Latin-1 Supplement plus Latin Extended-A.
// Anything outside those ranges passes through untouched.

inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        i += 1;
        return b0;
    }
    if ((b0 >> 5) == 0x6 && i + 1 < s.size()) {
        char32_t cp = static_cast<char32_t>((b0 & 0x1f) << 6 | (byte(i + 1) & 0x3f));
        i += 2;
        return cp;
    }
    if ((b0 >> 4) == 0xe && i + 2 < s.size()) {
        char32_t cp = static_cast<char32_t>((b0 & 0x0f) << 12 | (byte(i + 1) & 0x3f) << 6 |
                                            (byte(i + 2) & 0x3f));
        i += 3;
        return cp;
    }
    if ((b0 >> 3) == 0x1e && i + 3 < s.size()) {
        char32_t cp = static_cast<char32_t>((b0 & 0x07) << 18 | (byte(i + 1) & 0x3f) << 12 |
                                            (byte(i + 2) & 0x3f) << 6 | (byte(i + 3) & 0x3f));
        i += 4;
        return cp;
    }
    i += 1; // invalid byte, pass through
    return b0;
}

inline void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline std::vector<char32_t> decode(std::string_view s) {
    std::vector<char32_t> cps;
    cps.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) cps.push_back(decode_utf8(s, i));
    return cps;
}

inline std::string encode(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) encode_utf8(cp, out);
    return out;
}

inline char32_t fold_codepoint(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    if (cp >= 0x00c0 && cp <= 0x00de && cp != 0x00d7) return cp + 0x20; // À..Þ
    if (cp >= 0x0100 && cp <= 0x0137 && cp % 2 == 0) return cp + 1;     // Ā..Ķ
    if (cp >= 0x0139 && cp <= 0x0147 && cp % 2 == 1) return cp + 1;     // Ĺ..Ň
    if (cp >= 0x014a && cp <= 0x0176 && cp % 2 == 0) return cp + 1;     // Ŋ..Ŷ
    if (cp == 0x0178) return 0x00ff;                                    // Ÿ
    if (cp >= 0x0179 && cp <= 0x017d && cp % 2 == 1) return cp + 1;     // Ź..Ž
    return cp;
}

inline char32_t upper_codepoint(char32_t cp) {
    if (cp >= U'a' && cp <= U'z') return cp - 0x20;
    if (cp >= 0x00e0 && cp <= 0x00fe && cp != 0x00f7) return cp - 0x20; // à..þ
    if (cp == 0x00ff) return 0x0178;
    if (cp >= 0x0101 && cp <= 0x0137 && cp % 2 == 1) return cp - 1;
    if (cp >= 0x013a && cp <= 0x0148 && cp % 2 == 0) return cp - 1;
    if (cp >= 0x014b && cp <= 0x0177 && cp % 2 == 1) return cp - 1;
    if (cp >= 0x017a && cp <= 0x017e && cp % 2 == 0) return cp - 1;
    return cp;
}

/// Compose (base, combining mark) into the precomposed Latin letter where
/// one exists. Returns 0 when the pair has no composition in our table.
inline char32_t compose_pair(char32_t base, char32_t mark) {
    struct Row {
        char32_t mark;
        const char* bases;      // ASCII base letters
        const char32_t* combos; // same order as bases
    };
    static constexpr char32_t grave[] = {0xe0, 0xe8, 0xec, 0xf2, 0xf9, 0xc0, 0xc8, 0xcc, 0xd2, 0xd9};
    static constexpr char32_t acute[] = {0xe1, 0xe9, 0xed, 0xf3, 0xfa, 0xfd,
                                         0xc1, 0xc9, 0xcd, 0xd3, 0xda, 0xdd};
    static constexpr char32_t circ[] = {0xe2, 0xea, 0xee, 0xf4, 0xfb, 0xc2, 0xca, 0xce, 0xd4, 0xdb};
    static constexpr char32_t tilde[] = {0xe3, 0xf1, 0xf5, 0xc3, 0xd1, 0xd5};
    static constexpr char32_t diaer[] = {0xe4, 0xeb, 0xef, 0xf6, 0xfc, 0xff,
                                         0xc4, 0xcb, 0xcf, 0xd6, 0xdc, 0x0178};
    static constexpr char32_t ring[] = {0xe5, 0xc5};
    static constexpr char32_t cedil[] = {0xe7, 0xc7};
    static constexpr Row rows[] = {
        {0x0300, "aeiouAEIOU", grave},  {0x0301, "aeiouyAEIOUY", acute},
        {0x0302, "aeiouAEIOU", circ},   {0x0303, "anoANO", tilde},
        {0x0308, "aeiouyAEIOUY", diaer}, {0x030a, "aA", ring},
        {0x0327, "cC", cedil},
    };
    for (const Row& row : rows) {
        if (row.mark != mark) continue;
        for (std::size_t k = 0; row.bases[k] != '\0'; ++k) {
            if (static_cast<char32_t>(row.bases[k]) == base) return row.combos[k];
        }
    }
    return 0;
}

/// NFC for the Latin compositions above; other combining marks are kept.
inline std::string nfc_latin(std::string_view s) {
    std::vector<char32_t> cps = decode(s);
    std::vector<char32_t> out;
    out.reserve(cps.size());
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (i + 1 < cps.size()) {
            char32_t composed = compose_pair(cps[i], cps[i + 1]);
            if (composed != 0) {
                out.push_back(composed);
                ++i;
                continue;
            }
        }
        out.push_back(cps[i]);
    }
    return encode(out);
}

inline std::string fold_case(std::string_view s) {
    std::vector<char32_t> cps = decode(s);
    for (char32_t& cp : cps) cp = fold_codepoint(cp);
    return encode(cps);
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    const auto is_space = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

/// Canonical form used when comparing model response cells with solution
/// attribute names: trim, compose, case-fold.
inline std::string canonical_cell(std::string_view s) {
    return fold_case(nfc_latin(trim(s)));
}

/// Upper-case the first letter of a rendered sentence.
inline std::string capitalize_first(std::string_view s) {
    if (s.empty()) return std::string(s);
    std::size_t i = 0;
    char32_t first = decode_utf8(s, i);
    std::string out;
    encode_utf8(upper_codepoint(first), out);
    out.append(s.substr(i));
    return out;
}

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    if (from.empty()) return s;
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

/// Alphabetical comparison of case-folded strings, with a configurable
/// list of letters that collate after 'z' (e.g. Danish æ, ø, å).
inline bool collate_less(std::string_view a, std::string_view b,
                         const std::vector<char32_t>& tail_letters) {
    const auto key = [&](char32_t cp) -> std::pair<int, char32_t> {
        for (std::size_t k = 0; k < tail_letters.size(); ++k) {
            if (tail_letters[k] == cp) return {1, static_cast<char32_t>(k)};
        }
        return {0, cp};
    };
    std::vector<char32_t> ca = decode(fold_case(a));
    std::vector<char32_t> cb = decode(fold_case(b));
    std::size_t n = ca.size() < cb.size() ? ca.size() : cb.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto ka = key(ca[i]);
        auto kb = key(cb[i]);
        if (ka != kb) return ka < kb;
    }
    return ca.size() < cb.size();
}

} // namespace zebra::text
