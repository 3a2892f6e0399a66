// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "corpusforge/errors.hpp"

namespace corpusforge::utf8 {

/// One decoded codepoint: value plus the byte length of its encoding.
struct Decoded {
    char32_t cp;
    int len;
};

/// Decodes the codepoint starting at `pos`. Throws Utf8Error on malformed input.
inline Decoded decode(std::string_view s, std::size_t pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) return {b0, 1};

    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        throw Utf8Error(pos, "invalid leading byte");
    }
    if (pos + static_cast<std::size_t>(len) > s.size())
        throw Utf8Error(pos, "truncated sequence");
    for (int i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + static_cast<std::size_t>(i)]);
        if ((b & 0xC0) != 0x80)
            throw Utf8Error(pos + static_cast<std::size_t>(i), "invalid continuation byte");
        cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong encodings and surrogates.
    static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len]) throw Utf8Error(pos, "overlong encoding");
    if (cp >= 0xD800 && cp <= 0xDFFF) throw Utf8Error(pos, "surrogate codepoint");
    if (cp > 0x10FFFF) throw Utf8Error(pos, "codepoint out of range");
    return {cp, len};
}

/// Throws Utf8Error (with byte offset) if `s` is not valid UTF-8.
inline void validate(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) pos += static_cast<std::size_t>(decode(s, pos).len);
}

/// Number of codepoints. Input must be valid UTF-8.
inline std::size_t codepoint_count(std::string_view s) {
    std::size_t n = 0, pos = 0;
    while (pos < s.size()) {
        pos += static_cast<std::size_t>(decode(s, pos).len);
        ++n;
    }
    return n;
}

inline void append(std::string& out, char32_t cp) {
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

inline bool is_hebrew_block(char32_t cp) { return cp >= 0x0590 && cp <= 0x05FF; }

/// Niqqud and cantillation-adjacent combining marks.
inline bool is_hebrew_mark(char32_t cp) { return cp >= 0x05B0 && cp <= 0x05C7; }

}  // namespace corpusforge::utf8
