#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace misdx {

inline constexpr char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(ascii_lower(c));
    return out;
}

inline constexpr bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Collapse whitespace runs to single spaces and trim both ends.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_ascii_space(c)) {
            if (!out.empty()) pending_space = true;
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

// Normal form shared by dictionary terms and candidate title spans.
inline std::string normalize_term(std::string_view s) {
    return collapse_whitespace(to_lower(s));
}

// Token characters are ASCII letters/digits. Bytes >= 0x80 also count so
// multi-byte UTF-8 sequences stay inside a single token.
inline constexpr bool is_token_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           c >= 0x80;
}

struct TokenSpan {
    std::size_t start = 0;  // inclusive
    std::size_t end = 0;    // exclusive
};

// Maximal runs of token characters, with their character offsets.
inline std::vector<TokenSpan> tokenize(std::string_view text) {
    std::vector<TokenSpan> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_token_char(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && is_token_char(static_cast<unsigned char>(text[i]))) ++i;
        tokens.push_back({start, i});
    }
    return tokens;
}

inline bool is_all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

// "C" followed by exactly seven digits.
inline bool is_valid_cui(std::string_view cui) {
    return cui.size() == 8 && cui[0] == 'C' && is_all_digits(cui.substr(1));
}

// Numeric value of the seven-digit part. Callers validate the format first.
inline std::uint32_t cui_number(std::string_view cui) {
    std::uint32_t n = 0;
    for (std::size_t i = 1; i < cui.size(); ++i) n = n * 10 + static_cast<std::uint32_t>(cui[i] - '0');
    return n;
}

// num/den rendered with four decimal places, rounding half up. Exact integer
// arithmetic; this is the rendering contract for edge weights and
// centralities in every output file.
inline std::string format_ratio_4dp(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return "0.0000";
    const std::uint64_t scaled = (num * 20000 + den) / (2 * den);
    std::string frac = std::to_string(scaled % 10000);
    frac.insert(0, 4 - frac.size(), '0');
    return std::to_string(scaled / 10000) + "." + frac;
}

}  // namespace misdx
