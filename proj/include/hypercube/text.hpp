#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hypercube {

inline bool is_ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_ascii_punct(unsigned char c) {
    return c < 128 && std::ispunct(c) != 0;
}

inline char ascii_lower(unsigned char c) {
    return static_cast<char>(c < 128 ? std::tolower(c) : c);
}

// Canonical label form: casefold, trim, collapse internal whitespace runs,
// strip leading/trailing punctuation. Idempotent. Non-ASCII bytes pass
// through untouched.
inline std::string normalize_text(std::string_view raw) {
    std::string lowered;
    lowered.reserve(raw.size());
    for (unsigned char c : raw) lowered.push_back(ascii_lower(c));

    size_t begin = 0, end = lowered.size();
    while (begin < end && (is_ascii_space(lowered[begin]) || is_ascii_punct(lowered[begin])))
        ++begin;
    while (end > begin && (is_ascii_space(lowered[end - 1]) || is_ascii_punct(lowered[end - 1])))
        --end;

    std::string out;
    out.reserve(end - begin);
    bool pending_space = false;
    for (size_t i = begin; i < end; ++i) {
        unsigned char c = lowered[i];
        if (is_ascii_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

// Empty results are dropped, never stored: returns nullopt for strings that
// normalize to nothing.
inline std::optional<std::string> normalize_label(std::string_view raw) {
    std::string s = normalize_text(raw);
    if (s.empty()) return std::nullopt;
    return s;
}

// Word tokens: split on whitespace, then apply the label normalization
// rule to each piece. Tokens that normalize to empty are dropped, so
// "25.28 inches," becomes ["25.28", "inches"].
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
        size_t start = i;
        while (i < text.size() && !is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) {
            auto tok = normalize_label(text.substr(start, i - start));
            if (tok) tokens.push_back(std::move(*tok));
        }
    }
    return tokens;
}

// FNV-1a, used for content-addressed cache keys and scripted-reply lookup.
inline uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
    static const char* digits = "0123456789abcdef";
    uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

}  // namespace hypercube
