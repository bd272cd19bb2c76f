#include "fsmem/text.hpp"

#include <cctype>
#include <cstdio>

namespace fsmem::text {
namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Byte offset of the n-th code point (or s.size()).
std::size_t offset_of(std::string_view s, std::size_t n) {
    std::size_t i = 0;
    std::size_t seen = 0;
    while (i < s.size()) {
        if (!is_continuation(static_cast<unsigned char>(s[i]))) {
            if (seen == n) return i;
            ++seen;
        }
        ++i;
    }
    return s.size();
}

} // namespace

std::size_t length(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if (!is_continuation(c)) ++n;
    return n;
}

std::string prefix(std::string_view s, std::size_t n) {
    return std::string(s.substr(0, offset_of(s, n)));
}

std::string truncate(std::string_view s, std::size_t limit, std::string_view marker) {
    if (length(s) <= limit) return std::string(s);
    std::string out = prefix(s, limit);
    out += marker;
    return out;
}

std::string middle_truncate(std::string_view s, std::size_t limit) {
    const std::size_t n = length(s);
    if (n <= limit) return std::string(s);
    constexpr std::string_view dots = "...";
    if (limit <= dots.size()) return prefix(s, limit);
    const std::size_t keep = limit - dots.size();
    const std::size_t tail = keep / 2;
    const std::size_t head = keep - tail;
    std::string out = prefix(s, head);
    out += dots;
    out += s.substr(offset_of(s, n - tail));
    return out;
}

std::vector<std::string> chunk(std::string_view s, std::size_t size) {
    std::vector<std::string> out;
    if (size == 0) return out;
    while (!s.empty()) {
        const std::size_t cut = offset_of(s, size);
        out.emplace_back(s.substr(0, cut));
        s.remove_prefix(cut);
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        // Non-ASCII bytes are kept inside tokens so CJK text still tokenizes.
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t nl = s.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < s.size()) out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

} // namespace fsmem::text
