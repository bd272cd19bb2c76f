#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 aware helpers. Lengths and limits are counted in code points, which
// is what "characters" means everywhere in this library.
namespace fsmem::text {

std::size_t length(std::string_view s);

// First `n` code points of `s`.
std::string prefix(std::string_view s, std::size_t n);

// Hard truncation: `s` unchanged if it fits, otherwise the first `limit`
// code points followed by `marker`.
std::string truncate(std::string_view s, std::size_t limit, std::string_view marker = " [...]");

// Keeps head and tail around a "..." so the result is at most `limit` code points.
std::string middle_truncate(std::string_view s, std::size_t limit);

// Consecutive pieces of at most `size` code points; concatenation reproduces `s`.
std::vector<std::string> chunk(std::string_view s, std::size_t size);

// Lower-cased alphanumeric runs.
std::vector<std::string> tokenize(std::string_view s);

std::string lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

// printf-style fixed formatting of a double, locale independent.
std::string fixed(double v, int precision = 3);

} // namespace fsmem::text
