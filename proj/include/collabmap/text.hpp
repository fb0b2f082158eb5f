#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace collabmap::text {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// Collapses every run of ASCII whitespace into one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

/// Lowercased alphanumeric word tokens, in order of appearance. Bytes >= 0x80
/// are treated as word characters so UTF-8 names tokenize without a Unicode
/// table.
std::vector<std::string> word_tokens(std::string_view s);

bool contains_ci(std::string_view haystack, std::string_view needle);
bool equals_ci(std::string_view a, std::string_view b);

// 64-bit FNV-1a.
constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = kFnvOffset);

std::string hex64(std::uint64_t v);

}  // namespace collabmap::text
