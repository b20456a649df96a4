#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace arggen::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view separator);

// Lowercased runs of ASCII letters/digits; bytes >= 0x80 count as letters.
std::vector<std::string> word_tokens(std::string_view s);

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

bool contains_ci(std::string_view haystack, std::string_view lowered_needle);

}  // namespace arggen::text
