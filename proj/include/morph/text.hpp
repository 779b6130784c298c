#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace morph::text {

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string_view trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

// Decodes UTF-8 into unicode scalar values. Malformed sequences decode to
// U+FFFD, one replacement per offending byte.
std::vector<char32_t> utf8_decode(std::string_view s);
std::string utf8_encode(char32_t cp);

// Shortest round-trip decimal representation; identical across runs.
std::string format_real(double v);
double parse_real(std::string_view s);
long long parse_int(std::string_view s);

}  // namespace morph::text
