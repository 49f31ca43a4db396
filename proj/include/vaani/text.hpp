#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vaani {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Splits on runs of ASCII whitespace; never yields empty tokens.
std::vector<std::string> split_ws(std::string_view s);

// Splits on a single character, keeping empty fields.
std::vector<std::string> split_char(std::string_view s, char sep);

// Lowercased alphanumeric runs; everything else separates terms.
std::vector<std::string> alnum_terms(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool is_ascii(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

}  // namespace vaani
