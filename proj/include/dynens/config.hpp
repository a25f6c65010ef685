#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dynens {

/// Flat "key = value" text. Blank lines and lines starting with '#' are
/// ignored; a repeated key is an error.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values(const std::string& path);
/// "key=value" as given on a command line.
std::pair<std::string, std::string> parse_assignment(std::string_view s);

// Typed value parsers. Each throws std::invalid_argument naming the key.
double parse_real(std::string_view key, std::string_view value);
std::size_t parse_count(std::string_view key, std::string_view value);
std::uint64_t parse_u64(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);
std::vector<std::string> parse_list(std::string_view value);
std::vector<double> parse_real_list(std::string_view key, std::string_view value);
std::vector<std::size_t> parse_count_list(std::string_view key, std::string_view value);

std::string join(const std::vector<std::string>& parts, std::string_view sep = ",");

}  // namespace dynens
