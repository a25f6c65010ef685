#include "dynens/config.hpp"

#include <fstream>
#include <stdexcept>

#include "dynens/errors.hpp"
#include "text_util.hpp"

namespace dynens {

KeyValues parse_key_values(std::istream& in) {
  KeyValues out;
  std::string line;
  std::size_t line_no = 0;
  while (detail::next_content_line(in, line, line_no)) {
    const auto text = detail::trim(line);
    if (text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const auto key = detail::trim(text.substr(0, eq));
    const auto value = detail::trim(text.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!out.emplace(std::string(key), std::string(value)).second) {
      throw ParseError("duplicate key '" + std::string(key) + "'", line_no);
    }
  }
  return out;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  try {
    return parse_key_values(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::pair<std::string, std::string> parse_assignment(std::string_view s) {
  const auto eq = s.find('=');
  if (eq == std::string_view::npos || detail::trim(s.substr(0, eq)).empty()) {
    throw std::invalid_argument("expected key=value, got '" + std::string(s) + "'");
  }
  return {std::string(detail::trim(s.substr(0, eq))), std::string(detail::trim(s.substr(eq + 1)))};
}

namespace {

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view want) {
  throw std::invalid_argument("config key '" + std::string(key) + "': expected " +
                              std::string(want) + ", got '" + std::string(value) + "'");
}

}  // namespace

double parse_real(std::string_view key, std::string_view value) {
  try {
    return detail::parse_double(value, 0);
  } catch (const ParseError&) {
    bad(key, value, "a number");
  }
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  try {
    return detail::parse_size(value, 0);
  } catch (const ParseError&) {
    bad(key, value, "a non-negative integer");
  }
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  return static_cast<std::uint64_t>(parse_count(key, value));
}

bool parse_bool(std::string_view key, std::string_view value) {
  const auto v = detail::trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, value, "true or false");
}

std::vector<std::string> parse_list(std::string_view value) {
  std::vector<std::string> out;
  if (detail::trim(value).empty()) return out;
  for (auto part : detail::split(value, ',')) out.emplace_back(part);
  return out;
}

std::vector<double> parse_real_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (const auto& s : parse_list(value)) out.push_back(parse_real(key, s));
  return out;
}

std::vector<std::size_t> parse_count_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  for (const auto& s : parse_list(value)) out.push_back(parse_count(key, s));
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out += sep;
    out += parts[k];
  }
  return out;
}

}  // namespace dynens
