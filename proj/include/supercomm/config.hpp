#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "supercomm/error.hpp"
#include "supercomm/graph.hpp"

namespace supercomm {

/// Minimal TOML-like configuration: `key = value` lines, `[section]`
/// headers, `#` comments, quoted or bare strings, and `[a, b, c]` lists.
/// Values are kept as text and converted on access.
class Config {
 public:
  using Section = std::map<std::string, std::string>;

  static Config parse(std::istream& in) {
    Config cfg;
    cfg.order_.push_back("");
    std::string current;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto body = strip_comment(line);
      body = detail::trim(body);
      if (body.empty()) continue;
      if (body.front() == '[' && body.back() == ']') {
        current = std::string(detail::trim(body.substr(1, body.size() - 2)));
        if (current.empty()) throw ParseError(lineno, "empty section name");
        if (cfg.sections_.count(current)) throw ParseError(lineno, "duplicate section [" + current + "]");
        cfg.sections_[current];
        cfg.order_.push_back(current);
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ParseError(lineno, "expected 'key = value'");
      const auto key = std::string(detail::trim(body.substr(0, eq)));
      auto value = std::string(detail::trim(body.substr(eq + 1)));
      if (key.empty()) throw ParseError(lineno, "missing key");
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
      if (!cfg.sections_[current].emplace(key, value).second) throw ParseError(lineno, "duplicate key '" + key + "'");
    }
    return cfg;
  }

  static Config parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
  }

  /// Section names in file order, the unnamed top-level section first.
  const std::vector<std::string>& sections() const noexcept { return order_; }

  const Section& section(const std::string& name) const {
    static const Section empty;
    auto it = sections_.find(name);
    return it == sections_.end() ? empty : it->second;
  }

  static std::optional<std::string> raw(const Section& s, const std::string& key) {
    auto it = s.find(key);
    if (it == s.end()) return std::nullopt;
    return it->second;
  }

  static std::string get_string(const Section& s, const std::string& key, const std::string& fallback) {
    return raw(s, key).value_or(fallback);
  }

  static double get_double(const Section& s, const std::string& key, double fallback) {
    auto v = raw(s, key);
    return v ? to_double(key, *v) : fallback;
  }

  static std::uint64_t get_uint(const Section& s, const std::string& key, std::uint64_t fallback) {
    auto v = raw(s, key);
    return v ? to_uint(key, *v) : fallback;
  }

  static bool get_bool(const Section& s, const std::string& key, bool fallback) {
    auto v = raw(s, key);
    if (!v) return fallback;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw Error("config key '" + key + "': expected true or false");
  }

  static std::vector<std::string> get_list(const Section& s, const std::string& key) {
    auto v = raw(s, key);
    if (!v) return {};
    auto text = std::string_view(*v);
    if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
      throw Error("config key '" + key + "': expected a [list]");
    }
    std::vector<std::string> out;
    text = detail::trim(text.substr(1, text.size() - 2));
    while (!text.empty()) {
      const auto comma = text.find(',');
      auto item = detail::trim(text.substr(0, comma));
      if (item.size() >= 2 && item.front() == '"' && item.back() == '"') item = item.substr(1, item.size() - 2);
      if (item.empty()) throw Error("config key '" + key + "': empty list item");
      out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      text = detail::trim(text.substr(comma + 1));
    }
    return out;
  }

  static std::vector<double> get_double_list(const Section& s, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : get_list(s, key)) out.push_back(to_double(key, item));
    return out;
  }

  static std::vector<std::uint64_t> get_uint_list(const Section& s, const std::string& key) {
    std::vector<std::uint64_t> out;
    for (const auto& item : get_list(s, key)) out.push_back(to_uint(key, item));
    return out;
  }

 private:
  static std::string_view strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
  }

  static double to_double(const std::string& key, const std::string& v) {
    auto parsed = detail::parse_double(v);
    if (!parsed) throw Error("config key '" + key + "': '" + v + "' is not a number");
    return *parsed;
  }

  static std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
      throw Error("config key '" + key + "': '" + v + "' is not a non-negative integer");
    }
    return out;
  }

  std::map<std::string, Section> sections_{{"", {}}};
  std::vector<std::string> order_;
};

}  // namespace supercomm
