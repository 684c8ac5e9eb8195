#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "sicspin/errors.hpp"
#include "sicspin/trace_io.hpp"

namespace sicspin {

// Flat key=value configuration, one pair per line. Blank lines and '#'
// comments are ignored. Keys are tracked as they are consumed so a typo in
// the file is reported instead of silently ignored.
class Config {
 public:
  static Config from_text(const std::string& text, const std::string& source_name) {
    Config cfg;
    cfg.source_ = source_name;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string_view t = detail::trim(line);
      if (t.empty() || t.front() == '#') continue;
      const std::size_t eq = t.find('=');
      if (eq == std::string_view::npos)
        throw ValidationError(source_name + ":" + std::to_string(line_no) +
                              ": expected key = value");
      const std::string key{detail::trim(t.substr(0, eq))};
      const std::string value{detail::trim(t.substr(eq + 1))};
      if (key.empty())
        throw ValidationError(source_name + ":" + std::to_string(line_no) + ": empty key");
      if (cfg.values_.count(key))
        throw ValidationError(source_name + ":" + std::to_string(line_no) + ": duplicate key '" +
                              key + "'");
      cfg.values_[key] = {value, line_no};
    }
    return cfg;
  }

  static Config from_file(const std::string& path) {
    return from_text(detail::read_file(path), path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
      throw ValidationError(source_ + ": missing required key '" + key + "'");
    consumed_.insert(key);
    return it->second.value;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  std::int64_t get_int(const std::string& key) const {
    const std::string s = get_string(key);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw ValidationError(source_ + ": key '" + key + "': malformed integer '" + s + "'");
    return v;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string s = get_string(key);
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    throw ValidationError(source_ + ": key '" + key + "': expected on/off, got '" + s + "'");
  }

  // Call once all keys relevant to the chosen experiment were read.
  void require_all_consumed() const {
    for (const auto& [key, entry] : values_)
      if (!consumed_.count(key))
        throw ValidationError(source_ + ":" + std::to_string(entry.line) + ": unknown key '" +
                              key + "'");
  }

  const std::string& source() const { return source_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };

  double parse_double(const std::string& key, const std::string& s) const {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw ValidationError(source_ + ": key '" + key + "': malformed number '" + s + "'");
    return v;
  }

  std::string source_ = "<config>";
  std::map<std::string, Entry> values_;
  mutable std::set<std::string> consumed_;
};

}  // namespace sicspin
