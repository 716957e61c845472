#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cornermass::cli {

/// `key = value` text with [section] headers. Values may be comma or space
/// separated lists. Keys outside any section live in section "".
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const std::vector<std::string>& values(const std::string& section, const std::string& key) const;
  std::string text(const std::string& section, const std::string& key,
                   const std::optional<std::string>& fallback = std::nullopt) const;
  double number(const std::string& section, const std::string& key,
                const std::optional<double>& fallback = std::nullopt) const;
  std::vector<double> numbers(const std::string& section, const std::string& key,
                              const std::optional<std::vector<double>>& fallback = std::nullopt) const;
  std::size_t count(const std::string& section, const std::string& key,
                    const std::optional<std::size_t>& fallback = std::nullopt) const;
  bool flag(const std::string& section, const std::string& key, bool fallback) const;

  std::vector<std::string> sections() const;
  /// Keys of a section in file order.
  std::vector<std::string> keys(const std::string& section) const;
  int line_of(const std::string& section, const std::string& key) const;
  /// "source:line: [section] key" for diagnostics.
  std::string where(const std::string& section, const std::string& key) const;
  /// Every key as a string or a list of strings, by section.
  nlohmann::json echo() const;
  const std::string& source() const { return source_; }

 private:
  struct Entry {
    std::string key;
    std::vector<std::string> values;
    int line = 0;
  };
  std::string source_;
  std::vector<std::string> order_;
  std::map<std::string, std::vector<Entry>> data_;
  const Entry* find(const std::string& section, const std::string& key) const;
};

}  // namespace cornermass::cli
