#include "cornermass/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cornermass/errors.hpp"

namespace cornermass::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// CLI11 hands values over without positions; recover them from the text.
int locate(const std::vector<std::string>& lines, const std::string& section, const std::string& key) {
  std::string current;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string t = trim(lines[n]);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    std::string k = trim(t.substr(0, eq));
    std::string sec = current;
    if (current.empty()) {
      const auto dot = k.rfind('.');
      if (dot != std::string::npos) {
        sec = k.substr(0, dot);
        k = k.substr(dot + 1);
      }
    }
    if (sec == section && k == key) return static_cast<int>(n + 1);
  }
  return 0;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  c.source_ = source;
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
  }
  // CLI11 accepts bare words as flags and folds repeated keys; reject both here
  std::string current;
  std::set<std::string> seen;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string t = trim(lines[n]);
    const std::string at = source + ":" + std::to_string(n + 1) + ": ";
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t[0] == '[') {
      if (t.back() != ']') throw ConfigError(at + "unterminated section header");
      current = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(at + "expected `key = value`, got `" + t + "`");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty() || key.find_first_of(" \t") != std::string::npos)
      throw ConfigError(at + "bad key `" + key + "`");
    if (trim(t.substr(eq + 1)).empty()) throw ConfigError(at + "missing value for " + key);
    if (!seen.insert(current + "\n" + key).second)
      throw ConfigError(at + "duplicate key [" + current + "] " + key);
  }

  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const std::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  for (const auto& it : items) {
    if (it.name == "++" || it.name == "--") continue;
    std::string section;
    for (const auto& p : it.parents) section += (section.empty() ? "" : ".") + p;
    if (!c.data_.count(section)) c.order_.push_back(section);
    auto& entries = c.data_[section];
    Entry e{it.name, it.inputs, locate(lines, section, it.name)};
    for (auto& v : e.values) v = trim(v);
    const auto dup = std::find_if(entries.begin(), entries.end(),
                                  [&](const Entry& x) { return x.key == it.name; });
    if (dup != entries.end())
      throw ConfigError(source + ":" + std::to_string(e.line) + ": duplicate key [" + section + "] " + it.name);
    entries.push_back(std::move(e));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return nullptr;
  for (const auto& e : s->second)
    if (e.key == key) return &e;
  return nullptr;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const std::vector<std::string>& Config::values(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) throw ConfigError(source_ + ": missing [" + section + "] " + key);
  return e->values;
}

std::string Config::where(const std::string& section, const std::string& key) const {
  return source_ + ":" + std::to_string(line_of(section, key)) + ": [" + section + "] " + key;
}

int Config::line_of(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  return e ? e->line : 0;
}

std::string Config::text(const std::string& section, const std::string& key,
                         const std::optional<std::string>& fallback) const {
  if (!has(section, key) && fallback) return *fallback;
  const auto& v = values(section, key);
  if (v.size() != 1) throw ConfigError(where(section, key) + ": expected one value");
  return v.front();
}

namespace {

double to_number(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ConfigError(where + ": `" + s + "` is not a number");
  if (!std::isfinite(v)) throw ConfigError(where + ": value must be finite");
  return v;
}

}  // namespace

double Config::number(const std::string& section, const std::string& key,
                      const std::optional<double>& fallback) const {
  if (!has(section, key) && fallback) return *fallback;
  return to_number(text(section, key), where(section, key));
}

std::vector<double> Config::numbers(const std::string& section, const std::string& key,
                                    const std::optional<std::vector<double>>& fallback) const {
  if (!has(section, key) && fallback) return *fallback;
  std::vector<double> out;
  for (const auto& v : values(section, key)) {
    std::istringstream in(v);
    std::string tok;
    while (in >> tok) out.push_back(to_number(tok, where(section, key)));
  }
  return out;
}

std::size_t Config::count(const std::string& section, const std::string& key,
                          const std::optional<std::size_t>& fallback) const {
  if (!has(section, key) && fallback) return *fallback;
  const double v = number(section, key);
  if (v < 0.0 || v != std::floor(v)) throw ConfigError(where(section, key) + ": expected a count");
  return static_cast<std::size_t>(v);
}

bool Config::flag(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = text(section, key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(where(section, key) + ": expected a boolean");
}

std::vector<std::string> Config::sections() const { return order_; }

std::vector<std::string> Config::keys(const std::string& section) const {
  std::vector<std::string> out;
  const auto s = data_.find(section);
  if (s != data_.end())
    for (const auto& e : s->second) out.push_back(e.key);
  return out;
}

nlohmann::json Config::echo() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, entries] : data_)
    for (const auto& e : entries) {
      auto& slot = j[section.empty() ? "_" : section][e.key];
      if (e.values.size() == 1)
        slot = e.values.front();
      else
        slot = e.values;
    }
  return j;
}

}  // namespace cornermass::cli
