#pragma once

#include <map>
#include <string>
#include <vector>

#include "cornermass/config.hpp"

namespace cornermass::cli {

/// One golden line `key = value tol` inside a [group] section.
struct GoldenValue {
  std::string group;
  std::string key;
  double value = 0.0;
  double tol = 0.0;
  int line = 0;
  std::string name() const { return group + "." + key; }
};

std::vector<GoldenValue> read_goldens(const Config& cfg);

const std::vector<std::string>& regress_groups();

/// Every quantity a group produces, keyed without the group prefix.
std::map<std::string, double> regress_group(const std::string& group);

struct RegressRow {
  std::string name;
  double expected = 0.0;
  double tol = 0.0;
  double actual = 0.0;
  bool found = true;
  bool pass = false;
};

struct RegressResult {
  std::vector<RegressRow> rows;
  bool ok = true;
  std::string table;
  std::string diff;  // failing rows only
};

/// filter selects a group ("schwarzschild") or one value ("schwarzschild.m_H_3").
RegressResult run_regress(const std::vector<GoldenValue>& goldens, const std::string& filter = {});

}  // namespace cornermass::cli
