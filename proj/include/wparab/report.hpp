#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace wparab {

/// One checked inequality: lhs <= constant-free rhs scaled by the budget.
struct AuditRow {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;  // empirical constant, usually lhs / rhs
  double budget = 0.0;
  bool pass = true;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct AuditReport {
  std::string name;
  std::string anchor;  // name of the inequality being audited
  bool pass = true;
  std::vector<AuditRow> rows;
  std::map<std::string, double> values;
  std::map<std::string, std::string> notes;
  std::map<std::string, Table> tables;

  void add_row(AuditRow row);
  void require(bool ok) { pass = pass && ok; }
};

}  // namespace wparab
