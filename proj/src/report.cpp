#include "wparab/report.hpp"

#include <utility>

namespace wparab {

void AuditReport::add_row(AuditRow row) {
  pass = pass && row.pass;
  rows.push_back(std::move(row));
}

}  // namespace wparab
