#pragma once

// A consistent view of a run's counters, safe to take while it is live.

#include <array>
#include <vector>

#include "altgr/matching.h"
#include "altgr/telemetry.h"

namespace altgr {

struct Snapshot {
  std::array<double, kModuleCount> seconds{};
  double wall = 0;
  std::vector<BudgetRow> rows;  // by produced count, descending
  long total = 0;               // sum of produced over `rows`
  int rounds = 0;
  RunStatus status = RunStatus::Idle;
};

/// Either argument may be null.  Module timers are read before the wall
/// clock, so their sum never overtakes it.
Snapshot take_snapshot(const Telemetry* tel, const BudgetTable* budgets);

}  // namespace altgr
