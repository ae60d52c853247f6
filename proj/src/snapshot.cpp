#include "altgr/snapshot.h"

namespace altgr {

Snapshot take_snapshot(const Telemetry* tel, const BudgetTable* budgets) {
  Snapshot s;
  if (tel) {
    s.status = tel->status();
    s.rounds = tel->rounds();
    for (int m = 0; m < kModuleCount; ++m) s.seconds[m] = tel->seconds(static_cast<Module>(m));
    s.wall = tel->wall_seconds();
  }
  if (budgets) {
    s.rows = budgets->rows();
    for (const auto& r : s.rows) s.total += r.produced;
  }
  return s;
}

}  // namespace altgr
