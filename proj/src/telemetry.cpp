#include "altgr/telemetry.h"

#include <algorithm>
#include <cmath>

namespace altgr {

namespace {

thread_local Telemetry::Scope* tls_current = nullptr;

std::int64_t to_ns(Telemetry::Clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
}

}  // namespace

const char* module_name(Module m) {
  switch (m) {
    case Module::SAT: return "SAT";
    case Module::Matching: return "Matching";
    case Module::CC: return "CC";
    case Module::Arith: return "Arith";
  }
  return "?";
}

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Idle: return "Idle";
    case RunStatus::Running: return "Running";
    case RunStatus::Aborted: return "Aborted";
    case RunStatus::Done: return "Done";
  }
  return "?";
}

Telemetry::Scope::Scope(Telemetry* owner, Module m)
    : owner_(owner), module_(m), start_(Clock::now()), outer_(nullptr) {
  if (!owner_) return;
  outer_ = tls_current;
  if (outer_) outer_->flush(start_);
  tls_current = this;
}

Telemetry::Scope::~Scope() {
  if (!owner_) return;
  Clock::time_point now = Clock::now();
  flush(now);
  tls_current = outer_;
  if (outer_) outer_->start_ = now;
}

void Telemetry::Scope::flush(Clock::time_point now) {
  owner_->add(module_, std::chrono::duration_cast<std::chrono::nanoseconds>(now - start_).count());
  start_ = now;
}

Telemetry::Telemetry() {
  for (auto& a : ns_) a.store(0);
}

void Telemetry::start() {
  for (auto& a : ns_) a.store(0);
  rounds_.store(0);
  end_ns_.store(-1);
  start_ns_.store(to_ns(Clock::now()));
  status_.store(RunStatus::Running);
}

void Telemetry::finish(RunStatus status) {
  end_ns_.store(to_ns(Clock::now()));
  status_.store(status);
}

void Telemetry::add(Module m, std::int64_t ns) {
  ns_[static_cast<int>(m)].fetch_add(std::max<std::int64_t>(ns, 0));
}

double Telemetry::seconds(Module m) const { return ns_[static_cast<int>(m)].load() * 1e-9; }

double Telemetry::wall_seconds() const {
  std::int64_t start = start_ns_.load();
  if (start == 0) return 0;
  std::int64_t end = end_ns_.load();
  if (end < 0) end = to_ns(Clock::now());
  return (end - start) * 1e-9;
}

int shade_red(long produced, long total) {
  if (total <= 0) return 1;
  long bucket = (5 * produced + total - 1) / total;
  return static_cast<int>(std::clamp(bucket, 1L, 5L));
}

}  // namespace altgr
