#pragma once

// Live counters of a solver run: per-module time accumulators, round
// counter and status.  Written by the run, read concurrently by clients.

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "altgr/ast.h"

namespace altgr {

enum class Module { SAT, Matching, CC, Arith };
inline constexpr int kModuleCount = 4;
const char* module_name(Module m);

enum class RunStatus { Idle, Running, Aborted, Done };
const char* run_status_name(RunStatus s);

class Telemetry {
 public:
  using Clock = std::chrono::steady_clock;

  /// Accumulates elapsed time into one module.  While a nested scope is
  /// open the enclosing one is paused, so time goes to the innermost only.
  class Scope {
   public:
    Scope(Telemetry* owner, Module m);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    void flush(Clock::time_point now);

    Telemetry* owner_;
    Module module_;
    Clock::time_point start_;
    Scope* outer_;
  };

  Telemetry();

  void start();
  void finish(RunStatus status);
  void set_rounds(int rounds) { rounds_.store(rounds); }
  int rounds() const { return rounds_.load(); }
  RunStatus status() const { return status_.load(); }

  double seconds(Module m) const;
  /// Wall time since start(), frozen at finish().
  double wall_seconds() const;

 private:
  void add(Module m, std::int64_t ns);

  std::array<std::atomic<std::int64_t>, kModuleCount> ns_{};
  std::atomic<std::int64_t> start_ns_{0};
  std::atomic<std::int64_t> end_ns_{-1};
  std::atomic<int> rounds_{0};
  std::atomic<RunStatus> status_{RunStatus::Idle};
};

/// Time scope that tolerates a missing telemetry sink.
#define ALTGR_CAT2(a, b) a##b
#define ALTGR_CAT(a, b) ALTGR_CAT2(a, b)
#define ALTGR_TIME(tel, module) \
  ::altgr::Telemetry::Scope ALTGR_CAT(altgr_scope_, __LINE__)((tel), (module))

/// Saturation bucket 1..5 of an axiom's share of all instances.
int shade_red(long produced, long total);

}  // namespace altgr
