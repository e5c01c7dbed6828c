#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "ocsplab/time.hpp"

namespace ocsplab {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Instant now() const = 0;
  virtual void sleep_until(Instant t) = 0;
};

/// Deterministic clock for tests and in-process experiments. sleep_until
/// jumps forward; it never moves time backwards.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Instant start = Instant{}) : ms_(start.time_since_epoch().count()) {}

  Instant now() const override { return Instant(Duration(ms_.load(std::memory_order_acquire))); }
  void set(Instant t) { ms_.store(t.time_since_epoch().count(), std::memory_order_release); }
  void advance(Duration d) { ms_.fetch_add(d.count(), std::memory_order_acq_rel); }
  void sleep_until(Instant t) override {
    auto target = t.time_since_epoch().count();
    auto cur = ms_.load(std::memory_order_acquire);
    while (cur < target && !ms_.compare_exchange_weak(cur, target, std::memory_order_acq_rel)) {
    }
  }

 private:
  std::atomic<Duration::rep> ms_;
};

class SystemClock final : public Clock {
 public:
  Instant now() const override {
    return std::chrono::floor<Duration>(std::chrono::system_clock::now());
  }
  void sleep_until(Instant t) override { std::this_thread::sleep_until(t); }
};

}  // namespace ocsplab
