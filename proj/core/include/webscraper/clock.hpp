#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>

namespace webscraper {

// Time source used by everything that timestamps, sleeps, or rate-limits.
// Two implementations: the system clock for live runs and a simulated clock
// that advances only on sleep, so scripted runs replay byte-identically.
class Clock {
 public:
  virtual ~Clock() = default;

  // Milliseconds since the clock's epoch (process start for the system
  // clock, zero for a fresh simulated clock).
  virtual std::int64_t now_ms() = 0;

  virtual void sleep_ms(std::int64_t ms) = 0;
};

class SystemClock : public Clock {
 public:
  SystemClock();
  std::int64_t now_ms() override;
  void sleep_ms(std::int64_t ms) override;

 private:
  std::int64_t origin_ms_;
};

// Deterministic clock: now() advances exactly by the requested sleep.
class SimClock : public Clock {
 public:
  explicit SimClock(std::int64_t start_ms = 0) : now_ms_(start_ms) {}
  std::int64_t now_ms() override;
  void sleep_ms(std::int64_t ms) override;

 private:
  std::mutex mu_;
  std::int64_t now_ms_;
};

// "1970-01-01T00:00:00.000Z" style rendering of a millisecond offset.
// Used for Dataset.created_at so simulated runs serialize deterministically.
std::string format_iso8601_ms(std::int64_t epoch_ms);

}  // namespace webscraper
