#include "webscraper/clock.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <thread>

namespace webscraper {

namespace {

std::int64_t steady_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

SystemClock::SystemClock() : origin_ms_(steady_ms()) {}

std::int64_t SystemClock::now_ms() { return steady_ms() - origin_ms_; }

void SystemClock::sleep_ms(std::int64_t ms) {
  if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

std::int64_t SimClock::now_ms() {
  std::lock_guard<std::mutex> lock(mu_);
  return now_ms_;
}

void SimClock::sleep_ms(std::int64_t ms) {
  std::lock_guard<std::mutex> lock(mu_);
  if (ms > 0) now_ms_ += ms;
}

std::string format_iso8601_ms(std::int64_t epoch_ms) {
  std::int64_t ms = epoch_ms % 1000;
  std::int64_t secs = epoch_ms / 1000;
  if (ms < 0) {
    ms += 1000;
    secs -= 1;
  }
  std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03" PRId64 "Z",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, ms);
  return buf;
}

}  // namespace webscraper
