#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <cstdint>
#include <map>
#include <thread>

#include "dataspace/facet.hpp"

namespace ds {

// Protocol records.
Value set_timer(Value label, std::int64_t msecs, bool relative);
Value timer_expired(Value label, Pat msecs);
Value later_than(Pat msecs);
Value timer_alarm(Value label, std::int64_t msecs);
std::int64_t msecs_of(const Value& v);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() const = 0;
  // The wake arrives at the ground as the message timer_alarm(label, now).
  virtual void schedule(Value label, std::int64_t at_ms) = 0;
};

// Time moves only when the engine asks for the next event (or on advance):
// it jumps to the earliest wake. Ties fire in registration order.
class VirtualClock : public Clock, public Injector {
 public:
  explicit VirtualClock(std::optional<std::int64_t> budget_ms = std::nullopt) : budget_(budget_ms) {}

  std::int64_t now_ms() const override { return now_; }
  void schedule(Value label, std::int64_t at_ms) override;
  // Scripted external input at a virtual time.
  void inject_at(std::int64_t at_ms, Event e);

  // Blocks never; returns nullopt when no wake is left within the budget.
  std::optional<Event> next() override;
  // Moves time forward, returning the events now due.
  std::vector<Event> advance(std::int64_t ms);
  std::size_t pending() const { return wakes_.size(); }

 private:
  Event fire(std::int64_t at, Event e);

  std::int64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::optional<std::int64_t> budget_;
  std::map<std::pair<std::int64_t, std::uint64_t>, Event> wakes_;
};

// Wall-clock wakes pushed into a QueueInjector from a helper thread. The queue
// is closed once the limit passes, or when nothing is scheduled for `idle_ms`.
class RealClock : public Clock {
 public:
  RealClock(QueueInjector& q, std::int64_t limit_ms, std::int64_t idle_ms = 200);
  ~RealClock() override;

  std::int64_t now_ms() const override;
  void schedule(Value label, std::int64_t at_ms) override;

 private:
  void run();

  QueueInjector& q_;
  std::int64_t limit_ms_, idle_ms_;
  std::chrono::steady_clock::time_point start_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::multimap<std::int64_t, Value> alarms_;
  bool stopping_ = false;
  std::thread thread_;
};

Spawn spawn_timer_driver(Clock& clock);
Spawn spawn_timestate_driver();
void stop_when_timeout(std::int64_t relative_ms, Script body);

}  // namespace ds
