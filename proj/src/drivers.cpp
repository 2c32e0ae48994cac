#include "dataspace/drivers.hpp"

#include <cmath>

namespace ds {

Value set_timer(Value label, std::int64_t msecs, bool relative) {
  return record("set-timer", {std::move(label), integer(msecs), sym(relative ? "relative" : "absolute")});
}

Value timer_expired(Value label, Pat msecs) { return record("timer-expired", {std::move(label), msecs.eval()}); }

Value later_than(Pat msecs) { return record("later-than", {msecs.eval()}); }

Value timer_alarm(Value label, std::int64_t msecs) { return record("timer-alarm", {std::move(label), integer(msecs)}); }

// Deadlines may be written as floats; they round up to the next millisecond.
std::int64_t msecs_of(const Value& v) {
  if (v.kind() == Kind::Float) return static_cast<std::int64_t>(std::ceil(v.as_float()));
  return v.as_int();
}

// ---------------------------------------------------------------------------

void VirtualClock::schedule(Value label, std::int64_t at_ms) {
  wakes_.emplace(std::make_pair(at_ms, seq_++), Message{record("timer-alarm", {std::move(label), wild()})});
}

void VirtualClock::inject_at(std::int64_t at_ms, Event e) { wakes_.emplace(std::make_pair(at_ms, seq_++), std::move(e)); }

Event VirtualClock::fire(std::int64_t at, Event e) {
  now_ = std::max(now_, at);
  // Alarms carry the firing time, filled in here.
  if (auto* m = std::get_if<Message>(&e))
    if (m->body.is_compound() && m->body.label() == "timer-alarm" && m->body[1].is_wildcard())
      return Message{timer_alarm(m->body[0], now_)};
  return e;
}

std::optional<Event> VirtualClock::next() {
  if (wakes_.empty()) return std::nullopt;
  auto it = wakes_.begin();
  if (budget_ && it->first.first > *budget_) return std::nullopt;
  Event e = fire(it->first.first, std::move(it->second));
  wakes_.erase(it);
  return e;
}

std::vector<Event> VirtualClock::advance(std::int64_t ms) {
  std::int64_t until = now_ + ms;
  std::vector<Event> out;
  while (!wakes_.empty() && wakes_.begin()->first.first <= until) {
    auto it = wakes_.begin();
    out.push_back(fire(it->first.first, std::move(it->second)));
    wakes_.erase(it);
  }
  now_ = until;
  return out;
}

// ---------------------------------------------------------------------------

RealClock::RealClock(QueueInjector& q, std::int64_t limit_ms, std::int64_t idle_ms)
    : q_(q), limit_ms_(limit_ms), idle_ms_(idle_ms), start_(std::chrono::steady_clock::now()) {
  thread_ = std::thread([this] { run(); });
}

RealClock::~RealClock() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

std::int64_t RealClock::now_ms() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_).count();
}

void RealClock::schedule(Value label, std::int64_t at_ms) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    alarms_.emplace(at_ms, std::move(label));
  }
  cv_.notify_all();
}

void RealClock::run() {
  std::unique_lock<std::mutex> lock(mu_);
  std::int64_t idle_since = now_ms();
  while (!stopping_) {
    std::int64_t now = now_ms();
    if (now >= limit_ms_ || (alarms_.empty() && now - idle_since >= idle_ms_)) {
      q_.close();
      return;
    }
    if (!alarms_.empty() && alarms_.begin()->first <= now) {
      auto it = alarms_.begin();
      Value label = it->second;
      alarms_.erase(it);
      q_.push(Message{timer_alarm(label, now)});
      idle_since = now;
      continue;
    }
    std::int64_t wake = alarms_.empty() ? idle_since + idle_ms_ : alarms_.begin()->first;
    wake = std::min(wake, limit_ms_);
    cv_.wait_until(lock, start_ + std::chrono::milliseconds(wake));
  }
}

// ---------------------------------------------------------------------------

Spawn spawn_timer_driver(Clock& clock) {
  Clock* c = &clock;
  return spawn_actor(
      [c] {
        on(message(record("set-timer", {capture("label"), capture("msecs"), capture("kind")})),
           [c](const Bindings& j) {
             std::int64_t ms = msecs_of(j[1]);
             bool relative = j[2] == sym("relative");
             c->schedule(j[0], relative ? c->now_ms() + ms : ms);
           });
        on(message(inbound(record("timer-alarm", {capture("label"), capture("now")}))),
           [](const Bindings& j) { send(record("timer-expired", {j[0], j[1]})); });
      },
      sym("timer-driver"));
}

Spawn spawn_timestate_driver() {
  return spawn_actor(
      [] {
        during(observe(later_than(capture("msecs"))), [](const Bindings& j) {
          Value msecs = j[0];
          Value id = gensym("timestate");
          on_start([id, msecs] { send(set_timer(id, msecs_of(msecs), false)); });
          on(message(timer_expired(id, wild())), [msecs](const Bindings&) { react([msecs] { assert_(later_than(msecs)); }); });
        });
      },
      sym("timestate-driver"));
}

void stop_when_timeout(std::int64_t relative_ms, Script body) {
  Value id = gensym("timeout");
  on_start([id, relative_ms] { send(set_timer(id, relative_ms, true)); });
  stop_when(message(timer_expired(id, wild())), [body](const Bindings&) {
    if (body) body();
  });
}

}  // namespace ds
