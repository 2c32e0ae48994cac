#include <random>

#include "doctest.h"
#include "dataspace/drivers.hpp"
#include "dataspace/examples.hpp"

using namespace ds;

namespace {

bool has(const AssertionSet& s, const Value& v) { return search(s, v).has_value(); }

Value ctl(std::int64_t t, bool on) { return record("ctl", {integer(t), sym(on ? "on" : "off")}); }

// A relay-wrapped dataspace driven by hand, with a view of its aggregate.
struct Rig {
  VirtualClock clock;
  Dataspace* inner = nullptr;
  std::unique_ptr<Process> root;

  explicit Rig(Actions extra = {}) {
    Actions as;
    as.push_back(spawn_timer_driver(clock));
    as.push_back(spawn_timestate_driver());
    for (auto& a : extra) as.push_back(std::move(a));
    auto d = std::make_unique<Dataspace>(std::move(as));
    inner = d.get();
    root = relay_wrap(std::move(d));
    settle();
  }

  // Runs to quiescence, firing any wake that is already due.
  void settle() {
    for (int guard = 0; guard < 100000; ++guard) {
      while (root->step(nullptr).kind != Transition::Kind::Inert) {
      }
      auto due = clock.advance(0);
      if (due.empty()) return;
      for (auto& e : due) root->step(&e);
    }
    FAIL("rig did not settle");
  }

  void advance(std::int64_t ms) {
    for (auto& e : clock.advance(ms)) {
      root->step(&e);
      settle();
    }
    settle();
  }

  void tell(const Value& body) {
    Event e = Message{body};
    root->step(&e);
    settle();
  }

  AssertionSet aggregate() const { return inner->mux().aggregate(); }
};

// Toggles interest in later_than(t) on ctl(t, on|off) messages from outside.
Spawn interest_controller() {
  return spawn_actor([] {
    on(message(inbound(record("ctl", {capture(), capture()}))), [](const Bindings& j) {
      Value want = observe(later_than(j[0]));
      if (j[1] == sym("on"))
        adhoc_assert(want);
      else
        adhoc_retract(want);
    });
  });
}

RunResult run(const std::string& name) { return run_example(name); }

}  // namespace

TEST_SUITE("drivers") {
  TEST_CASE("virtual clock fires a relative timer after its delay") {
    VirtualClock c;
    c.schedule(sym("x"), c.now_ms() + 100);
    CHECK(c.advance(99).empty());
    auto due = c.advance(1);
    REQUIRE(due.size() == 1);
    CHECK(std::get<Message>(due[0]).body == timer_alarm(sym("x"), 100));
    CHECK(c.now_ms() == 100);
  }

  TEST_CASE("virtual clock orders ties by registration and honours its budget") {
    VirtualClock c(250);
    c.schedule(sym("b"), 200);
    c.schedule(sym("a"), 100);
    c.schedule(sym("c"), 200);
    c.schedule(sym("late"), 300);
    std::vector<Value> seen;
    while (auto e = c.next()) seen.push_back(std::get<Message>(*e).body);
    CHECK(seen == std::vector<Value>{timer_alarm(sym("a"), 100), timer_alarm(sym("b"), 200),
                                     timer_alarm(sym("c"), 200)});
    CHECK(c.pending() == 1);
  }

  TEST_CASE("a deadline in the past fires at the current time") {
    VirtualClock c;
    c.advance(500);
    c.schedule(sym("y"), 100);
    auto e = c.next();
    REQUIRE(e);
    CHECK(std::get<Message>(*e).body == timer_alarm(sym("y"), 500));
    CHECK(c.now_ms() == 500);
  }

  TEST_CASE("set-timer yields timer-expired through the driver") {
    auto got = std::make_shared<std::vector<Value>>();
    Actions as;
    as.push_back(spawn_actor([got] {
      on_start([] { send(set_timer(sym("x"), 100, true)); });
      on(message(record("timer-expired", {capture(), capture()})),
         [got](const Bindings& j) { got->push_back(timer_expired(j[0], j[1])); });
    }));
    Rig rig(std::move(as));
    CHECK(got->empty());
    rig.advance(99);
    CHECK(got->empty());
    rig.advance(1);
    CHECK(*got == std::vector<Value>{timer_expired(sym("x"), integer(100))});
  }

  TEST_CASE("float deadlines round up") {
    CHECK(msecs_of(real(2.1)) == 3);
    CHECK(msecs_of(integer(7)) == 7);
  }

  TEST_CASE("past later-than is asserted without waiting") {
    auto fired = std::make_shared<int>(0);
    Actions as;
    as.push_back(spawn_actor([fired] {
      on(asserted(later_than(integer(-10))), [fired](const Bindings&) { ++*fired; });
    }));
    Rig rig(std::move(as));
    CHECK(*fired == 1);
    CHECK(rig.clock.now_ms() == 0);
  }

  TEST_CASE("later-than demo stops at its deadline") {
    RunResult r = run("later-than");
    REQUIRE(r.transcript.size() == 3);
    CHECK(r.texts() == std::vector<std::string>{"Starting demo-later-than", "Stopping demo-later-than",
                                                 "Deadline expired"});
    CHECK(r.transcript[0].ms == 0);
    CHECK(r.transcript[1].ms == 5000);
    CHECK(r.transcript[2].ms == 5000);
  }

  TEST_CASE("moving deadline gives ten ticks a second apart") {
    RunResult r = run("ticks");
    REQUIRE(r.transcript.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(r.transcript[i].text == "Tick " + std::to_string(i));
      CHECK(r.transcript[i].ms == static_cast<std::int64_t>(i) * 1000);
    }
  }

  TEST_CASE("timeout body runs after the stop handlers") {
    RunResult r = run("timeout");
    CHECK(r.texts() == std::vector<std::string>{"Starting demo-timeout", "Stopping demo-timeout",
                                                 "Three second timeout fired"});
    REQUIRE(r.transcript.size() == 3);
    CHECK(r.transcript[1].ms == 3000);
  }

  TEST_CASE("a facet stopped early never runs its timeout body") {
    auto log = std::make_shared<std::vector<std::string>>();
    Actions as;
    as.push_back(spawn_actor([log] {
      react([log] {
        stop_when_timeout(3000, [log] { log->push_back("timeout"); });
        stop_when(asserted(later_than(integer(1000))), [log](const Bindings&) { log->push_back("early"); });
      });
    }));
    Rig rig(std::move(as));
    rig.advance(5000);
    CHECK(*log == std::vector<std::string>{"early"});
  }

  TEST_CASE("with two timeouts only the earlier body runs") {
    auto log = std::make_shared<std::vector<std::string>>();
    Actions as;
    as.push_back(spawn_actor([log] {
      react([log] {
        stop_when_timeout(2000, [log] { log->push_back("second"); });
        stop_when_timeout(1000, [log] { log->push_back("first"); });
      });
    }));
    Rig rig(std::move(as));
    rig.advance(1500);
    CHECK(*log == std::vector<std::string>{"first"});
    rig.advance(1500);
    CHECK(*log == std::vector<std::string>{"first"});
  }

  TEST_CASE("later-than holds exactly when interest exists and time has passed") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
      Actions as;
      as.push_back(interest_controller());
      Rig rig(std::move(as));
      std::map<std::int64_t, bool> interest;
      for (std::int64_t t = 0; t <= 2000; t += 250) interest[t] = false;
      for (int step = 0; step < 60; ++step) {
        if (rng() % 3 == 0) {
          rig.advance(static_cast<std::int64_t>(rng() % 400));
        } else {
          auto it = std::next(interest.begin(), static_cast<long>(rng() % interest.size()));
          it->second = !it->second;
          rig.tell(ctl(it->first, it->second));
        }
        AssertionSet agg = rig.aggregate();
        for (const auto& [t, on] : interest) {
          INFO("trial ", trial, " step ", step, " t=", t, " now=", rig.clock.now_ms());
          CHECK(has(agg, later_than(integer(t))) == (on && rig.clock.now_ms() >= t));
        }
      }
    }
  }
}
