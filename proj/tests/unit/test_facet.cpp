#include <random>

#include "doctest.h"
#include "dataspace/facet.hpp"

using namespace ds;

namespace {

using Lines = std::shared_ptr<std::vector<std::string>>;

Lines lines() { return std::make_shared<std::vector<std::string>>(); }

void run(Dataspace& d, int max = 10000) {
  for (int i = 0; i < max; ++i)
    if (d.step(nullptr).kind == Transition::Kind::Inert) return;
  FAIL("dataspace did not become inert");
}

// Boots a single facet actor on its own, outside any dataspace.
std::unique_ptr<Process> boot(Script setup, Actions* first = nullptr) {
  BootResult r = spawn_actor(std::move(setup)).boot();
  if (first) *first = std::move(r.actions);
  return std::move(r.process);
}

Value box_state(Pat v) { return record("box-state", {v.eval()}); }
Value set_box(Pat v) { return record("set-box", {v.eval()}); }

bool has(const AssertionSet& s, const Value& v) { return search(s, v).has_value(); }

AssertionSet patch_added(const Actions& as) {
  AssertionSet out;
  for (const auto& a : as)
    if (const auto* p = std::get_if<Patch>(&a)) out = apply(out, *p);
  return out;
}

}  // namespace

TEST_SUITE("facet") {
  TEST_CASE("box and client exchange values until the client stops") {
    auto out = lines();
    Actions boot_actions;
    boot_actions.push_back(spawn_actor(
        [out] {
          Field v = field(integer(0));
          assert_([v] { return box_state(v()); });
          on(message(set_box(capture())), [out, v](const Bindings& j) {
            out->push_back("box: taking on new-value " + j[0].to_text());
            v.set(j[0]);
          });
        },
        sym("box")));
    boot_actions.push_back(spawn_actor(
        [out] {
          on(asserted(box_state(capture())), [out](const Bindings& j) {
            out->push_back("client: learned that box's value is now " + j[0].to_text());
            if (j[0].as_int() < 3) send(set_box(integer(j[0].as_int() + 1)));
          });
        },
        sym("client")));
    Dataspace d(std::move(boot_actions));
    run(d);
    std::vector<std::string> want = {
        "client: learned that box's value is now 0", "box: taking on new-value 1",
        "client: learned that box's value is now 1", "box: taking on new-value 2",
        "client: learned that box's value is now 2", "box: taking on new-value 3",
        "client: learned that box's value is now 3",
    };
    CHECK(*out == want);
    CHECK(has(d.mux().aggregate(), box_state(integer(3))));
    CHECK_FALSE(has(d.mux().aggregate(), box_state(integer(2))));
  }

  TEST_CASE("an event no endpoint cares about leaves the actor inert") {
    auto p = boot([] { on(asserted(record("x", {capture()})), [](const Bindings&) {}); });
    Event e = Patch::assert_(record("y", {integer(1)}));
    CHECK(p->step(&e).kind == Transition::Kind::Inert);
    Event m = Message{sym("hello")};
    CHECK(p->step(&m).kind == Transition::Kind::Inert);
  }

  TEST_CASE("assert then retract inside one turn emits nothing") {
    auto p = boot([] {
      on(message(sym("go")), [](const Bindings&) {
        adhoc_assert(sym("blip"));
        adhoc_retract(sym("blip"));
      });
    });
    Event m = Message{sym("go")};
    auto t = p->step(&m);
    CHECK(t.kind == Transition::Kind::Inert);
  }

  TEST_CASE("field changes within a turn publish only the final value") {
    Actions first;
    auto p = boot(
        [] {
          Field v = field(integer(0));
          assert_([v] { return record("v", {v()}); });
          on(message(sym("bump")), [v](const Bindings&) {
            v.set(integer(1));
            v.set(integer(2));
          });
        },
        &first);
    CHECK(patch_added(first) == compile_set({record("v", {integer(0)}), observe(sym("bump"))}));
    Event m = Message{sym("bump")};
    auto t = p->step(&m);
    REQUIRE(t.actions.size() == 1);
    const auto& d = std::get<Patch>(t.actions[0]);
    CHECK(d.added == compile_set({record("v", {integer(2)})}));
    CHECK(d.removed == compile_set({record("v", {integer(0)})}));
  }

  TEST_CASE("room list projection ignores users and tracks room existence") {
    auto in = [](const char* u, const char* r) { return tuple({sym(u), sym("in"), sym(r)}); };
    Value spec = tuple({wild(), sym("in"), capture()});
    AssertionSet none;
    AssertionSet both = compile_set({in("Alice", "Lobby"), in("Bob", "Lobby")});

    Patch arrive(both, {});
    auto added = project_event(none, arrive, spec, EventKind::Asserted);
    REQUIRE(added.size() == 1);
    CHECK(added[0][0] == sym("Lobby"));
    CHECK(project_event(none, arrive, spec, EventKind::Retracted).empty());

    Patch alice_leaves({}, compile_set({in("Alice", "Lobby")}));
    CHECK(project_event(both, alice_leaves, spec, EventKind::Retracted).empty());
    CHECK(project_event(both, alice_leaves, spec, EventKind::Asserted).empty());

    AssertionSet bob = compile_set({in("Bob", "Lobby")});
    Patch bob_leaves({}, bob);
    auto gone = project_event(bob, bob_leaves, spec, EventKind::Retracted);
    REQUIRE(gone.size() == 1);
    CHECK(gone[0][0] == sym("Lobby"));
  }

  TEST_CASE("a capture over a wildcard assertion is an infinite match set") {
    Patch p(compile_pattern(record("sq", {wild()})), {});
    CHECK_THROWS_AS(project_event({}, p, record("sq", {capture()}), EventKind::Asserted), InfiniteMatchSet);
    CHECK(project_event({}, p, record("sq", {wild()}), EventKind::Asserted).size() == 1);
  }

  TEST_CASE("a facet started late catches up on existing knowledge exactly once") {
    auto hits = std::make_shared<int>(0);
    auto p = boot([hits] {
      on(asserted(sym("anything")), [](const Bindings&) {});
      on(message(sym("late")), [hits](const Bindings&) {
        react([hits] { on(asserted(sym("x")), [hits](const Bindings&) { ++*hits; }); });
      });
    });
    Event e = Patch::assert_(sym("x"));
    p->step(&e);
    Event m = Message{sym("late")};
    p->step(&m);
    CHECK(*hits == 1);
    Event again = Patch::assert_(sym("y"));
    p->step(&again);
    CHECK(*hits == 1);
  }

  TEST_CASE("a facet with no endpoints and no children terminates") {
    auto ran = std::make_shared<int>(0);
    Actions first;
    BootResult r = spawn_actor([ran] { on_start([ran] { ++*ran; }); }).boot();
    CHECK(*ran == 1);
    CHECK(r.process == nullptr);
  }

  TEST_CASE("stop handlers run parent first and the continuation replaces the facet") {
    auto order = lines();
    auto p = boot([order] {
      react([order] {
        on(asserted(sym("keep")), [](const Bindings&) {});
        on_stop([order] { order->push_back("parent"); });
        react([order] {
          on(asserted(sym("keep")), [](const Bindings&) {});
          on_stop([order] { order->push_back("child"); });
        });
        stop_when(message(sym("stop")), [order](const Bindings&) {
          order->push_back("continuation");
          react([order] {
            on(asserted(sym("keep")), [](const Bindings&) {});
            on_start([order] { order->push_back("replacement"); });
          });
        });
      });
    });
    Event m = Message{sym("stop")};
    auto t = p->step(&m);
    CHECK(t.kind != Transition::Kind::Exit);
    std::vector<std::string> want = {"parent", "child", "continuation", "replacement"};
    CHECK(*order == want);
  }

  TEST_CASE("stopping the last facet exits the actor with its retractions") {
    Actions first;
    auto p = boot(
        [] {
          assert_(sym("here"));
          stop_when(message(sym("bye")));
        },
        &first);
    CHECK(patch_added(first) == compile_set({sym("here"), observe(sym("bye"))}));
    Event m = Message{sym("bye")};
    auto t = p->step(&m);
    CHECK(t.kind == Transition::Kind::Exit);
    REQUIRE(t.actions.size() == 1);
    CHECK(std::get<Patch>(t.actions[0]).removed == compile_set({sym("here"), observe(sym("bye"))}));
  }

  TEST_CASE("ad-hoc assertion already published by an endpoint adds no second patch") {
    Actions first;
    auto p = boot(
        [] {
          assert_(sym("shared"));
          on(message(sym("go")), [](const Bindings&) { adhoc_assert(sym("shared")); });
        },
        &first);
    Event m = Message{sym("go")};
    CHECK(p->step(&m).kind == Transition::Kind::Inert);
  }

  TEST_CASE("query_hash applies a replacement within one patch") {
    auto seen = std::make_shared<Value>();
    auto p = boot([seen] {
      Field h = query_hash(
          record("kv", {capture(), capture()}), [](const Bindings& j) { return j[0]; },
          [](const Bindings& j) { return j[1]; });
      dataflow([h, seen] { *seen = h(); });
    });
    Event e1 = Patch::assert_(record("kv", {sym("k"), integer(1)}));
    p->step(&e1);
    CHECK(hash_entries(*seen) == std::map<Value, Value>{{sym("k"), integer(1)}});
    Event e2 = Patch(compile_set({record("kv", {sym("k"), integer(2)})}), compile_set({record("kv", {sym("k"), integer(1)})}));
    p->step(&e2);
    CHECK(hash_entries(*seen) == std::map<Value, Value>{{sym("k"), integer(2)}});
  }

  TEST_CASE("query_value falls back to its default on retraction") {
    auto seen = std::make_shared<Value>();
    auto p = boot([seen] {
      Field v = query_value(record("temp", {capture()}), sym("unknown"));
      dataflow([v, seen] { *seen = v(); });
    });
    CHECK(*seen == sym("unknown"));
    Event e = Patch::assert_(record("temp", {integer(20)}));
    p->step(&e);
    CHECK(*seen == integer(20));
    Event r = Patch::retract(record("temp", {integer(20)}));
    p->step(&r);
    CHECK(*seen == sym("unknown"));
  }

  TEST_CASE("query_set and query_count follow the matching assertions") {
    auto seen_set = std::make_shared<Value>();
    auto seen_count = std::make_shared<Value>();
    auto p = boot([=] {
      Field s = query_set(record("user", {capture()}));
      Field c = query_count(record("user", {capture()}));
      dataflow([=] {
        *seen_set = s();
        *seen_count = c();
      });
    });
    Event e = Patch(compile_set({record("user", {sym("a")}), record("user", {sym("b")})}), {});
    p->step(&e);
    CHECK(set_elements(*seen_set) == std::set<Value>{sym("a"), sym("b")});
    CHECK(*seen_count == integer(2));
    Event r = Patch::retract(record("user", {sym("a")}));
    p->step(&r);
    CHECK(set_elements(*seen_set) == std::set<Value>{sym("b")});
    CHECK(*seen_count == integer(1));
  }

  TEST_CASE("forms used in the wrong context throw") {
    CHECK_THROWS_AS(send(sym("x")), ContextViolation);
    CHECK_THROWS_AS(field(integer(0)), ContextViolation);
    CHECK_THROWS_AS(boot([] { send(sym("x")); }), ContextViolation);
    auto p = boot([] {
      on(message(sym("go")), [](const Bindings&) { assert_(sym("late")); });
    });
    Event m = Message{sym("go")};
    CHECK_THROWS_AS(p->step(&m), ContextViolation);
  }

  TEST_CASE("a failing handler kills only its actor") {
    auto out = lines();
    Actions boot_actions;
    boot_actions.push_back(spawn_actor([] {
      on(message(sym("boom")), [](const Bindings&) { throw std::runtime_error("boom"); });
      assert_(sym("fragile"));
    }));
    boot_actions.push_back(spawn_actor([out] {
      on(retracted(sym("fragile")), [out](const Bindings&) { out->push_back("gone"); });
      on_start([] { send(sym("boom")); });
    }));
    TraceSink sink = TraceSink::in_memory();
    TraceScope scope({&sink, {}, std::nullopt});
    Dataspace d(std::move(boot_actions));
    run(d);
    CHECK(*out == std::vector<std::string>{"gone"});
    CHECK(d.actor_count() == 1);
    CHECK_FALSE(sink.warnings().empty());
  }

  TEST_CASE("dataflow blocks rerun when a field they read changes") {
    auto seen = lines();
    auto p = boot([seen] {
      Field a = field(integer(1));
      Field b = field(integer(0));
      dataflow([a, b] { b.set(integer(a().as_int() * 10)); });
      dataflow([b, seen] { seen->push_back(b().to_text()); });
      on(message(sym("inc")), [a](const Bindings&) { a.set(integer(a().as_int() + 1)); });
    });
    Event m = Message{sym("inc")};
    p->step(&m);
    REQUIRE_FALSE(seen->empty());
    CHECK(seen->back() == "20");
  }

  TEST_CASE("during keeps one child facet per live match") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
      auto live = std::make_shared<std::map<Value, int>>();
      auto p = boot([live] {
        during(record("item", {capture()}), [live](const Bindings& j) {
          Value k = j[0];
          on_start([live, k] { ++(*live)[k]; });
          on_stop([live, k] { --(*live)[k]; });
        });
      });
      std::set<Value> present;
      for (int step = 0; step < 40; ++step) {
        AssertionSet add, rem;
        for (int i = 0; i < 4; ++i) {
          Value v = record("item", {integer(static_cast<std::int64_t>(rng() % 5))});
          bool here = present.count(v) > 0;
          if (rng() % 2) {
            if (!here && !has(rem, v)) add = apply(add, Patch::assert_(v));
          } else if (here && !has(add, v)) {
            rem = apply(rem, Patch::assert_(v));
          }
        }
        Event e = Patch(add, rem);
        p->step(&e);
        for (int k = 0; k < 5; ++k) {
          Value v = record("item", {integer(k)});
          if (has(add, v)) present.insert(v);
          if (has(rem, v)) present.erase(v);
        }
        for (int k = 0; k < 5; ++k) {
          int want = present.count(record("item", {integer(k)})) ? 1 : 0;
          auto it = live->find(integer(k));
          int got = it == live->end() ? 0 : it->second;
          REQUIRE(got == want);
        }
      }
    }
  }

  TEST_CASE("during_spawn starts and stops an actor per match") {
    auto out = lines();
    Actions boot_actions;
    boot_actions.push_back(spawn_actor([out] {
      during_spawn(record("hello", {capture()}), [out](const Bindings& j) {
        Value who = j[0];
        on_start([out, who] { out->push_back("worker up for " + who.to_text()); });
        on_stop([out, who] { out->push_back("worker down for " + who.to_text()); });
      });
    }));
    boot_actions.push_back(spawn_actor([] {
      assert_(record("hello", {sym("A")}));
      stop_when(message(sym("leave")));
      on(message(sym("unused")), [](const Bindings&) {});
    }));
    boot_actions.push_back(spawn_actor([] { on_start([] { send(sym("leave")); }); }));
    Dataspace d(std::move(boot_actions));
    run(d);
    std::vector<std::string> want = {"worker up for A", "worker down for A"};
    CHECK(*out == want);
    CHECK(d.actor_count() == 1);
  }
}
