#include "doctest.h"
#include "dataspace/mux.hpp"
#include "support/shadow.hpp"

using namespace ds;

namespace {

AssertionSet S(std::initializer_list<Value> vs) { return compile_set(vs); }
const Value a = sym("a");

const Patch* event_for(const MuxUpdate& u, StreamId s) {
  for (const auto& [id, p] : u.events)
    if (id == s) return &p;
  return nullptr;
}

}  // namespace

TEST_SUITE("mux") {
  TEST_CASE("ids are fresh and never reused") {
    Mux m;
    CHECK(m.add_stream() == 0);
    CHECK(m.add_stream() == 1);
    m.remove_stream(1);
    CHECK(m.add_stream() == 2);
    CHECK(m.assertions_of(2).is_mt());
    CHECK_THROWS_AS(m.update_stream(1, Patch()), UnknownStream);
  }

  TEST_CASE("retraction is visible only when the last asserter retracts") {
    Mux m;
    auto s1 = m.add_stream(), s2 = m.add_stream(), s3 = m.add_stream();
    m.update_stream(s3, Patch(S({observe(a)}), {}));
    auto u1 = m.update_stream(s1, Patch(S({a}), {}));
    REQUIRE(event_for(u1, s3));
    CHECK(*event_for(u1, s3) == Patch(S({a}), {}));
    CHECK(m.update_stream(s2, Patch(S({a}), {})).events.empty());
    CHECK(m.update_stream(s1, Patch({}, S({a}))).events.empty());
    auto u2 = m.remove_stream(s2);
    REQUIRE(event_for(u2, s3));
    CHECK(*event_for(u2, s3) == Patch({}, S({a})));
  }

  TEST_CASE("new interest sees existing assertions through feedback") {
    Mux m;
    auto s1 = m.add_stream(), s2 = m.add_stream();
    m.update_stream(s2, Patch(S({a}), {}));
    auto u = m.update_stream(s1, Patch(S({observe(a)}), {}));
    REQUIRE(event_for(u, s1));
    CHECK(*event_for(u, s1) == Patch(S({a}), {}));
  }

  TEST_CASE("re-asserting produces no events") {
    Mux m;
    auto s1 = m.add_stream(), s2 = m.add_stream();
    m.update_stream(s2, Patch(S({observe(a)}), {}));
    CHECK_FALSE(m.update_stream(s1, Patch(S({a}), {})).events.empty());
    auto again = m.update_stream(s1, Patch(S({a}), {}));
    CHECK(again.events.empty());
    CHECK(again.applied.empty());
  }

  TEST_CASE("message routing") {
    Mux m;
    auto s1 = m.add_stream(), s2 = m.add_stream();
    m.update_stream(s1, Patch(S({observe(tuple({sym("x"), wild()}))}), {}));
    m.update_stream(s2, Patch(S({observe(tuple({sym("y"), wild()}))}), {}));
    CHECK(m.route_message(tuple({sym("x"), str("hi")})) == IdSet{s1});
    CHECK(m.route_message(a).empty());
    CHECK(m.route_message(tuple({wild(), integer(1)})) == IdSet{s1, s2});
  }

  TEST_CASE("remove_stream of an empty stream yields no events") {
    Mux m;
    auto s1 = m.add_stream();
    m.add_stream();
    CHECK(m.remove_stream(s1).events.empty());
  }

  TEST_CASE("events match the shadow model on random operation sequences") {
    oracle::Gen g(1234, {sym("a"), integer(0)});
    std::size_t checked = 0;
    for (int run = 0; run < 60; ++run) {
      Mux m;
      shadow::Space sh;
      std::vector<StreamId> live;
      for (int step = 0; step < 50; ++step) {
        std::size_t choice = g.pick(10);
        if (live.empty() || choice == 0) {
          auto s = m.add_stream();
          sh.add(s);
          live.push_back(s);
          continue;
        }
        StreamId s = live[g.pick(live.size())];
        if (choice == 1 && live.size() > 1) {
          auto u = m.remove_stream(s);
          auto want = sh.remove(s);
          std::erase(live, s);
          CHECK(u.events.size() == want.size());
          for (const auto& [id, p] : u.events) {
            REQUIRE(want.count(id));
            CHECK(sh.agrees(p, want.at(id)));
          }
          continue;
        }
        if (choice == 2) {
          Value body = g.pattern(2, 0.1);
          auto got = m.route_message(body);
          auto want = sh.route(body);
          CHECK(std::set<std::uint64_t>(got.begin(), got.end()) == want);
          continue;
        }
        auto pick_items = [&] {
          std::vector<Value> ps;
          std::size_t n = g.pick(3);
          for (std::size_t i = 0; i < n; ++i) {
            // No top-level wildcard: interests then only ever cover base values.
            Value p = g.pattern(2);
            while (p.is_wildcard()) p = g.pattern(2);
            ps.push_back(g.chance(0.4) ? observe(p) : p);
          }
          return ps;
        };
        auto add = pick_items(), rem = pick_items();
        Patch req(oracle::compile_all(add), oracle::compile_all(rem));
        auto u = m.update_stream(s, req);
        auto want = sh.update(s, sh.meaning(add), sh.meaning(rem));
        CHECK(u.events.size() == want.size());
        for (const auto& [id, p] : u.events) {
          REQUIRE(want.count(id));
          CHECK(sh.agrees(p, want.at(id)));
          ++checked;
        }
        CHECK(m.consistent());
      }
    }
    CHECK(checked > 100);
  }
}
