#include "doctest.h"
#include "dataspace/patch.hpp"
#include "support/oracle.hpp"

using namespace ds;

namespace {

AssertionSet S(std::initializer_list<Value> vs) { return compile_set(vs); }
const Value a = sym("a"), b = sym("b"), c = sym("c");

}  // namespace

TEST_SUITE("patch") {
  TEST_CASE("compose follows the newer-wins rule") {
    CHECK(compose(Patch(S({a}), {}), Patch({}, S({a}))) == Patch(S({a}), {}));
    CHECK(compose(Patch({}, S({a})), Patch(S({a}), {})) == Patch({}, S({a})));
    Patch d(S({a}), S({b}));
    CHECK(compose(Patch(), d) == d);
  }

  TEST_CASE("limit makes redundant requests harmless") {
    CHECK(limit(Patch(S({a, b}), {}), S({a})) == Patch(S({b}), {}));
    CHECK(limit(Patch({}, S({c})), S({a})).empty());
    CHECK(limit(Patch(), S({a})).empty());
  }

  TEST_CASE("apply") {
    CHECK(apply(S({a}), Patch(S({b}), S({a}))) == S({b}));
    CHECK(apply(AssertionSet::mt(), Patch(compile_pattern(wild()), {})) ==
          AssertionSet::br(AssertionSet::ok(), {}));
  }

  TEST_CASE("constructor normalizes overlap") {
    Patch p(S({a, b}), S({b, c}));
    CHECK(p.added == S({a}));
    CHECK(p.removed == S({c}));
  }

  TEST_CASE("aggregate visibility hides assertions held by others") {
    CHECK(aggregate_visibility(Patch(S({a}), {}), S({a})).empty());
    CHECK(aggregate_visibility(Patch({}, S({a})), {}) == Patch({}, S({a})));
  }

  TEST_CASE("inbound lifting and outbound dropping") {
    auto lifted = lift_inbound(Message{c});
    CHECK(std::get<Message>(lifted).body == inbound(c));
    Patch up = std::get<Patch>(lift_inbound(Patch(S({a}), S({b}))));
    CHECK(up == Patch(S({inbound(a)}), S({inbound(b)})));

    Value g = tuple({sym("greeting"), str("hi")}), h = tuple({sym("greeting"), wild()});
    Patch out = drop_outbound(Patch(S({outbound(g), observe(inbound(h))}), {}), {});
    CHECK(out == Patch(S({g, observe(h)}), {}));
    CHECK_FALSE(drop_outbound(Message{c}).has_value());
    CHECK(drop_outbound(Message{outbound(c)}) == c);
    // Plain assertions and interests without the inbound marker stay local.
    CHECK(drop_outbound(Patch(S({a, observe(a)}), {}), {}).empty());
  }

  TEST_CASE("compose is associative and agrees with sequential apply") {
    oracle::Universe u(oracle::universe_over({sym("a"), integer(0), sym("z")}));
    oracle::Gen g(31, {sym("a"), integer(0)});
    auto rnd = [&] { return Patch(oracle::compile_all(g.patterns(2)), oracle::compile_all(g.patterns(2))); };
    for (int i = 0; i < 150; ++i) {
      Patch p1 = rnd(), p2 = rnd(), p3 = rnd();
      CHECK(intersect(p1.added, p1.removed).is_mt());
      CHECK(compose(p3, compose(p2, p1)) == compose(compose(p3, p2), p1));
      AssertionSet base = oracle::compile_all(g.patterns(3));
      CHECK(apply(apply(base, p1), p2) == apply(base, compose(p2, p1)));
      Patch l = limit(p2, base);
      CHECK(intersect(l.added, base).is_mt());
      CHECK(subtract(l.removed, base).is_mt());
      CHECK(u.probe(apply(base, l)) == u.probe(apply(base, p2)));
    }
  }
}
