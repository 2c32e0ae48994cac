#include <random>

#include "doctest.h"
#include "dataspace/values.hpp"
#include "support/oracle.hpp"

using namespace ds;

TEST_SUITE("values") {
  TEST_CASE("sale milk example tokenizes in pre-order") {
    Value v = tuple({sym("sale"), sym("milk"), tuple({integer(1), sym("pt")}), tuple({real(1.17), sym("usd")})});
    CHECK(tokens_to_text(serialize(v)) == "⟪4 sale milk ⟪2 1 pt ⟪2 1.17 usd");
  }

  TEST_CASE("empty tuple is a single push token") {
    auto ts = serialize(tuple({}));
    REQUIRE(ts.size() == 1);
    CHECK(ts[0] == Token::push(std::nullopt, 0));
  }

  TEST_CASE("parse rejects short and long token sequences") {
    auto ts = serialize(tuple({sym("a"), sym("b")}));
    std::vector<Token> shorter(ts.begin(), ts.end() - 1);
    CHECK_THROWS_AS(parse(shorter, 1), MalformedTokens);
    CHECK_FALSE(well_formed(shorter, 1));
    auto longer = ts;
    longer.push_back(Token::atom(sym("c")));
    CHECK_FALSE(well_formed(longer, 1));
    auto r = parse(longer, 1);
    CHECK(r.rest.size() == 1);
  }

  TEST_CASE("serialize then parse round-trips the bounded universe") {
    for (const auto& v : oracle::universe(true)) {
      auto ts = serialize(v);
      CHECK(well_formed(ts, 1));
      auto r = parse(ts, 1);
      REQUIRE(r.values.size() == 1);
      CHECK(r.values[0] == v);
      CHECK(r.rest.empty());
    }
  }

  TEST_CASE("value order agrees with lexicographic token order") {
    auto u = oracle::universe(true);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> d(0, u.size() - 1);
    for (int i = 0; i < 3000; ++i) {
      const Value& a = u[d(rng)];
      const Value& b = u[d(rng)];
      auto ta = serialize(a), tb = serialize(b);
      bool lex = std::lexicographical_compare(ta.begin(), ta.end(), tb.begin(), tb.end());
      CHECK(lex == (a < b));
    }
  }

  TEST_CASE("text form round-trips") {
    std::vector<Value> vs = {
        boolean(true),
        boolean(false),
        integer(-42),
        real(1.5),
        real(3.0),
        real(1e300),
        real(-INFINITY),
        str("he said \"hi\"\n"),
        sym("hello"),
        sym("has space"),
        sym("42"),
        sym("_"),
        tuple({}),
        record("point", {integer(1), integer(2)}),
        observe(tuple({sym("ping"), wild(), integer(3)})),
        outbound(sym("x")),
        inbound(observe(sym("x"))),
        record("observe", {sym("a"), sym("b")}),
        capture("name"),
        tuple({capture(), wild()}),
    };
    for (const auto& v : vs) {
      INFO(v.to_text());
      CHECK(parse_value(v.to_text()) == v);
    }
  }

  TEST_CASE("negative zero is zero and NaN is rejected") {
    CHECK(real(-0.0) == real(0.0));
    CHECK_THROWS_AS(real(std::nan("")), std::invalid_argument);
  }

  TEST_CASE("integers and floats are distinct values") {
    CHECK(integer(1) != real(1.0));
    CHECK(integer(1) < real(0.5));
  }

  TEST_CASE("wrap and unwrap") {
    Value v = tuple({sym("greeting"), str("hi")});
    CHECK(unwrap(Wrapper::Observe, observe(v)) == v);
    CHECK_FALSE(unwrap(Wrapper::Inbound, observe(v)).has_value());
    CHECK(observe(v).to_text() == "?(greeting \"hi\")");
  }

  TEST_CASE("capture helpers") {
    Value p = tuple({sym("says"), capture("who"), tuple({capture("what"), wild()})});
    CHECK(p.capture_count() == 2);
    CHECK(capture_names(p) == std::vector<std::string>{"who", "what"});
    std::vector<Value> vals{sym("a"), str("x")};
    CHECK(fill_captures(p, vals) == tuple({sym("says"), sym("a"), tuple({str("x"), wild()})}));
    CHECK(strip_captures(p) == tuple({sym("says"), wild(), tuple({wild(), wild()})}));
  }

  TEST_CASE("hash agrees with equality") {
    CHECK(tuple({sym("a"), integer(1)}).hash() == tuple({sym("a"), integer(1)}).hash());
    CHECK(parse_value("#rec(1 \"two\" three)") == record("rec", {integer(1), str("two"), sym("three")}));
  }
}
