#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "csl/formula.hpp"

using csl::Formula;
using csl::Op;

namespace {

Formula p = Formula::atom("p");
Formula q = Formula::atom("q");

// Every formula over {p, q} with at most `maxSize` nodes, including the
// conditional. Kept local so these tests do not depend on the suite module.
std::vector<std::vector<Formula>> by_size(std::size_t maxSize) {
  std::vector<std::vector<Formula>> s(maxSize + 1);
  s[1] = {p, q, Formula::bottom()};
  for (std::size_t n = 2; n <= maxSize; ++n) {
    for (const auto& f : s[n - 1]) s[n].push_back(Formula::negate(f));
    for (std::size_t i = 1; i + 1 < n; ++i) {
      for (const auto& a : s[i]) {
        for (const auto& b : s[n - 1 - i]) {
          s[n].push_back(Formula::conj(a, b));
          s[n].push_back(Formula::sim(a, b));
          s[n].push_back(Formula::cond(a, b));
        }
      }
    }
  }
  return s;
}

}  // namespace

TEST_CASE("parser builds the core connectives") {
  CHECK(csl::parse("p & ~q") == Formula::conj(p, Formula::negate(q)));
  CHECK(csl::parse("p << q") == Formula::sim(p, q));
  CHECK(csl::parse("p ~> q") == Formula::cond(p, q));
  CHECK(csl::parse("!p") == Formula::negate(p));
  CHECK(csl::parse("false") == Formula::bottom());
}

TEST_CASE("derived connectives are desugared") {
  auto notq = Formula::negate(q);
  CHECK(csl::parse("p -> q") == Formula::negate(Formula::conj(p, notq)));
  CHECK(csl::parse("true") == Formula::negate(Formula::bottom()));
  CHECK(csl::parse("p | q") ==
        Formula::negate(Formula::conj(Formula::negate(p), Formula::negate(q))));
  auto pq = Formula::implies(p, q);
  auto qp = Formula::implies(q, p);
  CHECK(csl::parse("p <-> q") == Formula::conj(pq, qp));
  for (const auto& f : {csl::parse("p -> q"), csl::parse("p <-> q"), csl::parse("p | true")}) {
    CHECK_FALSE(csl::contains_op(f, Op::Cond));
  }
}

TEST_CASE("precedence and associativity") {
  // ~ binds tighter than &, & tighter than |, | tighter than <<.
  CHECK(csl::parse("~p & q") == Formula::conj(Formula::negate(p), q));
  CHECK(csl::parse("p & q | p") == Formula::disj(Formula::conj(p, q), p));
  CHECK(csl::parse("p | q << p") == Formula::sim(Formula::disj(p, q), p));
  CHECK(csl::parse("p << q -> q") == Formula::implies(Formula::sim(p, q), q));
  CHECK(csl::parse("p -> q -> p") == Formula::implies(p, Formula::implies(q, p)));
  CHECK(csl::parse("p <-> q <-> p") == Formula::iff(Formula::iff(p, q), p));
  CHECK(csl::parse("p & q & p") == Formula::conj(Formula::conj(p, q), p));
}

TEST_CASE("parse errors carry positions") {
  auto position_of = [](const char* text) -> std::size_t {
    try {
      csl::parse(text);
    } catch (const csl::ParseError& e) {
      return e.position();
    }
    FAIL("expected a parse error for " << text);
    return 0;
  };
  CHECK(position_of("p & ") == 4);
  CHECK(position_of("p $ q") == 2);
  CHECK(position_of("(p & q") == 0);
  CHECK(position_of("p & q)") == 5);
  CHECK(position_of("p << q << p") == 7);
  CHECK(position_of("p ~> q << p") == 7);
  CHECK(position_of("") == 0);
  CHECK(position_of("p q") == 2);
  CHECK_THROWS_AS(csl::parse("p \xE2\x87\x87 q"), csl::ParseError);
  CHECK_THROWS_WITH_AS(csl::parse("(p"), doctest::Contains("never closed"), csl::ParseError);
  CHECK_THROWS_WITH_AS(csl::parse("p)"), doctest::Contains("unbalanced"), csl::ParseError);
  CHECK_THROWS_WITH_AS(csl::parse("p # q"), doctest::Contains("unknown token"), csl::ParseError);
}

TEST_CASE("printer") {
  CHECK(csl::to_string(Formula::sim(p, q)) == "p << q");
  CHECK(csl::to_string(Formula::negate(Formula::negate(p))) == "~~p");
  CHECK(csl::to_string(Formula::conj(p, Formula::sim(q, Formula::bottom()))) ==
        "p & (q << false)");
  CHECK(csl::to_string(Formula::top()) == "true");
  CHECK(csl::to_string(Formula::disj(p, q)) == "p | q");
}

TEST_CASE("print then parse is the identity on trees") {
  auto sets = by_size(5);
  std::size_t checked = 0;
  for (const auto& level : sets) {
    for (const auto& f : level) {
      auto text = csl::to_string(f);
      INFO(text);
      REQUIRE(csl::parse(text) == f);
      ++checked;
    }
  }
  CHECK(checked == 771);
}

TEST_CASE("measures") {
  auto f = csl::parse("(p << q) & ~(p << (q << false))");
  auto m = csl::measure(f);
  CHECK(m.size == f.size());
  CHECK(m.simDepth == 2);
  CHECK(m.atoms == std::set<std::string>{"p", "q"});
  CHECK(csl::measure(csl::parse("false")).atoms.empty());
  CHECK(csl::sim_depth(p) == 0);
  CHECK(csl::parse("p & q").size() == 3);
}

TEST_CASE("interdefinability translations") {
  CHECK(csl::to_string(csl::csl_to_cond(csl::parse("p << q"))) ==
        "(((p | q) ~> p) & (p ~> ~q)) & ~(p ~> false)");
  CHECK(csl::to_string(csl::cond_to_csl(csl::parse("p ~> q"))) ==
        "(p << (p & ~q)) | ~(p << false)");
  CHECK(csl::cond_to_csl(p) == p);
  CHECK(csl::csl_to_cond(p) == p);

  auto pp = csl::cond_to_csl(Formula::cond(p, p));
  auto expected = Formula::disj(Formula::sim(p, Formula::conj(p, Formula::negate(p))),
                                Formula::negate(Formula::sim(p, Formula::bottom())));
  CHECK(pp == expected);

  auto pbot = csl::csl_to_cond(Formula::sim(p, Formula::bottom()));
  auto bot = Formula::bottom();
  auto expected2 = Formula::conj(
      Formula::conj(Formula::cond(Formula::disj(p, bot), p), Formula::cond(p, Formula::negate(bot))),
      Formula::negate(Formula::cond(p, bot)));
  CHECK(pbot == expected2);
}

TEST_CASE("translations eliminate their connective") {
  auto sets = by_size(5);
  for (const auto& level : sets) {
    for (const auto& f : level) {
      auto a = csl::cond_to_csl(f);
      auto b = csl::csl_to_cond(f);
      CHECK_FALSE(csl::contains_op(a, Op::Cond));
      CHECK_FALSE(csl::contains_op(b, Op::Sim));
      if (!csl::contains_op(f, Op::Cond)) CHECK(a == f);
      if (!csl::contains_op(f, Op::Sim)) CHECK(b == f);
    }
  }
}

TEST_CASE("one replacement costs a fixed number of nodes plus operand copies") {
  auto sets = by_size(4);
  for (std::size_t i = 1; i < sets.size(); ++i) {
    for (const auto& a : sets[i]) {
      if (csl::contains_op(a, Op::Cond) || csl::contains_op(a, Op::Sim)) continue;
      for (const auto& b : sets[1]) {
        CHECK(csl::cond_to_csl(Formula::cond(a, b)).size() == 3 * a.size() + b.size() + 10);
        CHECK(csl::csl_to_cond(Formula::sim(a, b)).size() == 4 * a.size() + 2 * b.size() + 12);
      }
    }
  }
}

TEST_CASE("ordering is total and consistent with equality") {
  auto a = csl::parse("p << q");
  auto b = csl::parse("q << p");
  CHECK(a != b);
  CHECK(((a < b) != (b < a)));
  CHECK((a <=> csl::parse("p << q")) == std::strong_ordering::equal);
  CHECK(std::hash<Formula>{}(a) == std::hash<Formula>{}(csl::parse("p << q")));
  CHECK_THROWS_AS(Formula::atom("true"), std::invalid_argument);
  CHECK_THROWS_AS(Formula::atom("1x"), std::invalid_argument);
}
