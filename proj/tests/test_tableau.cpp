#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "csl/semantics.hpp"
#include "csl/tableau.hpp"
#include "rule_mapping.hpp"

using namespace csl;

namespace {

Formula P(const char* s) { return parse(s); }

TableauSet fresh_set() { return TableauSet(std::make_shared<FormulaTable>()); }

using TF = TFormula;

std::vector<RuleInstance> static_of(const TableauSet& g, Rule r) {
  std::vector<RuleInstance> out;
  for (auto& i : applicable_static(g)) {
    if (i.rule == r) out.push_back(i);
  }
  return out;
}

using namespace csl::testing;

// Returns the number of (model, mapping) pairs that satisfied the premises;
// fails the test on any pair where no branch is satisfiable.
std::size_t check_sound(const TableauSet& g, const RuleInstance& inst, const ModelSpace& space) {
  const auto labels = g.labels();
  const auto premiseSet = g.formulas();
  const auto children = apply(g, inst);
  REQUIRE(children.size() == inst.branches.size());
  std::size_t cases = 0;
  space.for_each([&](const PreferentialModel& m) {
    PrefEvaluator ev(m);
    each_mapping(labels, m.size(), [&](const Mapping& f) {
      if (!holds_all(ev, m, f, premiseSet)) return;
      ++cases;
      const bool some = some_branch_holds(ev, m, f, inst, children);
      if (!some) {
        FAIL_CHECK("unsound instance " << to_string(inst));
      }
    });
    return true;
  });
  return cases;
}

const char* kOperands[] = {"p", "q", "~p", "p & q", "p << q", "false"};

}  // namespace

TEST_CASE("closure conditions") {
  auto g = fresh_set();
  g.add(TF::labelled(0, P("p")));
  CHECK_FALSE(is_closed(g));
  CHECK(closure_reason(g).empty());
  g.add(TF::labelled(0, P("~p")));
  CHECK(is_closed(g));
  CHECK(closure_reason(g).find("x0:p") != std::string::npos);

  auto h = fresh_set();
  h.add(TF::pref(1, 0, 2));
  CHECK_FALSE(is_closed(h));
  h.add(TF::pref(2, 0, 1));
  CHECK(is_closed(h));

  auto self = fresh_set();
  self.add(TF::pref(1, 0, 1));
  CHECK(is_closed(self));

  auto bot = fresh_set();
  bot.add(TF::labelled(0, P("false")));
  CHECK(is_closed(bot));

  auto boxed = fresh_set();
  boxed.add(TF::box_at(0, 0, false, P("p")));
  CHECK(is_closed(boxed));
  auto boxed2 = fresh_set();
  boxed2.add(TF::box_at(1, 0, false, P("p")));
  CHECK_FALSE(is_closed(boxed2));
  boxed2.add(TF::box_at(1, 0, true, P("p")));
  CHECK(is_closed(boxed2));

  auto u = fresh_set();
  u.add(TF::box(0, true, P("p")));
  u.add(TF::box(0, false, P("p")));
  CHECK(is_closed(u));
}

TEST_CASE("static rule offers skip instances with a present branch") {
  auto g = fresh_set();
  g.add(TF::labelled(0, P("p & q")));
  auto v = static_of(g, Rule::TAnd);
  REQUIRE(v.size() == 1);
  REQUIRE(v[0].branches.size() == 1);
  CHECK(v[0].branches[0] == std::vector<TF>{TF::labelled(0, P("p")), TF::labelled(0, P("q"))});
  auto kids = apply(g, v[0]);
  REQUIRE(kids.size() == 1);
  CHECK(kids[0].size() == 3);

  g.add(TF::labelled(0, P("p")));
  g.add(TF::labelled(0, P("q")));
  CHECK(static_of(g, Rule::TAnd).empty());

  auto h = fresh_set();
  h.add(TF::labelled(0, P("~(p << q)")));
  auto f1 = static_of(h, Rule::F1Sim);
  REQUIRE(f1.size() == 1);
  REQUIRE(f1[0].branches.size() == 3);
  CHECK(f1[0].branches[0] == std::vector<TF>{TF::box(0, true, P("p"))});
  CHECK(f1[0].branches[1] == std::vector<TF>{TF::labelled(0, P("q"))});
  CHECK(f1[0].branches[2] ==
        std::vector<TF>{TF::labelled(0, P("~p")), TF::labelled(0, P("~q"))});

  // One of the F& consequences present is enough to skip the instance.
  auto k = fresh_set();
  k.add(TF::labelled(0, P("~(p & q)")));
  CHECK(static_of(k, Rule::FAnd).size() == 1);
  k.add(TF::labelled(0, P("~q")));
  CHECK(static_of(k, Rule::FAnd).empty());
}

TEST_CASE("centering instances and merge") {
  auto g = fresh_set();
  g.add(TF::labelled(0, P("p")));
  g.add(TF::labelled(1, P("q")));
  auto cents = static_of(g, Rule::Cent);
  CHECK(cents.size() == 2);
  auto it = std::find_if(cents.begin(), cents.end(),
                         [](const RuleInstance& r) { return r.mergeFrom == 0 && r.mergeTo == 1; });
  REQUIRE(it != cents.end());
  auto kids = apply(g, *it);
  REQUIRE(kids.size() == 2);
  CHECK(kids[0].contains(TF::pref(0, 0, 1)));
  CHECK(kids[0].size() == 3);
  CHECK(kids[1].label_count() == 1);
  CHECK(kids[1].contains(TF::labelled(1, P("p"))));
  CHECK(kids[1].contains(TF::labelled(1, P("q"))));
  CHECK(kids[1].size() == 2);
  CHECK(kids[1].birth(1) == g.birth(0));  // survivor keeps the older birth

  g.add(TF::pref(0, 0, 1));
  CHECK(static_of(g, Rule::Cent).size() == 1);
}

TEST_CASE("dynamic rules and blocking") {
  auto g = fresh_set();
  g.add(TF::labelled(0, P("~(p << q)")));
  g.add(TF::labelled(0, P("~p")));
  g.add(TF::labelled(0, P("~q")));
  auto d = applicable_dynamic(g);
  REQUIRE(d);
  CHECK(d->rule == Rule::F2Sim);
  REQUIRE(d->fresh);
  CHECK(*d->fresh == 1);
  CHECK(d->branches[0] == std::vector<TF>{TF::labelled(1, P("q")), TF::box_at(1, 0, true, P("p"))});

  auto blocked = g;
  blocked.add(TF::labelled(1, P("q")));
  blocked.add(TF::box_at(1, 0, true, P("p")));
  CHECK(blocked_2a(blocked, 0, P("p"), P("q")) == Label{1});
  for (auto& r : all_dynamic(blocked)) CHECK(r.rule != Rule::F2Sim);

  auto box = fresh_set();
  box.add(TF::box(0, false, P("p")));
  auto fb = applicable_dynamic(box);
  REQUIRE(fb);
  CHECK(fb->rule == Rule::FBox);
  box.add(TF::labelled(1, P("p")));
  CHECK(blocked_4(box, P("p")) == Label{1});
  CHECK_FALSE(applicable_dynamic(box));

  auto at = fresh_set();
  at.add(TF::labelled(0, P("~p")));
  at.add(TF::box_at(1, 0, false, P("p")));
  auto fa = applicable_dynamic(at);
  REQUIRE(fa);
  CHECK(fa->rule == Rule::F2BoxAt);
  auto kids = apply(at, *fa);
  REQUIRE(kids.size() == 1);
  CHECK(kids[0].contains(TF::pref(2, 0, 1)));
  CHECK(kids[0].contains(TF::labelled(2, P("p"))));
  CHECK(kids[0].contains(TF::box_at(2, 0, true, P("p"))));

  // Π of a younger label contained in an older one blocks its F2<<.
  auto sub = fresh_set();
  sub.add(TF::labelled(0, P("~(p << q)")));
  sub.add(TF::labelled(0, P("~p")));
  sub.add(TF::labelled(0, P("~q")));
  sub.add(TF::labelled(0, P("r")));
  sub.add(TF::labelled(1, P("~(p << q)")));
  sub.add(TF::labelled(1, P("~p")));
  sub.add(TF::labelled(1, P("~q")));
  CHECK(blocked_subset(sub, 1) == Label{0});
  CHECK_FALSE(blocked_subset(sub, 0));
  auto all = all_dynamic(sub);
  REQUIRE(all.size() == 1);
  CHECK(all[0].premises[0] == TF::labelled(0, P("~(p << q)")));

  // Oldest premise label first.
  auto order = fresh_set();
  order.add(TF::labelled(0, P("q")));
  order.add(TF::box(1, false, P("p")));
  order.add(TF::box(0, false, P("~q")));
  auto first = applicable_dynamic(order);
  REQUIRE(first);
  CHECK(first->premises[0].x == 0);
}

TEST_CASE("saturation clauses") {
  auto g = fresh_set();
  g.add(TF::labelled(0, P("p & q")));
  g.add(TF::labelled(0, P("p")));
  g.add(TF::labelled(0, P("q")));
  CHECK(is_saturated(g).empty());

  auto n = fresh_set();
  n.add(TF::labelled(0, P("~~p")));
  auto v = is_saturated(n);
  REQUIRE(v.size() == 1);
  CHECK(v[0].clause == "NEG");

  auto c = fresh_set();
  c.add(TF::labelled(0, P("p")));
  c.add(TF::labelled(1, P("p")));
  auto cv = is_saturated(c);
  CHECK(cv.size() == 2);
  for (auto& x : cv) CHECK(x.clause == "Cent");
}

TEST_CASE("decide examples") {
  CHECK(decide(P("~(p & ~q -> (p << q))")).status == Status::Closed);
  CHECK(decide(P("p << p")).status == Status::Closed);
  auto v = decide(P("p << q"));
  REQUIRE(v.status == Status::OpenSaturated);
  REQUIRE(v.openSet);
  CHECK_FALSE(is_closed(*v.openSet));
  CHECK(decide(P("p")).status == Status::OpenSaturated);
  CHECK(decide(P("p & ~p")).status == Status::Closed);
  CHECK(decide(P("false")).status == Status::Closed);
  CHECK(decide(P("~(p << false) & (p << false)")).status == Status::Closed);
  CHECK_THROWS_AS(decide(P("p ~> q")), std::invalid_argument);
}

TEST_CASE("open outputs are saturated except for blocked formulas") {
  const char* formulas[] = {"p << q",          "~(p << q)",          "(p << q) & (q << ~p)",
                            "~(p << q) & ~p & ~q", "(p << q) << (q << p)", "~((p << q) << p)",
                            "~(p << (q << false))"};
  for (const char* s : formulas) {
    INFO(s);
    auto v = decide(P(s));
    REQUIRE(v.status == Status::OpenSaturated);
    for (auto& viol : is_saturated(*v.openSet)) {
      INFO(viol.clause << " " << viol.detail);
      CHECK((viol.clause == "F<<(iii)" || viol.clause == "F[]x(ii)"));
    }
    // <_x acyclic for each index
    const auto& g = *v.openSet;
    for (Label x : g.labels()) {
      for (Label y : g.labels()) CHECK_FALSE(g.contains(TF::pref(y, x, y)));
    }
  }
}

TEST_CASE("label count stays within 2^n") {
  const char* formulas[] = {"~(p << q) & ~p & ~q", "(p << q) & (q << p)", "~((p << q) << (q << p))",
                            "(p << ~q) & (q << ~p) & ~(p << false)"};
  for (const char* s : formulas) {
    auto f = P(s);
    auto v = decide(f);
    INFO(s);
    CHECK(v.maxLabels <= (std::size_t{1} << f.size()));
  }
}

TEST_CASE("the ~(A << B) split is not skipped when its third alternative is present") {
  auto g = fresh_set();
  g.add(TF::labelled(0, P("~(p << false)")));
  g.add(TF::labelled(0, P("~p")));
  g.add(TF::labelled(0, P("true")));
  CHECK(static_of(g, Rule::F1Sim).size() == 1);
  auto kids = apply(g, static_of(g, Rule::F1Sim)[0]);
  REQUIRE(kids.size() == 3);
  CHECK(static_of(kids[2], Rule::F1Sim).empty());
  // With A empty the witness rule is not needed.
  for (auto& r : all_dynamic(kids[0])) CHECK(r.rule != Rule::F2Sim);

  CHECK(decide(P("~(p << false) & ~p & true")).status == Status::OpenSaturated);
  CHECK(decide(P("~(p << q) & ~p & ~q & ~(q << false)")).status == Status::OpenSaturated);
}

TEST_CASE("label cap is enforced") {
  DecideOptions o;
  o.labelCap = 1;
  CHECK_THROWS_AS(decide(P("(q << false) & ~q"), o), ResourceLimit);
  CHECK(decide(P("(q << false) & ~q")).status == Status::OpenSaturated);
}

TEST_CASE("trace lines") {
  DecideOptions o;
  o.trace = true;
  auto v = decide(P("~(p & ~q -> (p << q))"), o);
  REQUIRE_FALSE(v.trace.empty());
  bool split = false, tbox = false, closed = false;
  for (auto& line : v.trace) {
    if (line.rfind("F1<<", 0) == 0) split = true;
    if (line.rfind("T[]", 0) == 0 && line.rfind("T[]x", 0) != 0) tbox = true;
    if (line.rfind("CLOSED", 0) == 0) closed = true;
    CHECK(line.find(" | ") != std::string::npos);
  }
  CHECK(split);
  CHECK(tbox);
  CHECK(closed);
  auto again = decide(P("~(p & ~q -> (p << q))"), o);
  CHECK(again.trace == v.trace);
}

TEST_CASE("local soundness of every rule") {
  const ModelSpace space({"p", "q"}, 3);
  std::map<Rule, std::size_t> cases;
  auto run = [&](const TableauSet& g, Rule rule, bool dynamic) {
    std::vector<RuleInstance> insts;
    if (dynamic) {
      insts = all_dynamic(g);
    } else {
      insts = applicable_static(g);
    }
    bool found = false;
    for (auto& i : insts) {
      if (i.rule != rule) continue;
      found = true;
      cases[rule] += check_sound(g, i, space);
    }
    CHECK(found);
  };

  for (const char* a : kOperands) {
    auto A = P(a);
    {
      auto g = fresh_set();
      g.add(TF::labelled(0, Formula::negate(Formula::negate(A))));
      run(g, Rule::Neg, false);
    }
    {
      auto g = fresh_set();
      g.add(TF::box_at(1, 0, false, A));
      run(g, Rule::F1BoxAt, false);
    }
    {
      auto g = fresh_set();
      g.add(TF::box_at(2, 0, true, A));
      g.add(TF::pref(1, 0, 2));
      run(g, Rule::TBoxAt, false);
    }
    {
      auto g = fresh_set();
      g.add(TF::box(0, true, A));
      g.ensure_label(1);
      run(g, Rule::TBox, false);
    }
    {
      auto g = fresh_set();
      g.add(TF::labelled(0, Formula::negate(A)));
      g.add(TF::box_at(1, 0, false, A));
      run(g, Rule::F2BoxAt, true);
    }
    {
      auto g = fresh_set();
      g.add(TF::box(0, false, A));
      run(g, Rule::FBox, true);
    }
    for (const char* b : kOperands) {
      auto B = P(b);
      {
        auto g = fresh_set();
        g.add(TF::labelled(0, Formula::conj(A, B)));
        run(g, Rule::TAnd, false);
      }
      {
        auto g = fresh_set();
        g.add(TF::labelled(0, Formula::negate(Formula::conj(A, B))));
        run(g, Rule::FAnd, false);
      }
      {
        auto g = fresh_set();
        g.add(TF::labelled(0, Formula::negate(Formula::sim(A, B))));
        run(g, Rule::F1Sim, false);
      }
      {
        auto g = fresh_set();
        g.add(TF::labelled(0, Formula::sim(A, B)));
        g.ensure_label(1);
        run(g, Rule::TSim, false);
      }
      if (A != B) {
        // The witness rule only runs below the third alternative of the
        // split, i.e. where x:[]~A was not chosen, so A is non-empty there.
        auto g = fresh_set();
        g.add(TF::labelled(0, Formula::negate(Formula::sim(A, B))));
        g.add(TF::labelled(0, Formula::negate(A)));
        g.add(TF::labelled(0, Formula::negate(B)));
        g.add(TF::box(0, false, A));
        if (!is_closed(g)) run(g, Rule::F2Sim, true);
      }
    }
  }
  for (int shape = 0; shape < 3; ++shape) {
    auto g = fresh_set();
    if (shape == 0) g.add(TF::pref(1, 0, 2));
    if (shape == 1) g.add(TF::pref(0, 0, 1));
    if (shape == 2) {
      g.add(TF::pref(2, 1, 0));
      g.ensure_label(3);
    }
    g.ensure_label(2);
    run(g, Rule::Mod, false);
  }
  for (const char* a : kOperands) {
    auto g = fresh_set();
    g.add(TF::labelled(0, P(a)));
    g.add(TF::labelled(1, P("q")));
    g.add(TF::labelled(2, P("~p")));
    run(g, Rule::Cent, false);
  }

  CHECK(cases.size() == static_cast<std::size_t>(kRuleCount));
  for (auto& [rule, n] : cases) {
    INFO(rule_name(rule));
    CHECK(n >= 1000);
  }
}
