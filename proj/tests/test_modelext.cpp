#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "csl/modelext.hpp"

using namespace csl;
using TF = TFormula;

namespace {

Formula P(const char* s) { return parse(s); }

TableauSet fresh_set() { return TableauSet(std::make_shared<FormulaTable>()); }

std::map<Label, World> identity(const ExtractionReport& r) {
  std::map<Label, World> m;
  for (std::size_t i = 0; i < r.worldLabels.size(); ++i) m[r.worldLabels[i]] = static_cast<World>(i);
  return m;
}

std::vector<Formula> small_formulas(std::size_t maxSize) {
  std::vector<std::vector<Formula>> s(maxSize + 1);
  s[1] = {P("p"), P("q"), Formula::bottom()};
  for (std::size_t n = 2; n <= maxSize; ++n) {
    for (const auto& f : s[n - 1]) s[n].push_back(Formula::negate(f));
    for (std::size_t i = 1; i + 1 < n; ++i) {
      for (const auto& a : s[i]) {
        for (const auto& b : s[n - 1 - i]) {
          s[n].push_back(Formula::conj(a, b));
          if (sim_depth(a) < 2 && sim_depth(b) < 2) s[n].push_back(Formula::sim(a, b));
        }
      }
    }
  }
  std::vector<Formula> out;
  for (auto& level : s) out.insert(out.end(), level.begin(), level.end());
  return out;
}

}  // namespace

TEST_CASE("single saturated label gives a one-world model") {
  auto g = fresh_set();
  g.add(TF::labelled(0, P("p")));
  auto r = extract(g, 0, P("p"));
  CHECK(r.model.size() == 1);
  CHECK(r.model.extension("p").test(0));
  CHECK(r.verified);
  CHECK(r.steps.empty());
}

TEST_CASE("extraction from decide output") {
  auto f = P("p << q");
  auto v = decide(f);
  REQUIRE(v.openSet);
  auto r = extract(*v.openSet, v.root, f);
  CHECK(r.verified);
  CHECK(eval_pref(r.model, r.rootWorld, f));

  auto g = P("~((p << q) -> (q << p))");
  auto v2 = decide(g);
  REQUIRE(v2.openSet);
  CHECK(extract(*v2.openSet, v2.root, g).verified);
}

TEST_CASE("step 1 links a witness below the blocker") {
  auto g = fresh_set();
  g.add(TF::labelled(0, P("~p")));
  g.add(TF::box_at(1, 0, false, P("p")));  // u
  g.add(TF::box_at(2, 0, false, P("p")));  // z, younger than u
  g.add(TF::labelled(3, P("p")));
  g.add(TF::box_at(3, 0, true, P("p")));
  g.add(TF::pref(3, 0, 1));
  CHECK(blocked_3c(g, 2, 0, P("p")) == Label{1});
  CHECK_FALSE(blocked_3a(g, 2, 0, P("p")));
  auto g1 = complete_step1(g);
  CHECK(g1.contains(TF::pref(3, 0, 2)));
  CHECK(g1.size() == g.size() + 1);
  CHECK(blocked_3a(g1, 2, 0, P("p")) == Label{3});

  auto plain = fresh_set();
  plain.add(TF::labelled(0, P("p & q")));
  CHECK(complete_step1(plain).size() == plain.size());

  auto broken = fresh_set();
  broken.add(TF::labelled(0, P("~p")));
  broken.add(TF::box_at(1, 0, false, P("p")));
  CHECK_THROWS_AS(complete_step1(broken), ExtractionError);
}

TEST_CASE("step 2 closes preferences over equal Box+ classes") {
  auto g = fresh_set();
  g.ensure_label(0);
  g.add(TF::box_at(1, 0, true, P("p")));
  g.ensure_label(2);
  g.ensure_label(3);
  g.add(TF::pref(1, 0, 2));
  auto g2 = complete_step2(g);
  CHECK(g2.contains(TF::pref(1, 0, 3)));
  CHECK(g2.size() == g.size() + 1);

  auto same = fresh_set();
  same.add(TF::box_at(1, 0, true, P("p")));
  same.add(TF::box_at(2, 0, true, P("p")));
  same.ensure_label(3);
  same.add(TF::pref(1, 0, 2));
  CHECK(complete_step2(same).size() == same.size());
}

TEST_CASE("step 3 rebuilds the relation of a blocked label from its blocker") {
  auto g = fresh_set();
  for (const char* s : {"~(p << q)", "~p", "~q", "r"}) g.add(TF::labelled(0, P(s)));
  g.add(TF::labelled(1, P("q")));
  g.add(TF::box_at(1, 0, true, P("p")));
  for (const char* s : {"~(p << q)", "~p", "~q"}) g.add(TF::labelled(2, P(s)));
  g.add(TF::pref(0, 0, 1));
  g.add(TF::pref(0, 0, 2));
  g.add(TF::pref(1, 0, 2));
  g.add(TF::pref(1, 2, 0));  // stale relation of the blocked label
  REQUIRE(blocked_subset(g, 2) == Label{0});
  CHECK_FALSE(blocked_2a(g, 2, P("p"), P("q")));

  auto g3 = complete_step3(g);
  CHECK_FALSE(g3.contains(TF::pref(1, 2, 0)));
  CHECK(g3.contains(TF::pref(2, 2, 0)));
  CHECK(g3.contains(TF::pref(2, 2, 1)));
  CHECK(g3.contains(TF::pref(0, 2, 1)));
  CHECK(g3.contains(TF::box_at(1, 2, true, P("p"))));
  CHECK(blocked_2a(g3, 2, P("p"), P("q")) == Label{1});
  for (const char* s : {"~(p << q)", "~p", "~q"}) CHECK(g3.contains(TF::labelled(2, P(s))));

  auto plain = fresh_set();
  plain.add(TF::labelled(0, P("p")));
  CHECK(complete_step3(plain).size() == 1);
}

TEST_CASE("cyclic preferences are rejected") {
  auto g = fresh_set();
  g.ensure_label(0);
  g.add(TF::pref(1, 0, 2));
  g.add(TF::pref(2, 0, 3));
  g.add(TF::pref(3, 0, 1));
  CHECK_THROWS_AS(canonical_model(g, {}), ExtractionError);
}

TEST_CASE("every open verdict on small formulas yields a verified model") {
  std::size_t open = 0, step3 = 0;
  for (const auto& f : small_formulas(6)) {
    auto v = decide(f);
    if (v.status == Status::Closed) continue;
    ++open;
    INFO(to_string(f));
    auto r = extract(*v.openSet, v.root, f);
    REQUIRE(r.verified);
    CHECK(is_saturated(r.completed).empty());
    CHECK(satisfied_under(r.model, identity(r), r.completed));
    for (World w = 0; w < r.model.size(); ++w) {
      CHECK(r.model.rank(w, w) == 0);
      for (World x = 0; x < r.model.size(); ++x) {
        if (x != w) CHECK(r.model.rank(w, x) >= 1);
      }
    }
    for (Label l : v.openSet->labels()) {
      for (const auto& a : v.openSet->pi(l)) CHECK(r.completed.contains(TF::labelled(l, a)));
    }
    if (std::find(r.steps.begin(), r.steps.end(), "Step3") != r.steps.end()) ++step3;
  }
  CHECK(open == 977);
  CHECK(step3 > 0);
}
