#include "csl/modelext.hpp"

#include <algorithm>
#include <set>

namespace csl {

namespace {

using TS = TableauSet;
using Key = TS::Key;
using Id = FormulaTable::Id;

using BoxSet = std::vector<Id>;  // sorted formula ids of Box⁺

BoxSet box_ids(const TableauSet& g, Label idx, Label z) {
  BoxSet out;
  for (const auto& e : g.entries()) {
    const Key k = e.key;
    if (TS::key_kind(k) == TKind::BoxAt && TS::key_positive(k) && TS::key_a(k) == z &&
        TS::key_b(k) == idx) {
      out.push_back(TS::key_c(k));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool strict_subset(const BoxSet& a, const BoxSet& b) {
  return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// x has an unfulfilled negative comparison or an unfulfilled [x]-diamond whose
// witness was withheld because an older label covers Π(x).
bool has_subset_blocked(const TableauSet& g, Label x) {
  if (!blocked_subset(g, x)) return false;
  FormulaTable& t = *g.table();
  for (const auto& e : g.entries()) {
    const Key k = e.key;
    if (TS::key_kind(k) == TKind::Labelled && TS::key_a(k) == x) {
      const Id f = TS::key_c(k);
      if (t.op(f) != Op::Not || t.op(t.operand(f)) != Op::Sim) continue;
      const Id a = t.lhs(t.operand(f)), b = t.rhs(t.operand(f));
      if (!g.has(TS::lab_key(x, t.neg(a))) || !g.has(TS::lab_key(x, t.neg(b)))) continue;
      if (g.has(TS::box_key(x, true, a)) || g.has(TS::lab_key(x, b))) continue;
      if (!blocked_2a(g, x, t.formula(a), t.formula(b))) return true;
    } else if (TS::key_kind(k) == TKind::BoxAt && !TS::key_positive(k) && TS::key_b(k) == x) {
      const Id a = TS::key_c(k);
      if (g.has(TS::lab_key(x, a)) || !g.has(TS::lab_key(x, t.neg(a)))) continue;
      if (!blocked_3a(g, TS::key_a(k), x, t.formula(a))) return true;
    }
  }
  return false;
}

bool same_entries(const TableauSet& a, const TableauSet& b) {
  if (a.size() != b.size()) return false;
  return std::all_of(a.entries().begin(), a.entries().end(),
                     [&](const TableauSet::Entry& e) { return b.has(e.key); });
}

}  // namespace

TableauSet complete_step1(const TableauSet& g) {
  FormulaTable& t = *g.table();
  TableauSet out = g;
  for (const auto& e : g.entries()) {
    const Key k = e.key;
    if (TS::key_kind(k) != TKind::BoxAt || TS::key_positive(k)) continue;
    const Label z = TS::key_a(k), x = TS::key_b(k);
    const Id a = TS::key_c(k);
    const Formula& fa = t.formula(a);
    if (g.has(TS::lab_key(x, a))) continue;
    if (blocked_3a(g, z, x, fa) || blocked_subset(g, x)) continue;
    auto u = blocked_3c(g, z, x, fa);
    if (!u) {
      throw ExtractionError("unfulfilled and unblocked: " + to_string(g.decode(k)));
    }
    std::optional<Label> witness;
    for (Label y : g.labels()) {
      if (g.has(TS::lab_key(y, a)) && g.has(TS::box_at_key(y, x, true, a)) &&
          g.has(TS::pref_key(y, x, *u))) {
        witness = y;
        break;
      }
    }
    if (!witness) {
      throw ExtractionError("no witness below blocker " + label_name(*u) + " for " +
                            to_string(g.decode(k)));
    }
    out.insert(TS::pref_key(*witness, x, z), {});
  }
  return out;
}

TableauSet complete_step2(const TableauSet& g1) {
  TableauSet out = g1;
  const auto labels = g1.labels();
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<Key> prefs;
    for (const auto& e : out.entries()) {
      if (TS::key_kind(e.key) == TKind::Pref) prefs.push_back(e.key);
    }
    for (Key k : prefs) {
      const Label y = TS::key_a(k), x = TS::key_b(k), z = TS::key_c(k);
      const BoxSet bz = box_ids(out, x, z);
      if (!strict_subset(bz, box_ids(out, x, y))) continue;
      for (Label z0 : labels) {
        if (z0 == x || z0 == z || box_ids(out, x, z0) != bz) continue;
        if (out.insert(TS::pref_key(y, x, z0), {})) changed = true;
      }
    }
  }
  return out;
}

TableauSet complete_step3(const TableauSet& g2) {
  FormulaTable& t = *g2.table();
  const auto labels = g2.labels();
  std::vector<std::pair<Label, Label>> blocked;  // (x, oldest blocker u)
  for (Label x : labels) {
    if (has_subset_blocked(g2, x)) blocked.emplace_back(x, *blocked_subset(g2, x));
  }
  if (blocked.empty()) return g2;

  std::set<Label> rebuilt;
  for (auto [x, u] : blocked) rebuilt.insert(x);
  TableauSet out = g2.without([&](const TFormula& f) {
    return (f.kind == TKind::Pref || f.kind == TKind::BoxAt) && rebuilt.count(f.idx) > 0;
  });

  for (auto [x, u] : blocked) {
    for (Label z : labels) {
      if (z != x) out.insert(TS::pref_key(x, x, z), {});
    }
    for (const auto& e : g2.entries()) {
      const Key k = e.key;
      const TKind kind = TS::key_kind(k);
      if (kind == TKind::Pref && TS::key_b(k) == u) {
        const Label v = TS::key_a(k), z = TS::key_c(k);
        if (z != x) out.insert(TS::pref_key(v, x, z), {});
      } else if (kind == TKind::BoxAt && TS::key_b(k) == u) {
        const Label v = TS::key_a(k);
        const Id a = TS::key_c(k);
        if (TS::key_positive(k)) {
          if (g2.has(TS::lab_key(x, t.neg(a)))) out.insert(TS::box_at_key(v, x, true, a), {});
        } else if (v != x && (g2.has(TS::lab_key(x, a)) || g2.has(TS::lab_key(x, t.neg(a))))) {
          out.insert(TS::box_at_key(v, x, false, a), {});
        }
      } else if (kind == TKind::Labelled && TS::key_a(k) == x) {
        const Id c = TS::key_c(k);
        if (t.op(c) == Op::Not) out.insert(TS::box_at_key(x, x, true, t.operand(c)), {});
      }
    }
  }
  return out;
}

PreferentialModel canonical_model(const TableauSet& g, const std::set<std::string>& atoms,
                                  std::vector<Label>* labelsOut) {
  FormulaTable& t = *g.table();
  const auto labels = g.labels();
  const std::size_t n = labels.size();
  std::map<Label, World> world;
  for (std::size_t i = 0; i < n; ++i) world[labels[i]] = static_cast<World>(i);

  std::vector<std::vector<std::vector<bool>>> rel(
      n, std::vector<std::vector<bool>>(n, std::vector<bool>(n, false)));
  Valuation val;
  for (const auto& a : atoms) val[a];
  for (const auto& e : g.entries()) {
    const Key k = e.key;
    if (TS::key_kind(k) == TKind::Pref) {
      rel[world.at(TS::key_b(k))][world.at(TS::key_a(k))][world.at(TS::key_c(k))] = true;
    } else if (TS::key_kind(k) == TKind::Labelled && t.op(TS::key_c(k)) == Op::Atom) {
      val[t.formula(TS::key_c(k)).name()].insert(world.at(TS::key_a(k)));
    }
  }

  std::vector<std::vector<unsigned>> rank(n, std::vector<unsigned>(n, 0));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t z = 0; z < n; ++z) {
      for (std::size_t y = 0; y < n; ++y) rank[x][z] += rel[x][y][z] ? 1U : 0U;
    }
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t z = 0; z < n; ++z) {
        if (rel[x][y][z] != (rank[x][y] < rank[x][z])) {
          throw ExtractionError("<_" + label_name(labels[x]) + " is not a strict weak order");
        }
      }
    }
  }

  std::vector<std::string> names;
  for (Label l : labels) names.push_back(label_name(l));
  if (labelsOut) *labelsOut = labels;
  try {
    return PreferentialModel(names, rank, val);
  } catch (const ModelError& e) {
    throw ExtractionError(std::string("canonical model rejected: ") + e.what());
  }
}

bool satisfied_under(const PreferentialModel& m, const std::map<Label, World>& f,
                     const TableauSet& g) {
  PrefEvaluator ev(m);
  for (const auto& tf : g.formulas()) {
    const World w = f.at(tf.x);
    bool ok = false;
    switch (tf.kind) {
      case TKind::Labelled:
        ok = ev.holds(w, *tf.f);
        break;
      case TKind::Box:
        ok = (ev.extension(Formula::negate(*tf.f)).count() == m.size()) == tf.positive;
        break;
      case TKind::BoxAt:
        ok = ev.box(f.at(tf.idx), w, Formula::negate(*tf.f)) == tf.positive;
        break;
      case TKind::Pref:
        ok = m.prefers(f.at(tf.idx), w, f.at(tf.z));
        break;
    }
    if (!ok) return false;
  }
  return true;
}

ExtractionReport extract(const TableauSet& g, Label root, const Formula& input) {
  if (is_closed(g)) throw std::invalid_argument("cannot extract a model from a closed set");
  if (!g.has_label(root)) throw std::invalid_argument("root label is not in the set");
  std::vector<std::string> steps;
  TableauSet g1 = complete_step1(g);
  if (g1.size() != g.size()) steps.push_back("Step1");
  TableauSet g2 = complete_step2(g1);
  if (g2.size() != g1.size()) steps.push_back("Step2");
  TableauSet g3 = complete_step3(g2);
  if (!same_entries(g3, g2)) steps.push_back("Step3");

  std::vector<Label> labels;
  PreferentialModel model = canonical_model(g3, measure(input).atoms, &labels);
  const World rootWorld =
      static_cast<World>(std::find(labels.begin(), labels.end(), root) - labels.begin());
  const bool verified = eval_pref(model, rootWorld, input);
  return ExtractionReport{std::move(model), rootWorld, std::move(steps), verified,
                          std::move(labels), std::move(g3)};
}

}  // namespace csl
