#include "csl/tableau.hpp"

#include <algorithm>
#include <array>
#include <functional>

namespace csl {

using Key = TableauSet::Key;
using Id = FormulaTable::Id;

std::string label_name(Label l) { return "x" + std::to_string(l); }

// ---------------------------------------------------------------------------
// FormulaTable

FormulaTable::Id FormulaTable::intern(const Formula& f) {
  if (auto it = ids_.find(f); it != ids_.end()) return it->second;
  Node n{f, f.op()};
  if (f.is(Op::Not)) {
    n.lhs = intern(f.operand());
  } else if (f.is(Op::And) || f.is(Op::Sim) || f.is(Op::Cond)) {
    n.lhs = intern(f.lhs());
    n.rhs = intern(f.rhs());
  }
  if (nodes_.size() >= (1U << 28)) throw std::length_error("formula table full");
  const Id id = static_cast<Id>(nodes_.size());
  nodes_.push_back(std::move(n));
  ids_.emplace(f, id);
  return id;
}

FormulaTable::Id FormulaTable::neg(Id id) {
  if (nodes_[id].neg >= 0) return static_cast<Id>(nodes_[id].neg);
  const Id n = intern(Formula::negate(nodes_[id].f));
  nodes_[id].neg = n;
  return n;
}

// ---------------------------------------------------------------------------
// TFormula

TFormula TFormula::labelled(Label x, Formula f) {
  TFormula t;
  t.kind = TKind::Labelled;
  t.x = x;
  t.f = std::move(f);
  return t;
}

TFormula TFormula::box(Label x, bool positive, Formula a) {
  TFormula t;
  t.kind = TKind::Box;
  t.x = x;
  t.positive = positive;
  t.f = std::move(a);
  return t;
}

TFormula TFormula::box_at(Label x, Label idx, bool positive, Formula a) {
  TFormula t;
  t.kind = TKind::BoxAt;
  t.x = x;
  t.idx = idx;
  t.positive = positive;
  t.f = std::move(a);
  return t;
}

TFormula TFormula::pref(Label y, Label idx, Label z) {
  TFormula t;
  t.kind = TKind::Pref;
  t.x = y;
  t.idx = idx;
  t.z = z;
  return t;
}

bool operator==(const TFormula& a, const TFormula& b) {
  if (a.kind != b.kind || a.x != b.x) return false;
  switch (a.kind) {
    case TKind::Labelled:
      return *a.f == *b.f;
    case TKind::Box:
      return a.positive == b.positive && *a.f == *b.f;
    case TKind::BoxAt:
      return a.idx == b.idx && a.positive == b.positive && *a.f == *b.f;
    case TKind::Pref:
      return a.idx == b.idx && a.z == b.z;
  }
  return false;
}

std::string to_string(const TFormula& t) {
  const std::string x = label_name(t.x);
  switch (t.kind) {
    case TKind::Labelled:
      return x + ":" + to_string(*t.f);
    case TKind::Box:
      return x + ":" + (t.positive ? "" : "~") + "[]~" + to_operand_string(*t.f);
    case TKind::BoxAt:
      return x + ":" + (t.positive ? "" : "~") + "[" + label_name(t.idx) + "]~" +
             to_operand_string(*t.f);
    case TKind::Pref:
      return x + " <_" + label_name(t.idx) + " " + label_name(t.z);
  }
  return {};
}

std::string rule_name(Rule r) {
  switch (r) {
    case Rule::TAnd: return "T&";
    case Rule::FAnd: return "F&";
    case Rule::Neg: return "NEG";
    case Rule::F1Sim: return "F1<<";
    case Rule::TSim: return "T<<";
    case Rule::F1BoxAt: return "F1[]x";
    case Rule::TBoxAt: return "T[]x";
    case Rule::TBox: return "T[]";
    case Rule::Mod: return "Mod";
    case Rule::Cent: return "Cent";
    case Rule::F2Sim: return "F2<<";
    case Rule::F2BoxAt: return "F2[]x";
    case Rule::FBox: return "F[]";
  }
  return "?";
}

bool is_dynamic(Rule r) { return r == Rule::F2Sim || r == Rule::F2BoxAt || r == Rule::FBox; }

// ---------------------------------------------------------------------------
// TableauSet

namespace {

constexpr Key kUsed = Key{1} << 60;

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

void check_label(Label l) {
  if (l > 0xFFFFU) throw ResourceLimit("label number exceeds 65535");
}

}  // namespace

TableauSet::TableauSet(std::shared_ptr<FormulaTable> table) : table_(std::move(table)) {
  if (!table_) table_ = std::make_shared<FormulaTable>();
}

Key TableauSet::lab_key(Label x, Id f) { return kUsed | (Key{x} << 44) | f; }

Key TableauSet::box_key(Label x, bool positive, Id f) {
  return (Key{1} << 62) | kUsed | (Key{positive} << 61) | (Key{x} << 44) | f;
}

Key TableauSet::box_at_key(Label x, Label idx, bool positive, Id f) {
  return (Key{2} << 62) | kUsed | (Key{positive} << 61) | (Key{x} << 44) | (Key{idx} << 28) | f;
}

Key TableauSet::pref_key(Label y, Label idx, Label z) {
  return (Key{3} << 62) | kUsed | (Key{y} << 44) | (Key{idx} << 28) | z;
}

Key TableauSet::encode(const TFormula& t) const {
  check_label(t.x);
  switch (t.kind) {
    case TKind::Labelled:
      return lab_key(t.x, table_->intern(*t.f));
    case TKind::Box:
      return box_key(t.x, t.positive, table_->intern(*t.f));
    case TKind::BoxAt:
      check_label(t.idx);
      return box_at_key(t.x, t.idx, t.positive, table_->intern(*t.f));
    case TKind::Pref:
      check_label(t.idx);
      check_label(t.z);
      return pref_key(t.x, t.idx, t.z);
  }
  return 0;
}

TFormula TableauSet::decode(Key k) const {
  switch (key_kind(k)) {
    case TKind::Labelled:
      return TFormula::labelled(key_a(k), table_->formula(key_c(k)));
    case TKind::Box:
      return TFormula::box(key_a(k), key_positive(k), table_->formula(key_c(k)));
    case TKind::BoxAt:
      return TFormula::box_at(key_a(k), key_b(k), key_positive(k), table_->formula(key_c(k)));
    case TKind::Pref:
      return TFormula::pref(key_a(k), key_b(k), key_c(k));
  }
  return {};
}

std::int64_t TableauSet::find(Key k) const {
  if (slotKeys_.empty()) return -1;
  const std::size_t mask = slotKeys_.size() - 1;
  for (std::size_t h = mix(k) & mask;; h = (h + 1) & mask) {
    if (slotKeys_[h] == 0) return -1;
    if (slotKeys_[h] == k) return slotIdx_[h];
  }
}

void TableauSet::grow() {
  const std::size_t cap = std::max<std::size_t>(64, slotKeys_.size() * 2);
  slotKeys_.assign(cap, 0);
  slotIdx_.assign(cap, 0);
  const std::size_t mask = cap - 1;
  for (std::uint32_t i = 0; i < entries_.size(); ++i) {
    std::size_t h = mix(entries_[i].key) & mask;
    while (slotKeys_[h] != 0) h = (h + 1) & mask;
    slotKeys_[h] = entries_[i].key;
    slotIdx_[h] = i;
  }
}

bool TableauSet::insert(Key k, const DepSet& deps) {
  if (find(k) >= 0) return false;
  if ((entries_.size() + 1) * 2 > slotKeys_.size()) grow();
  entries_.push_back({k, deps});
  const std::size_t mask = slotKeys_.size() - 1;
  std::size_t h = mix(k) & mask;
  while (slotKeys_[h] != 0) h = (h + 1) & mask;
  slotKeys_[h] = k;
  slotIdx_[h] = static_cast<std::uint32_t>(entries_.size() - 1);
  return true;
}

const DepSet* TableauSet::deps_of(Key k) const {
  auto i = find(k);
  return i < 0 ? nullptr : &entries_[static_cast<std::size_t>(i)].deps;
}

void TableauSet::mark_applied(Key premise, const DepSet& deps) {
  for (auto& e : applied_) {
    if (e.key == premise) return;
  }
  applied_.push_back({premise, deps});
}

const DepSet* TableauSet::applied(Key premise) const {
  for (const auto& e : applied_) {
    if (e.key == premise) return &e.deps;
  }
  return nullptr;
}

Label TableauSet::add_label(const DepSet& deps) {
  const Label l = next_label();
  check_label(l);
  labels_.push_back({birthCounter_++, deps, true});
  ++aliveCount_;
  return l;
}

Label TableauSet::add_label() { return add_label(DepSet{}); }

void TableauSet::ensure_label(Label l) {
  check_label(l);
  if (labels_.size() <= l) labels_.resize(l + 1);
  if (!labels_[l].alive) {
    labels_[l].alive = true;
    labels_[l].birth = birthCounter_++;
    ++aliveCount_;
  }
}

std::vector<Label> TableauSet::labels() const {
  std::vector<Label> out;
  for (Label l = 0; l < labels_.size(); ++l) {
    if (labels_[l].alive) out.push_back(l);
  }
  std::sort(out.begin(), out.end(),
            [&](Label a, Label b) { return labels_[a].birth < labels_[b].birth; });
  return out;
}

bool TableauSet::add(const TFormula& t) {
  ensure_label(t.x);
  if (t.kind == TKind::BoxAt || t.kind == TKind::Pref) ensure_label(t.idx);
  if (t.kind == TKind::Pref) ensure_label(t.z);
  return insert(encode(t), DepSet{});
}

bool TableauSet::contains(const TFormula& t) const { return has(encode(t)); }

std::vector<TFormula> TableauSet::formulas() const {
  std::vector<TFormula> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(decode(e.key));
  return out;
}

std::vector<Formula> TableauSet::pi(Label x) const {
  std::vector<Formula> out;
  for (const auto& e : entries_) {
    if (key_kind(e.key) == TKind::Labelled && key_a(e.key) == x) {
      out.push_back(table_->formula(key_c(e.key)));
    }
  }
  return out;
}

std::vector<Formula> TableauSet::box_plus(Label idx, Label z) const {
  std::vector<Formula> out;
  for (const auto& e : entries_) {
    const Key k = e.key;
    if (key_kind(k) == TKind::BoxAt && key_positive(k) && key_a(k) == z && key_b(k) == idx) {
      out.push_back(table_->formula(key_c(k)));
    }
  }
  return out;
}

namespace {

Key rename(Key k, Label from, Label to, bool& changed) {
  auto sub = [&](Label l) {
    if (l == from) {
      changed = true;
      return to;
    }
    return l;
  };
  const TKind kind = TableauSet::key_kind(k);
  const Label a = sub(TableauSet::key_a(k));
  switch (kind) {
    case TKind::Labelled:
      return TableauSet::lab_key(a, TableauSet::key_c(k));
    case TKind::Box:
      return TableauSet::box_key(a, TableauSet::key_positive(k), TableauSet::key_c(k));
    case TKind::BoxAt:
      return TableauSet::box_at_key(a, sub(TableauSet::key_b(k)), TableauSet::key_positive(k),
                                    TableauSet::key_c(k));
    case TKind::Pref:
      return TableauSet::pref_key(a, sub(TableauSet::key_b(k)), sub(TableauSet::key_c(k)));
  }
  return k;
}

}  // namespace

TableauSet TableauSet::merged(Label from, Label to, const DepSet& mergeDeps) const {
  if (!has_label(from) || !has_label(to) || from == to) {
    throw std::invalid_argument("merge needs two distinct existing labels");
  }
  TableauSet out(table_);
  out.labels_ = labels_;
  out.aliveCount_ = aliveCount_ - 1;
  out.birthCounter_ = birthCounter_;
  out.labels_[from].alive = false;
  out.labels_[to].birth = std::min(labels_[from].birth, labels_[to].birth);
  out.root_ = root_ == from ? to : root_;
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) {
    bool changed = false;
    const Key k = rename(e.key, from, to, changed);
    out.insert(k, changed ? (e.deps | mergeDeps) : e.deps);
  }
  for (const auto& e : applied_) {
    bool changed = false;
    const Key k = rename(e.key, from, to, changed);
    out.mark_applied(k, changed ? (e.deps | mergeDeps) : e.deps);
  }
  return out;
}

TableauSet TableauSet::merged(Label from, Label to) const { return merged(from, to, DepSet{}); }

// ---------------------------------------------------------------------------
// Closure

namespace {

// Dependencies of a clash between k (carrying kdeps) and the set g, if any.
// k need not be in g yet.
std::optional<DepSet> clash_of(const TableauSet& g, FormulaTable& t, Key k, const DepSet& kdeps) {
  auto with = [&](Key other) -> std::optional<DepSet> {
    if (const DepSet* d = g.deps_of(other)) return kdeps | *d;
    return std::nullopt;
  };
  const Label a = TableauSet::key_a(k);
  switch (TableauSet::key_kind(k)) {
    case TKind::Labelled: {
      const Id f = TableauSet::key_c(k);
      if (t.op(f) == Op::Bottom) return kdeps;
      if (auto d = with(TableauSet::lab_key(a, t.neg(f)))) return d;
      if (t.op(f) == Op::Not) return with(TableauSet::lab_key(a, t.operand(f)));
      return std::nullopt;
    }
    case TKind::Box:
      return with(TableauSet::box_key(a, !TableauSet::key_positive(k), TableauSet::key_c(k)));
    case TKind::BoxAt: {
      const Label idx = TableauSet::key_b(k);
      const bool pos = TableauSet::key_positive(k);
      if (!pos && idx == a) return kdeps;
      return with(TableauSet::box_at_key(a, idx, !pos, TableauSet::key_c(k)));
    }
    case TKind::Pref: {
      const Label z = TableauSet::key_c(k);
      if (z == a) return kdeps;
      return with(TableauSet::pref_key(z, TableauSet::key_b(k), a));
    }
  }
  return std::nullopt;
}

// The formula complementary to k in g, for messages.
std::string clash_text(const TableauSet& g, FormulaTable& t, Key k) {
  const std::string self = to_string(g.decode(k));
  const Label a = TableauSet::key_a(k);
  auto other = [&](Key o) -> std::optional<std::string> {
    if (g.has(o)) return self + ", " + to_string(g.decode(o));
    return std::nullopt;
  };
  switch (TableauSet::key_kind(k)) {
    case TKind::Labelled: {
      const Id f = TableauSet::key_c(k);
      if (t.op(f) == Op::Bottom) return self;
      if (auto s = other(TableauSet::lab_key(a, t.neg(f)))) return *s;
      if (t.op(f) == Op::Not) {
        if (auto s = other(TableauSet::lab_key(a, t.operand(f)))) return *s;
      }
      break;
    }
    case TKind::Box:
      if (auto s = other(TableauSet::box_key(a, !TableauSet::key_positive(k), TableauSet::key_c(k))))
        return *s;
      break;
    case TKind::BoxAt: {
      const Label idx = TableauSet::key_b(k);
      const bool pos = TableauSet::key_positive(k);
      if (!pos && idx == a) return self;
      if (auto s = other(TableauSet::box_at_key(a, idx, !pos, TableauSet::key_c(k)))) return *s;
      break;
    }
    case TKind::Pref: {
      const Label z = TableauSet::key_c(k);
      if (z == a) return self;
      if (auto s = other(TableauSet::pref_key(z, TableauSet::key_b(k), a))) return *s;
      break;
    }
  }
  return self;
}

struct Clash {
  DepSet deps;
  Key key;
};

std::optional<Clash> find_clash(const TableauSet& g) {
  FormulaTable& t = *g.table();
  for (const auto& e : g.entries()) {
    if (auto d = clash_of(g, t, e.key, e.deps)) return Clash{*d, e.key};
  }
  return std::nullopt;
}

bool complementary(FormulaTable& t, Key a, Key b) {
  using TS = TableauSet;
  if (TS::key_kind(a) != TS::key_kind(b) || TS::key_a(a) != TS::key_a(b)) return false;
  switch (TS::key_kind(a)) {
    case TKind::Labelled: {
      const Id fa = TS::key_c(a), fb = TS::key_c(b);
      return t.neg(fa) == fb || t.neg(fb) == fa || (t.op(fa) == Op::Not && t.operand(fa) == fb) ||
             (t.op(fb) == Op::Not && t.operand(fb) == fa);
    }
    case TKind::Box:
      return TS::key_c(a) == TS::key_c(b) && TS::key_positive(a) != TS::key_positive(b);
    case TKind::BoxAt:
      return TS::key_b(a) == TS::key_b(b) && TS::key_c(a) == TS::key_c(b) &&
             TS::key_positive(a) != TS::key_positive(b);
    case TKind::Pref:
      return false;  // y <_x z vs z <_x y differ in the first label
  }
  return false;
}

bool complementary_pref(Key a, Key b) {
  using TS = TableauSet;
  return TS::key_kind(a) == TKind::Pref && TS::key_kind(b) == TKind::Pref &&
         TS::key_b(a) == TS::key_b(b) && TS::key_a(a) == TS::key_c(b) &&
         TS::key_c(a) == TS::key_a(b);
}

}  // namespace

bool is_closed(const TableauSet& g) { return find_clash(g).has_value(); }

std::string closure_reason(const TableauSet& g) {
  auto c = find_clash(g);
  if (!c) return {};
  return clash_text(g, *g.table(), c->key);
}

// ---------------------------------------------------------------------------
// Rule instances

namespace {

struct Inst {
  Rule rule = Rule::TAnd;
  std::array<Key, 3> prem{};
  int np = 0;
  std::array<std::array<Key, 3>, 3> alt{};
  std::array<int, 3> len{};
  int nalt = 0;
  bool merge = false;  // Cent: alternative 1 is Γ[from/to]
  Label from = 0, to = 0;
  Label fresh = 0;
  Label premiseLabel = 0;  // dynamic rules: the label the premise is attached to
  DepSet deps;

  void add_alt(std::initializer_list<Key> keys) {
    int i = 0;
    for (Key k : keys) alt[nalt][i++] = k;
    len[nalt++] = i;
  }
};

bool alt_present(const TableauSet& g, const Inst& in, int a) {
  if (in.merge && a == 1) return false;
  for (int i = 0; i < in.len[a]; ++i) {
    if (!g.has(in.alt[a][i])) return false;
  }
  return true;
}

bool some_alt_present(const TableauSet& g, const Inst& in) {
  for (int a = 0; a < in.nalt; ++a) {
    if (alt_present(g, in, a)) return true;
  }
  return false;
}

// Entry indices grouped by kind, plus alive labels in birth order.
struct View {
  std::vector<std::uint32_t> lab, box, boxAt, pref;
  std::vector<Label> labels;

  explicit View(const TableauSet& g) : labels(g.labels()) {
    const auto& es = g.entries();
    for (std::uint32_t i = 0; i < es.size(); ++i) {
      switch (TableauSet::key_kind(es[i].key)) {
        case TKind::Labelled: lab.push_back(i); break;
        case TKind::Box: box.push_back(i); break;
        case TKind::BoxAt: boxAt.push_back(i); break;
        case TKind::Pref: pref.push_back(i); break;
      }
    }
  }
};

using TS = TableauSet;

// Calls cb for every static instance of `rule` none of whose branches is
// already present in g.
// Stops and returns true as soon as cb returns true.
template <typename CB>
bool gen_rule(const TableauSet& g, const View& v, Rule rule, CB&& cb) {
  FormulaTable& t = *g.table();
  const auto& es = g.entries();
  auto emit = [&](Inst& in) -> bool {
    if (in.rule == Rule::F1Sim) {
      if (alt_present(g, in, 0) || alt_present(g, in, 1) || g.applied(in.prem[0])) return false;
    } else if (some_alt_present(g, in)) {
      return false;
    }
    return cb(in);
  };
  auto base = [&](Rule r, std::uint32_t i) {
    Inst in;
    in.rule = r;
    in.prem[in.np++] = es[i].key;
    in.deps = es[i].deps;
    return in;
  };

  switch (rule) {
    case Rule::TAnd:
    case Rule::Neg:
    case Rule::FAnd:
    case Rule::F1Sim:
    case Rule::TSim:
      for (std::uint32_t i : v.lab) {
        const Key k = es[i].key;
        const Label x = TS::key_a(k);
        const Id f = TS::key_c(k);
        const Op op = t.op(f);
        if (rule == Rule::TAnd && op == Op::And) {
          Inst in = base(rule, i);
          in.add_alt({TS::lab_key(x, t.lhs(f)), TS::lab_key(x, t.rhs(f))});
          if (emit(in)) return true;
        } else if (rule == Rule::TSim && op == Op::Sim) {
          const Id a = t.lhs(f), b = t.rhs(f);
          for (Label y : v.labels) {
            Inst in = base(rule, i);
            in.deps |= g.label_deps(y);
            in.add_alt({TS::box_key(x, false, a), TS::lab_key(y, t.neg(b))});
            in.add_alt({TS::lab_key(y, b), TS::box_at_key(y, x, false, a)});
            if (emit(in)) return true;
          }
        } else if (op == Op::Not) {
          const Id c = t.operand(f);
          const Op cop = t.op(c);
          if (rule == Rule::Neg && cop == Op::Not) {
            Inst in = base(rule, i);
            in.add_alt({TS::lab_key(x, t.operand(c))});
            if (emit(in)) return true;
          } else if (rule == Rule::FAnd && cop == Op::And) {
            Inst in = base(rule, i);
            in.add_alt({TS::lab_key(x, t.neg(t.lhs(c)))});
            in.add_alt({TS::lab_key(x, t.neg(t.rhs(c)))});
            if (emit(in)) return true;
          } else if (rule == Rule::F1Sim && cop == Op::Sim) {
            const Id a = t.lhs(c), b = t.rhs(c);
            Inst in = base(rule, i);
            in.add_alt({TS::box_key(x, true, a)});
            in.add_alt({TS::lab_key(x, b)});
            in.add_alt({TS::lab_key(x, t.neg(a)), TS::lab_key(x, t.neg(b))});
            if (emit(in)) return true;
          }
        }
      }
      return false;

    case Rule::TBox:
      for (std::uint32_t i : v.box) {
        const Key k = es[i].key;
        if (!TS::key_positive(k)) continue;
        const Id a = TS::key_c(k);
        for (Label y : v.labels) {
          Inst in = base(rule, i);
          in.deps |= g.label_deps(y);
          in.add_alt({TS::lab_key(y, t.neg(a)), TS::box_key(y, true, a)});
          if (emit(in)) return true;
        }
      }
      return false;

    case Rule::F1BoxAt:
      for (std::uint32_t i : v.boxAt) {
        const Key k = es[i].key;
        if (TS::key_positive(k)) continue;
        const Label x = TS::key_b(k);
        const Id a = TS::key_c(k);
        Inst in = base(rule, i);
        in.add_alt({TS::lab_key(x, t.neg(a))});
        in.add_alt({TS::lab_key(x, a)});
        if (emit(in)) return true;
      }
      return false;

    case Rule::TBoxAt:
      for (std::uint32_t i : v.boxAt) {
        const Key k = es[i].key;
        if (!TS::key_positive(k)) continue;
        const Label z = TS::key_a(k), x = TS::key_b(k);
        const Id a = TS::key_c(k);
        for (std::uint32_t j : v.pref) {
          const Key p = es[j].key;
          if (TS::key_b(p) != x || TS::key_c(p) != z) continue;
          const Label y = TS::key_a(p);
          Inst in = base(rule, i);
          in.prem[in.np++] = p;
          in.deps |= es[j].deps;
          in.add_alt({TS::lab_key(y, t.neg(a)), TS::box_at_key(y, x, true, a)});
          if (emit(in)) return true;
        }
      }
      return false;

    case Rule::Mod:
      for (std::uint32_t i : v.pref) {
        const Key k = es[i].key;
        const Label z = TS::key_a(k), x = TS::key_b(k), u = TS::key_c(k);
        for (Label y : v.labels) {
          Inst in = base(rule, i);
          in.deps |= g.label_deps(y);
          in.add_alt({TS::pref_key(z, x, y)});
          in.add_alt({TS::pref_key(y, x, u)});
          if (emit(in)) return true;
        }
      }
      return false;

    case Rule::Cent:
      for (Label x : v.labels) {
        for (Label y : v.labels) {
          if (x == y) continue;
          Inst in;
          in.rule = rule;
          in.deps = g.label_deps(x) | g.label_deps(y);
          in.add_alt({TS::pref_key(x, x, y)});
          in.nalt = 2;
          in.merge = true;
          in.from = x;
          in.to = y;
          if (emit(in)) return true;
        }
      }
      return false;

    default:
      return false;
  }
}

constexpr std::array<Rule, 4> kDeterministic = {Rule::TAnd, Rule::Neg, Rule::TBox, Rule::TBoxAt};
constexpr std::array<Rule, 6> kBranching = {Rule::FAnd, Rule::F1Sim, Rule::F1BoxAt,
                                            Rule::TSim, Rule::Mod,   Rule::Cent};
constexpr std::array<Rule, 10> kStatic = {Rule::TAnd,    Rule::FAnd,   Rule::Neg, Rule::F1Sim,
                                          Rule::TSim,    Rule::F1BoxAt, Rule::TBoxAt, Rule::TBox,
                                          Rule::Mod,     Rule::Cent};

// ---- blocking on ids ----

bool pi_subset(const TableauSet& g, const View& v, Label x, Label u) {
  const auto& es = g.entries();
  for (std::uint32_t i : v.lab) {
    const Key k = es[i].key;
    if (TS::key_a(k) == x && !g.has(TS::lab_key(u, TS::key_c(k)))) return false;
  }
  return true;
}

std::optional<Label> subset_blocker(const TableauSet& g, const View& v, Label x) {
  for (Label u : v.labels) {  // oldest first
    if (!g.older(u, x)) break;
    if (pi_subset(g, v, x, u)) return u;
  }
  return std::nullopt;
}

std::optional<Label> blocker_2a(const TableauSet& g, const View& v, Label x, Id a, Id b) {
  for (Label y : v.labels) {
    if (g.has(TS::lab_key(y, b)) && g.has(TS::box_at_key(y, x, true, a))) return y;
  }
  return std::nullopt;
}

std::optional<Label> blocker_3a(const TableauSet& g, const View& v, Label z, Label x, Id a) {
  for (Label y : v.labels) {
    if (g.has(TS::pref_key(y, x, z)) && g.has(TS::lab_key(y, a)) &&
        g.has(TS::box_at_key(y, x, true, a))) {
      return y;
    }
  }
  return std::nullopt;
}

bool box_plus_subset(const TableauSet& g, const View& v, Label x, Label z, Label w) {
  const auto& es = g.entries();
  for (std::uint32_t i : v.boxAt) {
    const Key k = es[i].key;
    if (TS::key_positive(k) && TS::key_a(k) == z && TS::key_b(k) == x &&
        !g.has(TS::box_at_key(w, x, true, TS::key_c(k)))) {
      return false;
    }
  }
  return true;
}

std::optional<Label> blocker_3c(const TableauSet& g, const View& v, Label z, Label x, Id a) {
  for (Label w : v.labels) {
    if (!g.older(w, z)) break;
    if (g.has(TS::box_at_key(w, x, false, a)) && box_plus_subset(g, v, x, z, w)) return w;
  }
  return std::nullopt;
}

std::optional<Label> blocker_4(const TableauSet& g, const View& v, Id a) {
  for (Label y : v.labels) {
    if (g.has(TS::lab_key(y, a))) return y;
  }
  return std::nullopt;
}

// Every dynamic instance whose premises are present, oldest premise label
// first; blocked ones are skipped unless `includeBlocked`.
std::vector<Inst> dynamic_instances(const TableauSet& g, bool firstOnly) {
  FormulaTable& t = *g.table();
  const View v(g);
  const auto& es = g.entries();
  const Label fresh = g.next_label();
  std::vector<Inst> cands;
  for (std::uint32_t i = 0; i < es.size(); ++i) {
    const Key k = es[i].key;
    Inst in;
    in.fresh = fresh;
    in.deps = es[i].deps;
    in.prem[in.np++] = k;
    switch (TS::key_kind(k)) {
      case TKind::Labelled: {
        const Id f = TS::key_c(k);
        if (t.op(f) != Op::Not || t.op(t.operand(f)) != Op::Sim) continue;
        const Label x = TS::key_a(k);
        const Id a = t.lhs(t.operand(f)), b = t.rhs(t.operand(f));
        const Key na = TS::lab_key(x, t.neg(a)), nb = TS::lab_key(x, t.neg(b));
        const DepSet* da = g.deps_of(na);
        const DepSet* db = g.deps_of(nb);
        if (!da || !db || g.has(TS::box_key(x, true, a))) continue;
        if (const DepSet* split = g.applied(k)) in.deps |= *split;
        in.rule = Rule::F2Sim;
        in.premiseLabel = x;
        in.prem[in.np++] = na;
        in.prem[in.np++] = nb;
        in.deps |= *da | *db;
        in.add_alt({TS::lab_key(fresh, b), TS::box_at_key(fresh, x, true, a)});
        break;
      }
      case TKind::BoxAt: {
        if (TS::key_positive(k)) continue;
        const Label z = TS::key_a(k), x = TS::key_b(k);
        const Id a = TS::key_c(k);
        const Key na = TS::lab_key(x, t.neg(a));
        const DepSet* da = g.deps_of(na);
        if (!da) continue;
        in.rule = Rule::F2BoxAt;
        in.premiseLabel = z;
        in.prem[in.np++] = na;
        in.deps |= *da;
        in.add_alt({TS::pref_key(fresh, x, z), TS::lab_key(fresh, a),
                    TS::box_at_key(fresh, x, true, a)});
        break;
      }
      case TKind::Box: {
        if (TS::key_positive(k)) continue;
        in.rule = Rule::FBox;
        in.premiseLabel = TS::key_a(k);
        in.add_alt({TS::lab_key(fresh, TS::key_c(k))});
        break;
      }
      case TKind::Pref:
        continue;
    }
    cands.push_back(in);
  }
  std::stable_sort(cands.begin(), cands.end(), [&](const Inst& a, const Inst& b) {
    return g.birth(a.premiseLabel) < g.birth(b.premiseLabel);
  });

  std::vector<Inst> out;
  for (const Inst& in : cands) {
    bool blocked = false;
    switch (in.rule) {
      case Rule::F2Sim: {
        const Id c = t.operand(TS::key_c(in.prem[0]));
        const Label x = in.premiseLabel;
        blocked = blocker_2a(g, v, x, t.lhs(c), t.rhs(c)) || subset_blocker(g, v, x);
        break;
      }
      case Rule::F2BoxAt: {
        const Key k = in.prem[0];
        const Label z = TS::key_a(k), x = TS::key_b(k);
        const Id a = TS::key_c(k);
        blocked = blocker_3a(g, v, z, x, a) || subset_blocker(g, v, x) || blocker_3c(g, v, z, x, a);
        break;
      }
      case Rule::FBox:
        blocked = blocker_4(g, v, TS::key_c(in.prem[0])).has_value();
        break;
      default:
        break;
    }
    if (blocked) continue;
    out.push_back(in);
    if (firstOnly) break;
  }
  return out;
}

RuleInstance to_public(const TableauSet& g, const Inst& in) {
  RuleInstance r{in.rule, {}, {}, 0, 0, std::nullopt};
  for (int i = 0; i < in.np; ++i) r.premises.push_back(g.decode(in.prem[i]));
  for (int a = 0; a < in.nalt; ++a) {
    if (in.merge && a == 1) {
      r.branches.emplace_back();
      continue;
    }
    std::vector<TFormula> b;
    for (int i = 0; i < in.len[a]; ++i) b.push_back(g.decode(in.alt[a][i]));
    r.branches.push_back(std::move(b));
  }
  if (in.merge) {
    r.mergeFrom = in.from;
    r.mergeTo = in.to;
  }
  if (is_dynamic(in.rule)) r.fresh = in.fresh;
  return r;
}

std::string join(const std::vector<TFormula>& fs) {
  std::string out;
  for (const auto& f : fs) {
    if (!out.empty()) out += ", ";
    out += to_string(f);
  }
  return out;
}

}  // namespace

std::string to_string(const RuleInstance& r) {
  std::string out = rule_name(r.rule);
  if (!r.premises.empty()) out += " " + join(r.premises);
  out += " =>";
  for (std::size_t b = 0; b < r.branches.size(); ++b) {
    if (b > 0) out += " |";
    if (r.rule == Rule::Cent && b == 1) {
      out += " " + label_name(r.mergeFrom) + " merged into " + label_name(r.mergeTo);
    } else {
      out += " " + join(r.branches[b]);
    }
  }
  return out;
}

std::vector<RuleInstance> applicable_static(const TableauSet& g) {
  const View v(g);
  std::vector<RuleInstance> out;
  for (Rule r : kStatic) {
    gen_rule(g, v, r, [&](const Inst& in) {
      out.push_back(to_public(g, in));
      return false;
    });
  }
  return out;
}

std::optional<RuleInstance> applicable_dynamic(const TableauSet& g) {
  auto v = dynamic_instances(g, true);
  if (v.empty()) return std::nullopt;
  return to_public(g, v.front());
}

std::vector<RuleInstance> all_dynamic(const TableauSet& g) {
  std::vector<RuleInstance> out;
  for (const auto& in : dynamic_instances(g, false)) out.push_back(to_public(g, in));
  return out;
}

std::vector<TableauSet> apply(const TableauSet& g, const RuleInstance& r) {
  std::vector<TableauSet> out;
  for (std::size_t b = 0; b < r.branches.size(); ++b) {
    if (r.rule == Rule::Cent && b == 1) {
      out.push_back(g.merged(r.mergeFrom, r.mergeTo));
      continue;
    }
    TableauSet child = g;
    if (r.rule == Rule::F1Sim) child.mark_applied(child.encode(r.premises.at(0)), DepSet{});
    if (r.fresh) {
      if (child.has_label(*r.fresh)) throw std::invalid_argument("fresh label already in use");
      if (child.next_label() == *r.fresh) {
        child.add_label();
      } else {
        child.ensure_label(*r.fresh);
      }
    }
    for (const auto& f : r.branches[b]) child.add(f);
    out.push_back(std::move(child));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Blocking (public wrappers)

std::optional<Label> blocked_2a(const TableauSet& g, Label x, const Formula& a, const Formula& b) {
  FormulaTable& t = *g.table();
  return blocker_2a(g, View(g), x, t.intern(a), t.intern(b));
}

std::optional<Label> blocked_subset(const TableauSet& g, Label x) {
  return subset_blocker(g, View(g), x);
}

std::optional<Label> blocked_3a(const TableauSet& g, Label z, Label x, const Formula& a) {
  return blocker_3a(g, View(g), z, x, g.table()->intern(a));
}

std::optional<Label> blocked_3c(const TableauSet& g, Label z, Label x, const Formula& a) {
  return blocker_3c(g, View(g), z, x, g.table()->intern(a));
}

std::optional<Label> blocked_4(const TableauSet& g, const Formula& a) {
  return blocker_4(g, View(g), g.table()->intern(a));
}

// ---------------------------------------------------------------------------
// Saturation check

std::vector<SaturationViolation> is_saturated(const TableauSet& g) {
  FormulaTable& t = *g.table();
  const View v(g);
  const auto& es = g.entries();
  std::vector<SaturationViolation> out;
  auto report = [&](const char* clause, Key k, const std::string& extra = {}) {
    std::string d = to_string(g.decode(k));
    if (!extra.empty()) d += " (" + extra + ")";
    out.push_back({clause, d});
  };

  for (std::uint32_t i : v.lab) {
    const Key k = es[i].key;
    const Label x = TS::key_a(k);
    const Id f = TS::key_c(k);
    switch (t.op(f)) {
      case Op::And:
        if (!g.has(TS::lab_key(x, t.lhs(f))) || !g.has(TS::lab_key(x, t.rhs(f)))) report("T&", k);
        break;
      case Op::Sim: {
        const Id a = t.lhs(f), b = t.rhs(f);
        for (Label y : v.labels) {
          const bool first = g.has(TS::lab_key(y, t.neg(b))) && g.has(TS::box_key(x, false, a));
          const bool second = g.has(TS::lab_key(y, b)) && g.has(TS::box_at_key(y, x, false, a));
          if (!first && !second) report("T<<", k, "label " + label_name(y));
        }
        break;
      }
      case Op::Not: {
        const Id c = t.operand(f);
        if (t.op(c) == Op::Not) {
          if (!g.has(TS::lab_key(x, t.operand(c)))) report("NEG", k);
        } else if (t.op(c) == Op::And) {
          if (!g.has(TS::lab_key(x, t.neg(t.lhs(c)))) && !g.has(TS::lab_key(x, t.neg(t.rhs(c))))) {
            report("F&", k);
          }
        } else if (t.op(c) == Op::Sim) {
          const Id a = t.lhs(c), b = t.rhs(c);
          if (g.has(TS::box_key(x, true, a)) || g.has(TS::lab_key(x, b))) break;
          if (g.has(TS::lab_key(x, t.neg(a))) && g.has(TS::lab_key(x, t.neg(b)))) {
            if (!blocker_2a(g, v, x, a, b)) report("F<<(iii)", k);
          } else {
            report("F<<", k);
          }
        }
        break;
      }
      default:
        break;
    }
  }

  for (std::uint32_t i : v.box) {
    const Key k = es[i].key;
    const Label x = TS::key_a(k);
    const Id a = TS::key_c(k);
    (void)x;
    if (TS::key_positive(k)) {
      for (Label y : v.labels) {
        if (!g.has(TS::lab_key(y, t.neg(a))) || !g.has(TS::box_key(y, true, a))) {
          report("T[]", k, "label " + label_name(y));
        }
      }
    } else if (!blocker_4(g, v, a)) {
      report("F[]", k);
    }
  }

  for (std::uint32_t i : v.boxAt) {
    const Key k = es[i].key;
    const Label z = TS::key_a(k), x = TS::key_b(k);
    const Id a = TS::key_c(k);
    if (TS::key_positive(k)) {
      for (std::uint32_t j : v.pref) {
        const Key p = es[j].key;
        if (TS::key_b(p) != x || TS::key_c(p) != z) continue;
        const Label y = TS::key_a(p);
        if (!g.has(TS::lab_key(y, t.neg(a))) || !g.has(TS::box_at_key(y, x, true, a))) {
          report("T[]x", k, "via " + to_string(g.decode(p)));
        }
      }
    } else {
      if (g.has(TS::lab_key(x, a))) continue;
      if (g.has(TS::lab_key(x, t.neg(a)))) {
        if (!blocker_3a(g, v, z, x, a)) report("F[]x(ii)", k);
      } else {
        report("F[]x", k);
      }
    }
  }

  for (Label x : v.labels) {
    for (Label y : v.labels) {
      if (x != y && !g.has(TS::pref_key(x, x, y))) {
        out.push_back({"Cent", label_name(x) + " <_" + label_name(x) + " " + label_name(y) +
                                   " missing"});
      }
    }
  }

  for (std::uint32_t i : v.pref) {
    const Key k = es[i].key;
    const Label y = TS::key_a(k), x = TS::key_b(k), z = TS::key_c(k);
    for (Label u : v.labels) {
      if (!g.has(TS::pref_key(u, x, z)) && !g.has(TS::pref_key(y, x, u))) {
        report("Mod", k, "label " + label_name(u));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Search

namespace {

struct Outcome {
  bool open = false;
  DepSet deps;
};

class Engine {
 public:
  Engine(std::size_t cap, std::uint64_t nodeCap, bool trace)
      : cap_(cap), nodeCap_(nodeCap), tracing_(trace) {}

  Outcome solve(TableauSet g, unsigned depth, std::string id);

  std::optional<TableauSet> open;
  std::size_t maxLabels = 0;
  std::uint64_t nodes = 0;
  std::vector<std::string> trace;

 private:
  void note(const TableauSet& g) { maxLabels = std::max(maxLabels, g.label_count()); }

  std::string premises_text(const TableauSet& g, const Inst& in) const {
    std::string out;
    for (int i = 0; i < in.np; ++i) {
      if (!out.empty()) out += ", ";
      out += to_string(g.decode(in.prem[i]));
    }
    return out;
  }

  std::string alt_text(const TableauSet& g, const Inst& in, int a) const {
    if (in.merge && a == 1) return label_name(in.from) + " merged into " + label_name(in.to);
    std::string out;
    for (int i = 0; i < in.len[a]; ++i) {
      if (!out.empty()) out += ", ";
      out += to_string(g.decode(in.alt[a][i]));
    }
    return out;
  }

  void log_rule(const TableauSet& g, const Inst& in, int a, const std::string& id) {
    if (!tracing_) return;
    std::string line = rule_name(in.rule);
    if (in.np > 0) line += " " + premises_text(g, in);
    line += " => " + alt_text(g, in, a) + " | " + id;
    trace.push_back(std::move(line));
  }

  void log_closed(const std::string& reason, const std::string& id) {
    if (tracing_) trace.push_back("CLOSED " + reason + " | " + id);
  }

  // Clash produced by alternative a of `in` against g, or within itself.
  std::optional<DepSet> alt_clash(const TableauSet& g, const Inst& in, int a, Key* culprit) const {
    FormulaTable& t = *g.table();
    for (int i = 0; i < in.len[a]; ++i) {
      const Key k = in.alt[a][i];
      if (auto d = clash_of(g, t, k, in.deps)) {
        if (culprit) *culprit = k;
        return d;
      }
      for (int j = 0; j < i; ++j) {
        if (complementary(t, k, in.alt[a][j]) || complementary_pref(k, in.alt[a][j])) {
          if (culprit) *culprit = k;
          return in.deps;
        }
      }
    }
    return std::nullopt;
  }

  // Inserts alternative a; returns the clash dependencies if the set closes.
  std::optional<DepSet> add_alt(TableauSet& g, const Inst& in, int a, const DepSet& deps,
                                std::string* reason) {
    FormulaTable& t = *g.table();
    if (in.rule == Rule::F1Sim) g.mark_applied(in.prem[0], deps);
    for (int i = 0; i < in.len[a]; ++i) {
      const Key k = in.alt[a][i];
      if (!g.insert(k, deps)) continue;
      if (auto d = clash_of(g, t, k, deps)) {
        if (reason && tracing_) *reason = clash_text(g, t, k);
        return d;
      }
    }
    return std::nullopt;
  }

  std::optional<DepSet> saturate_deterministic(TableauSet& g, const std::string& id,
                                               std::string* reason) {
    for (;;) {
      const View v(g);
      std::vector<Inst> batch;
      for (Rule r : kDeterministic) {
        gen_rule(g, v, r, [&](const Inst& in) {
          batch.push_back(in);
          return false;
        });
      }
      if (batch.empty()) return std::nullopt;
      for (const Inst& in : batch) {
        if (alt_present(g, in, 0)) continue;
        log_rule(g, in, 0, id);
        if (auto d = add_alt(g, in, 0, in.deps, reason)) return d;
      }
    }
  }

  std::size_t cap_;
  std::uint64_t nodeCap_;
  bool tracing_;
};

Outcome Engine::solve(TableauSet g, unsigned depth, std::string id) {
  note(g);
  for (;;) {
    std::string reason;
    if (auto d = saturate_deterministic(g, id, &reason)) {
      log_closed(reason, id);
      return {false, *d};
    }

    // Branching static rules, with unit propagation: an instance whose
    // alternatives all clash closes the set, and one with a single surviving
    // alternative is applied without branching.
    const View v(g);
    std::optional<Inst> pick;
    std::optional<Inst> forced;
    std::array<std::optional<DepSet>, 3> clashes;
    std::array<Key, 3> culprits{};
    int survivor = -1;
    for (Rule r : kBranching) {
      const bool stop = gen_rule(g, v, r, [&](const Inst& in) {
        std::array<std::optional<DepSet>, 3> cl;
        std::array<Key, 3> cu{};
        int openCount = 0, last = -1;
        for (int a = 0; a < in.nalt; ++a) {
          if (in.merge && a == 1) {
            ++openCount;
            last = a;
            continue;
          }
          cl[a] = alt_clash(g, in, a, &cu[a]);
          if (!cl[a]) {
            ++openCount;
            last = a;
          }
        }
        if (openCount <= 1) {
          forced = in;
          clashes = cl;
          culprits = cu;
          survivor = last;
          return true;
        }
        if (!pick) pick = in;
        return false;
      });
      if (stop) break;
    }

    if (forced) {
      const Inst& in = *forced;
      DepSet extra;
      for (int a = 0; a < in.nalt; ++a) {
        if (a == survivor) continue;
        extra |= *clashes[a];
        if (tracing_) {
          const std::string cid = id + "." + std::to_string(a + 1);
          log_rule(g, in, a, cid);
          TableauSet probe = g;
          probe.insert(culprits[a], in.deps);
          log_closed(clash_text(probe, *g.table(), culprits[a]), cid);
        }
      }
      if (survivor < 0) return {false, extra | in.deps};
      if (in.nalt > 1) id += "." + std::to_string(survivor + 1);
      log_rule(g, in, survivor, id);
      const DepSet deps = in.deps | extra;
      if (in.merge && survivor == 1) {
        g = g.merged(in.from, in.to, deps);
        if (auto c = find_clash(g)) {
          log_closed(tracing_ ? clash_text(g, *g.table(), c->key) : std::string(), id);
          return {false, c->deps};
        }
      } else if (auto d = add_alt(g, in, survivor, deps, &reason)) {
        log_closed(reason, id);
        return {false, *d};
      }
      continue;
    }

    if (pick) {
      const Inst& in = *pick;
      if (nodeCap_ && nodes >= nodeCap_) {
        throw ResourceLimit("node cap of " + std::to_string(nodeCap_) + " exceeded");
      }
      ++nodes;
      const unsigned bit = std::min(depth, 255U);
      DepSet mark;
      mark.set(bit);
      DepSet acc;
      for (int a = 0; a < in.nalt; ++a) {
        const std::string cid = id + "." + std::to_string(a + 1);
        log_rule(g, in, a, cid);
        Outcome r;
        if (in.merge && a == 1) {
          TableauSet child = g.merged(in.from, in.to, in.deps | mark);
          if (auto c = find_clash(child)) {
            log_closed(tracing_ ? clash_text(child, *g.table(), c->key) : std::string(), cid);
            r = {false, c->deps};
          } else {
            r = solve(std::move(child), depth + 1, cid);
          }
        } else {
          TableauSet child = g;
          std::string why;
          if (auto d = add_alt(child, in, a, in.deps | mark, &why)) {
            log_closed(why, cid);
            r = {false, *d};
          } else {
            r = solve(std::move(child), depth + 1, cid);
          }
        }
        if (r.open) return r;
        if (bit < 255 && !r.deps.test(bit)) return r;  // this choice played no part
        if (bit < 255) r.deps.reset(bit);
        acc |= r.deps;
      }
      return {false, acc};
    }

    auto dyn = dynamic_instances(g, true);
    if (dyn.empty()) {
      if (tracing_) trace.push_back("OPEN | " + id);
      open = std::move(g);
      return {true, {}};
    }
    const Inst& in = dyn.front();
    if (g.label_count() + 1 > cap_) {
      throw ResourceLimit("label cap of " + std::to_string(cap_) + " exceeded");
    }
    g.add_label(in.deps);
    note(g);
    log_rule(g, in, 0, id);
    if (auto d = add_alt(g, in, 0, in.deps, &reason)) {
      log_closed(reason, id);
      return {false, *d};
    }
  }
}

std::size_t auto_cap(std::size_t n) {
  if (n >= 15) return 60000;
  return std::min<std::size_t>((std::size_t{1} << n) + 16, 60000);
}

}  // namespace

Verdict decide(const Formula& f, const DecideOptions& opts) {
  if (contains_op(f, Op::Cond)) {
    throw std::invalid_argument("decide expects a formula without '~>'; translate it first");
  }
  auto table = std::make_shared<FormulaTable>();
  TableauSet g(table);
  const Label root = g.add_label();
  g.set_root(root);
  g.insert(TableauSet::lab_key(root, table->intern(f)), DepSet{});

  Engine engine(opts.labelCap ? opts.labelCap : auto_cap(f.size()), opts.nodeCap, opts.trace);
  Verdict v;
  v.root = root;
  Outcome r;
  if (auto c = find_clash(g)) {
    if (opts.trace) engine.trace.push_back("CLOSED " + clash_text(g, *table, c->key) + " | 0");
    r = {false, c->deps};
  } else {
    r = engine.solve(std::move(g), 0, "0");
  }
  v.maxLabels = std::max<std::size_t>(engine.maxLabels, 1);
  v.nodes = engine.nodes;
  v.trace = std::move(engine.trace);
  if (r.open) {
    v.status = Status::OpenSaturated;
    v.root = engine.open->root();
    v.openSet = std::move(engine.open);
  }
  return v;
}

}  // namespace csl
