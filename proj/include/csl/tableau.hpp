// Labelled tableau engine for CSL.
//
// A TableauSet is one branch: labelled formulas x:A, boxed formulas
// x:(~)[]~A and x:(~)[y]~A, and preference statements y <_x z, together with
// the birth order of the labels. decide() runs the calculus with the usual
// restrictions and blocking conditions and returns either a closed verdict or
// one open branch saturated under blocking.

#ifndef CSL_TABLEAU_HPP_
#define CSL_TABLEAU_HPP_

#include <bitset>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "csl/formula.hpp"

namespace csl {

using Label = std::uint32_t;

std::string label_name(Label l);  // x0, x1, ...

// Interns formulas so that the engine works on small integer ids. One table is
// shared by every branch of a run.
class FormulaTable {
 public:
  using Id = std::uint32_t;

  Id intern(const Formula& f);
  const Formula& formula(Id id) const { return nodes_[id].f; }
  Op op(Id id) const { return nodes_[id].op; }
  Id lhs(Id id) const { return nodes_[id].lhs; }
  Id rhs(Id id) const { return nodes_[id].rhs; }
  Id operand(Id id) const { return nodes_[id].lhs; }
  // Id of ~f, interned on first use.
  Id neg(Id id);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Formula f;
    Op op;
    Id lhs = 0;
    Id rhs = 0;
    std::int64_t neg = -1;
  };
  std::vector<Node> nodes_;
  std::unordered_map<Formula, Id, FormulaHash> ids_;
};

enum class TKind : std::uint8_t { Labelled, Box, BoxAt, Pref };

// One tableau formula. For the boxed kinds `f` is the A of (~)[]~A and
// (~)[idx]~A, and `positive` tells the two signs apart.
struct TFormula {
  TKind kind = TKind::Labelled;
  Label x = 0;    // the label carrying the formula (y in y <_idx z)
  Label idx = 0;  // index of [idx] and <_idx
  Label z = 0;    // right-hand label of a preference
  bool positive = true;
  std::optional<Formula> f;

  static TFormula labelled(Label x, Formula f);
  static TFormula box(Label x, bool positive, Formula a);
  static TFormula box_at(Label x, Label idx, bool positive, Formula a);
  static TFormula pref(Label y, Label idx, Label z);

  friend bool operator==(const TFormula& a, const TFormula& b);
};

std::string to_string(const TFormula& t);

enum class Rule : std::uint8_t {
  TAnd, FAnd, Neg, F1Sim, TSim, F1BoxAt, TBoxAt, TBox, Mod, Cent,  // static
  F2Sim, F2BoxAt, FBox                                             // dynamic
};
inline constexpr int kRuleCount = 13;

std::string rule_name(Rule r);
bool is_dynamic(Rule r);

// Branch-point dependencies used for backjumping.
using DepSet = std::bitset<256>;

class TableauSet {
 public:
  explicit TableauSet(std::shared_ptr<FormulaTable> table);

  const std::shared_ptr<FormulaTable>& table() const { return table_; }

  // A fresh label, born after every existing one.
  Label add_label();
  // Adds a label with a specific number (used when building sets by hand).
  void ensure_label(Label l);
  bool has_label(Label l) const { return l < labels_.size() && labels_[l].alive; }
  std::vector<Label> labels() const;  // alive labels in birth order
  std::size_t label_count() const { return aliveCount_; }
  std::uint64_t birth(Label l) const { return labels_.at(l).birth; }
  bool older(Label a, Label b) const { return birth(a) < birth(b); }  // a ⊏ b
  Label next_label() const { return static_cast<Label>(labels_.size()); }

  // Returns false when already present. Labels mentioned are created on demand.
  bool add(const TFormula& t);
  bool contains(const TFormula& t) const;
  std::vector<TFormula> formulas() const;
  std::size_t size() const { return entries_.size(); }

  // Π(x): the plain CSL formulas labelled x.
  std::vector<Formula> pi(Label x) const;
  // Box⁺(idx, z): the A with z:[idx]~A.
  std::vector<Formula> box_plus(Label idx, Label z) const;

  // Copy without the formulas matching `drop`; labels are kept.
  template <typename Pred>
  TableauSet without(Pred drop) const {
    TableauSet out(table_);
    out.labels_ = labels_;
    out.aliveCount_ = aliveCount_;
    out.birthCounter_ = birthCounter_;
    out.root_ = root_;
    out.applied_ = applied_;
    for (const auto& e : entries_) {
      if (!drop(decode(e.key))) out.insert(e.key, e.deps);
    }
    return out;
  }

  // Γ[from/to]: every occurrence of `from` becomes `to`; the survivor takes
  // the older of the two birth values.
  TableauSet merged(Label from, Label to) const;

  Label root() const { return root_; }
  void set_root(Label l) { root_ = l; }

  // ---- engine-level interface (ids and packed keys) ----
  struct Entry {
    std::uint64_t key;
    DepSet deps;
  };
  using Key = std::uint64_t;
  static Key lab_key(Label x, FormulaTable::Id f);
  static Key box_key(Label x, bool positive, FormulaTable::Id f);
  static Key box_at_key(Label x, Label idx, bool positive, FormulaTable::Id f);
  static Key pref_key(Label y, Label idx, Label z);
  static TKind key_kind(Key k) { return static_cast<TKind>(k >> 62); }
  static bool key_positive(Key k) { return (k >> 61) & 1U; }
  static Label key_a(Key k) { return static_cast<Label>((k >> 44) & 0xFFFFU); }
  static Label key_b(Key k) { return static_cast<Label>((k >> 28) & 0xFFFFU); }
  static std::uint32_t key_c(Key k) { return static_cast<std::uint32_t>(k & 0xFFFFFFFU); }

  Key encode(const TFormula& t) const;
  TFormula decode(Key k) const;

  bool has(Key k) const { return find(k) >= 0; }
  const DepSet* deps_of(Key k) const;
  bool insert(Key k, const DepSet& deps);
  const std::vector<Entry>& entries() const { return entries_; }
  const DepSet& label_deps(Label l) const { return labels_.at(l).deps; }
  Label add_label(const DepSet& deps);
  TableauSet merged(Label from, Label to, const DepSet& mergeDeps) const;

  // Premises of the ~(A << B) splits performed on this branch, with the
  // dependencies of the alternative taken.
  void mark_applied(Key premise, const DepSet& deps);
  const DepSet* applied(Key premise) const;
  const std::vector<Entry>& applied_log() const { return applied_; }

 private:
  struct LabelInfo {
    std::uint64_t birth = 0;
    DepSet deps;
    bool alive = false;
  };

  std::int64_t find(Key k) const;
  void grow();

  std::shared_ptr<FormulaTable> table_;
  std::vector<Entry> entries_;
  std::vector<std::uint64_t> slotKeys_;  // open addressing, 0 = empty
  std::vector<std::uint32_t> slotIdx_;
  std::vector<LabelInfo> labels_;
  std::vector<Entry> applied_;
  std::size_t aliveCount_ = 0;
  std::uint64_t birthCounter_ = 0;
  Label root_ = 0;
};

// ---------------------------------------------------------------------------

bool is_closed(const TableauSet& g);
// Human-readable reason, empty when open.
std::string closure_reason(const TableauSet& g);

struct RuleInstance {
  Rule rule;
  std::vector<TFormula> premises;
  std::vector<std::vector<TFormula>> branches;
  // Cent only: the second branch is Γ[from/to] instead of a formula list.
  Label mergeFrom = 0;
  Label mergeTo = 0;
  // Dynamic rules only: the label introduced.
  std::optional<Label> fresh;
};

std::string to_string(const RuleInstance& r);

// All static instances none of whose branches is already present. A split on
// ~(A << B) is also skipped once it has been applied.
std::vector<RuleInstance> applicable_static(const TableauSet& g);
// The dynamic instance the systematic procedure would pick next, if any.
std::optional<RuleInstance> applicable_dynamic(const TableauSet& g);
// All non-blocked dynamic instances, in label birth order.
std::vector<RuleInstance> all_dynamic(const TableauSet& g);
std::vector<TableauSet> apply(const TableauSet& g, const RuleInstance& r);

// Blocking tests, exposed for model completion and tests. Each returns the
// blocking label when the condition holds.
std::optional<Label> blocked_2a(const TableauSet& g, Label x, const Formula& a, const Formula& b);
std::optional<Label> blocked_subset(const TableauSet& g, Label x);  // 2b and 3b
std::optional<Label> blocked_3a(const TableauSet& g, Label z, Label x, const Formula& a);
std::optional<Label> blocked_3c(const TableauSet& g, Label z, Label x, const Formula& a);
std::optional<Label> blocked_4(const TableauSet& g, const Formula& a);

struct SaturationViolation {
  std::string clause;  // e.g. "T&", "F<<(iii)", "F[]x(ii)"
  std::string detail;
};
std::vector<SaturationViolation> is_saturated(const TableauSet& g);

// ---------------------------------------------------------------------------

class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DecideOptions {
  // 0 means automatic: 2^n + 16 for an input of size n, capped at 60000.
  std::size_t labelCap = 0;
  // Maximum number of branch points; 0 means unlimited.
  std::uint64_t nodeCap = 0;
  bool trace = false;
};

enum class Status { Closed, OpenSaturated };

struct Verdict {
  Status status = Status::Closed;
  std::optional<TableauSet> openSet;
  Label root = 0;
  std::size_t maxLabels = 0;  // largest label count of any explored set
  std::uint64_t nodes = 0;    // branch points explored
  std::vector<std::string> trace;
};

// Throws std::invalid_argument if f contains '~>' and ResourceLimit if a cap
// is exceeded.
Verdict decide(const Formula& f, const DecideOptions& opts = {});

}  // namespace csl

#endif  // CSL_TABLEAU_HPP_
