// Formula AST for the logic of comparative concept similarity.
//
// The core language has atoms, bottom, negation, conjunction and the
// comparative similarity connective `A << B` ("closer to A than to B").
// The conditional `A ~> B` is carried only so that the two connectives can
// be translated into one another; the tableau engine rejects it.
//
// Derived connectives (true, |, ->, <->) are desugared at construction time
// and never appear as nodes.

#ifndef CSL_FORMULA_HPP_
#define CSL_FORMULA_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace csl {

enum class Op : std::uint8_t { Atom, Bottom, Not, And, Sim, Cond };

class Formula {
 public:
  static Formula atom(std::string name);
  static Formula bottom();
  static Formula negate(Formula f);
  static Formula conj(Formula a, Formula b);
  static Formula sim(Formula a, Formula b);
  static Formula cond(Formula a, Formula b);

  // Sugar, expanded immediately.
  static Formula top();                       // ~false
  static Formula disj(Formula a, Formula b);  // ~(~a & ~b)
  static Formula implies(Formula a, Formula b);  // ~(a & ~b)
  static Formula iff(Formula a, Formula b);   // (a -> b) & (b -> a)

  Op op() const noexcept { return node_->op; }
  bool is(Op o) const noexcept { return node_->op == o; }

  // Atom name; empty for every other node.
  const std::string& name() const noexcept { return node_->name; }
  // Operand of Not, left operand of binary nodes.
  Formula lhs() const;
  Formula rhs() const;
  Formula operand() const { return lhs(); }

  std::size_t size() const noexcept { return node_->size; }
  std::size_t hash() const noexcept { return node_->hash; }

  // Stable identity of the shared node; equal formulas may still differ here.
  const void* identity() const noexcept { return node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b);
  // Total order: by size, then operator, then atom name, then children.
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);

 private:
  struct Node {
    Op op;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
    std::size_t size = 1;
    std::size_t hash = 0;
  };

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula make(Op op, std::string name, std::shared_ptr<const Node> l,
                      std::shared_ptr<const Node> r);

  std::shared_ptr<const Node> node_;
};

struct FormulaHash {
  std::size_t operator()(const Formula& f) const noexcept { return f.hash(); }
};

struct FormulaMeasures {
  std::size_t size = 0;
  std::size_t simDepth = 0;
  std::set<std::string> atoms;
};

FormulaMeasures measure(const Formula& f);
std::size_t sim_depth(const Formula& f);
std::set<std::string> atoms_of(const Formula& f);
bool contains_op(const Formula& f, Op op);

// Identifiers: [A-Za-z_][A-Za-z0-9_]*, excluding the keywords true/false.
bool is_identifier(std::string_view s) noexcept;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what), position_(position) {}
  // Byte offset into the input.
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

Formula parse(std::string_view text);

// Concrete syntax. Disjunction shapes ~(~a & ~b) print as `a | b` and ~false
// prints as `true`; both re-parse to the same tree.
std::string to_string(const Formula& f);
std::ostream& operator<<(std::ostream& os, const Formula& f);
// Parenthesized unless f prints as an atom, a constant or a negation.
std::string to_operand_string(const Formula& f);

// A ~> B  ==  (A << (A & ~B)) | ~(A << false), applied bottom-up.
Formula cond_to_csl(const Formula& f);
// A << B  ==  ((A | B) ~> A) & (A ~> ~B) & ~(A ~> false), applied bottom-up.
Formula csl_to_cond(const Formula& f);

}  // namespace csl

template <>
struct std::hash<csl::Formula> {
  std::size_t operator()(const csl::Formula& f) const noexcept { return f.hash(); }
};

#endif  // CSL_FORMULA_HPP_
