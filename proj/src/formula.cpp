#include "csl/formula.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <unordered_map>
#include <vector>

namespace csl {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Formula Formula::make(Op op, std::string name, std::shared_ptr<const Node> l,
                      std::shared_ptr<const Node> r) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->size = 1 + (l ? l->size : 0) + (r ? r->size : 0);
  std::size_t h = mix(0x51ed27u, static_cast<std::size_t>(op));
  if (op == Op::Atom) h = mix(h, std::hash<std::string>{}(name));
  if (l) h = mix(h, l->hash);
  if (r) h = mix(h, r->hash);
  n->hash = h;
  n->name = std::move(name);
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return Formula(std::move(n));
}

Formula Formula::atom(std::string name) {
  if (!is_identifier(name)) {
    throw std::invalid_argument("invalid atom name '" + name + "'");
  }
  return make(Op::Atom, std::move(name), nullptr, nullptr);
}

Formula Formula::bottom() {
  static const Formula b = make(Op::Bottom, {}, nullptr, nullptr);
  return b;
}

Formula Formula::negate(Formula f) { return make(Op::Not, {}, std::move(f.node_), nullptr); }

Formula Formula::conj(Formula a, Formula b) {
  return make(Op::And, {}, std::move(a.node_), std::move(b.node_));
}

Formula Formula::sim(Formula a, Formula b) {
  return make(Op::Sim, {}, std::move(a.node_), std::move(b.node_));
}

Formula Formula::cond(Formula a, Formula b) {
  return make(Op::Cond, {}, std::move(a.node_), std::move(b.node_));
}

Formula Formula::top() { return negate(bottom()); }

Formula Formula::disj(Formula a, Formula b) {
  return negate(conj(negate(std::move(a)), negate(std::move(b))));
}

Formula Formula::implies(Formula a, Formula b) {
  return negate(conj(std::move(a), negate(std::move(b))));
}

Formula Formula::iff(Formula a, Formula b) { return conj(implies(a, b), implies(b, a)); }

Formula Formula::lhs() const {
  if (!node_->lhs) throw std::logic_error("formula has no operand");
  return Formula(node_->lhs);
}

Formula Formula::rhs() const {
  if (!node_->rhs) throw std::logic_error("formula has no right operand");
  return Formula(node_->rhs);
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->hash != b.node_->hash || a.node_->size != b.node_->size ||
      a.node_->op != b.node_->op || a.node_->name != b.node_->name) {
    return false;
  }
  if (a.node_->lhs && !(Formula(a.node_->lhs) == Formula(b.node_->lhs))) return false;
  if (a.node_->rhs && !(Formula(a.node_->rhs) == Formula(b.node_->rhs))) return false;
  return true;
}

std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.node_->size <=> b.node_->size; c != 0) return c;
  if (auto c = a.node_->op <=> b.node_->op; c != 0) return c;
  if (auto c = a.node_->name.compare(b.node_->name); c != 0) {
    return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  if (a.node_->lhs) {
    if (auto c = Formula(a.node_->lhs) <=> Formula(b.node_->lhs); c != 0) return c;
  }
  if (a.node_->rhs) {
    if (auto c = Formula(a.node_->rhs) <=> Formula(b.node_->rhs); c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::size_t sim_depth(const Formula& f) {
  switch (f.op()) {
    case Op::Atom:
    case Op::Bottom:
      return 0;
    case Op::Not:
      return sim_depth(f.operand());
    case Op::And:
    case Op::Cond:
      return std::max(sim_depth(f.lhs()), sim_depth(f.rhs()));
    case Op::Sim:
      return 1 + std::max(sim_depth(f.lhs()), sim_depth(f.rhs()));
  }
  return 0;
}

namespace {

void collect_atoms(const Formula& f, std::set<std::string>& out) {
  switch (f.op()) {
    case Op::Atom:
      out.insert(f.name());
      return;
    case Op::Bottom:
      return;
    case Op::Not:
      collect_atoms(f.operand(), out);
      return;
    default:
      collect_atoms(f.lhs(), out);
      collect_atoms(f.rhs(), out);
  }
}

}  // namespace

std::set<std::string> atoms_of(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

FormulaMeasures measure(const Formula& f) { return {f.size(), sim_depth(f), atoms_of(f)}; }

bool contains_op(const Formula& f, Op op) {
  if (f.op() == op) return true;
  switch (f.op()) {
    case Op::Atom:
    case Op::Bottom:
      return false;
    case Op::Not:
      return contains_op(f.operand(), op);
    default:
      return contains_op(f.lhs(), op) || contains_op(f.rhs(), op);
  }
}

bool is_identifier(std::string_view s) noexcept {
  if (s.empty() || s == "true" || s == "false") return false;
  auto alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  if (!alpha(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) {
    return alpha(c) || std::isdigit(static_cast<unsigned char>(c));
  });
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Not, And, Or, Imp, Iff, Sim, Cond, LParen, RParen, True, False, Ident, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto starts = [&](std::string_view p) { return s.substr(i, p.size()) == p; };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t at = i;
    auto emit = [&](Tok k, std::size_t len) {
      out.push_back({k, std::string(s.substr(at, len)), at});
      i += len;
    };
    if (starts("<->")) {
      emit(Tok::Iff, 3);
    } else if (starts("<<")) {
      emit(Tok::Sim, 2);
    } else if (starts("->")) {
      emit(Tok::Imp, 2);
    } else if (starts("~>")) {
      emit(Tok::Cond, 2);
    } else if (c == '~' || c == '!') {
      emit(Tok::Not, 1);
    } else if (c == '&') {
      emit(Tok::And, 1);
    } else if (c == '|') {
      emit(Tok::Or, 1);
    } else if (c == '(') {
      emit(Tok::LParen, 1);
    } else if (c == ')') {
      emit(Tok::RParen, 1);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      std::string word(s.substr(i, j - i));
      Tok k = word == "true" ? Tok::True : word == "false" ? Tok::False : Tok::Ident;
      emit(k, j - i);
    } else {
      std::size_t len = 1;
      // Report a whole UTF-8 sequence rather than a stray continuation byte.
      if (static_cast<unsigned char>(c) >= 0xC0) {
        while (at + len < s.size() && (static_cast<unsigned char>(s[at + len]) & 0xC0) == 0x80) ++len;
      }
      throw ParseError("unknown token '" + std::string(s.substr(at, len)) + "' at position " +
                           std::to_string(at),
                       at);
    }
  }
  out.push_back({Tok::End, {}, s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Formula parse_all() {
    Formula f = iff();
    if (peek().kind == Tok::RParen) {
      throw ParseError("unbalanced parentheses: unexpected ')' at position " +
                           std::to_string(peek().pos),
                       peek().pos);
    }
    if (peek().kind == Tok::Sim || peek().kind == Tok::Cond) {
      throw ParseError("'<<' and '~>' are non-associative; parenthesize the chain at position " +
                           std::to_string(peek().pos),
                       peek().pos);
    }
    if (peek().kind != Tok::End) unexpected();
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void unexpected() const {
    throw ParseError("unexpected " + describe(peek()) + " at position " + std::to_string(peek().pos),
                     peek().pos);
  }

  Formula iff() {
    Formula f = imp();
    while (accept(Tok::Iff)) f = Formula::iff(f, imp());
    return f;
  }

  Formula imp() {
    Formula f = sim();
    if (accept(Tok::Imp)) return Formula::implies(f, imp());
    return f;
  }

  Formula sim() {
    Formula f = disj();
    if (accept(Tok::Sim)) return Formula::sim(f, disj());
    if (accept(Tok::Cond)) return Formula::cond(f, disj());
    return f;
  }

  Formula disj() {
    Formula f = conj();
    while (accept(Tok::Or)) f = Formula::disj(f, conj());
    return f;
  }

  Formula conj() {
    Formula f = unary();
    while (accept(Tok::And)) f = Formula::conj(f, unary());
    return f;
  }

  Formula unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Not:
        next();
        return Formula::negate(unary());
      case Tok::LParen: {
        const std::size_t open = t.pos;
        next();
        Formula f = iff();
        if (!accept(Tok::RParen)) {
          if (peek().kind == Tok::End) {
            throw ParseError("unbalanced parentheses: '(' at position " + std::to_string(open) +
                                 " is never closed",
                             open);
          }
          if (peek().kind == Tok::Sim || peek().kind == Tok::Cond) {
            throw ParseError(
                "'<<' and '~>' are non-associative; parenthesize the chain at position " +
                    std::to_string(peek().pos),
                peek().pos);
          }
          unexpected();
        }
        return f;
      }
      case Tok::True:
        next();
        return Formula::top();
      case Tok::False:
        next();
        return Formula::bottom();
      case Tok::Ident:
        next();
        return Formula::atom(t.text);
      default:
        unexpected();
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse(std::string_view text) { return Parser(lex(text)).parse_all(); }

// ---------------------------------------------------------------------------
// Printer

namespace {

bool is_disjunction(const Formula& f) {
  if (!f.is(Op::Not)) return false;
  Formula c = f.operand();
  return c.is(Op::And) && c.lhs().is(Op::Not) && c.rhs().is(Op::Not);
}

// True when the formula has no binary connective at the top, so it needs no
// parentheses as an operand.
bool is_tight(const Formula& f) {
  return f.is(Op::Atom) || f.is(Op::Bottom) || (f.is(Op::Not) && !is_disjunction(f));
}

void print(const Formula& f, std::string& out);

void print_operand(const Formula& f, std::string& out) {
  if (is_tight(f)) {
    print(f, out);
  } else {
    out += '(';
    print(f, out);
    out += ')';
  }
}

void print_binary(const Formula& f, const char* op, std::string& out) {
  print_operand(f.lhs(), out);
  out += op;
  print_operand(f.rhs(), out);
}

void print(const Formula& f, std::string& out) {
  switch (f.op()) {
    case Op::Atom:
      out += f.name();
      return;
    case Op::Bottom:
      out += "false";
      return;
    case Op::Not: {
      Formula c = f.operand();
      if (c.is(Op::Bottom)) {
        out += "true";
      } else if (is_disjunction(f)) {
        print_operand(c.lhs().operand(), out);
        out += " | ";
        print_operand(c.rhs().operand(), out);
      } else {
        out += '~';
        print_operand(c, out);
      }
      return;
    }
    case Op::And:
      print_binary(f, " & ", out);
      return;
    case Op::Sim:
      print_binary(f, " << ", out);
      return;
    case Op::Cond:
      print_binary(f, " ~> ", out);
      return;
  }
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

std::ostream& operator<<(std::ostream& os, const Formula& f) { return os << to_string(f); }

std::string to_operand_string(const Formula& f) {
  std::string out;
  print_operand(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Translations

namespace {

// Memoized on node identity so shared subterms are translated once.
template <typename Step>
Formula rewrite(const Formula& f, std::unordered_map<const void*, Formula>& memo, Step step) {
  if (auto it = memo.find(f.identity()); it != memo.end()) return it->second;
  Formula out = f;
  switch (f.op()) {
    case Op::Atom:
    case Op::Bottom:
      break;
    case Op::Not:
      out = Formula::negate(rewrite(f.operand(), memo, step));
      break;
    case Op::And:
      out = Formula::conj(rewrite(f.lhs(), memo, step), rewrite(f.rhs(), memo, step));
      break;
    case Op::Sim:
    case Op::Cond:
      out = step(f.op(), rewrite(f.lhs(), memo, step), rewrite(f.rhs(), memo, step));
      break;
  }
  memo.emplace(f.identity(), out);
  return out;
}

}  // namespace

Formula cond_to_csl(const Formula& f) {
  std::unordered_map<const void*, Formula> memo;
  return rewrite(f, memo, [](Op op, const Formula& a, const Formula& b) {
    if (op == Op::Sim) return Formula::sim(a, b);
    return Formula::disj(Formula::sim(a, Formula::conj(a, Formula::negate(b))),
                         Formula::negate(Formula::sim(a, Formula::bottom())));
  });
}

Formula csl_to_cond(const Formula& f) {
  std::unordered_map<const void*, Formula> memo;
  return rewrite(f, memo, [](Op op, const Formula& a, const Formula& b) {
    if (op == Op::Cond) return Formula::cond(a, b);
    return Formula::conj(Formula::conj(Formula::cond(Formula::disj(a, b), a),
                                       Formula::cond(a, Formula::negate(b))),
                         Formula::negate(Formula::cond(a, Formula::bottom())));
  });
}

}  // namespace csl
