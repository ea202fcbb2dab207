// Schemata of valid formulas with the exhaustive formula corpus they are
// instantiated from. The cross-check harness compares the prover with the
// model oracle and confirms extracted models with the evaluator.

#ifndef CSL_SUITE_HPP_
#define CSL_SUITE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "csl/formula.hpp"
#include "csl/semantics.hpp"
#include "csl/tableau.hpp"

namespace csl {

// Metavariables are atoms named A, B, C, B1, B2, ... inside the templates.
// Rules carry a premise: whenever an instance of the premise is valid, the
// matching instance of the conclusion must be valid too.
struct Schema {
  std::string name;
  std::vector<std::string> metavars;
  Formula conclusion;
  std::optional<Formula> premise;

  bool is_rule() const { return premise.has_value(); }
  std::size_t arity() const { return metavars.size(); }
};

// Ax1..Ax6, T1..T5, T6.n and T7.n for n = 1..3, then Mon and R1.
std::vector<Schema> axiom_schemata();
std::optional<Schema> find_schema(const std::string& name);

Formula instantiate(const Formula& tmpl, const std::map<std::string, Formula>& sub);
Formula instantiate(const Schema& s, const std::vector<Formula>& args);

struct CorpusSpec {
  std::set<std::string> atoms{"p", "q"};
  std::size_t maxSize = 5;
  std::size_t maxSimDepth = 2;
};

// Every formula over the atoms, ⊥, ~, & and << within the bounds, once each,
// ordered by size and then by construction.
std::vector<Formula> generate_corpus(const CorpusSpec& spec);

using DecideFn = std::function<Verdict(const Formula&, const DecideOptions&)>;

// Truth of many schema instances over every model of a ModelSpace. The truth
// value of an instance at a world only depends on the extensions of the
// formulas plugged into it, so each model evaluates each distinct tuple of
// extensions once.
class ModelValidity {
 public:
  ModelValidity(const ModelSpace& space, std::vector<Formula> range);

  const std::vector<Formula>& range() const { return range_; }
  std::size_t model_count() const { return models_.size(); }

  // tuples[i][k] indexes range() for metavariable k. Entry i of the result
  // tells whether the instance is true at every world of every model.
  std::vector<bool> valid(const Formula& tmpl, const std::vector<std::string>& metavars,
                          const std::vector<std::vector<std::uint32_t>>& tuples) const;

 private:
  struct Classes {
    std::vector<std::uint8_t> of;           // class of each range formula
    std::vector<std::uint32_t> witness;     // a range formula per class
  };
  std::vector<Formula> range_;
  std::vector<PreferentialModel> models_;
  std::vector<Classes> classes_;
};

struct CrossResult {
  Formula formula;
  std::string verdict;  // CLOSED, OPEN or INCONCLUSIVE
  bool oracleSat = false;
  std::size_t oracleBound = 0;
  bool extractionVerified = false;
  std::size_t labels = 0;
  bool consistent = false;
  std::string issue;  // empty when consistent
  double millis = 0.0;
};

// decide(f) against oracle_sat(f, oracleBound) and, for an open verdict, the
// evaluator on the extracted model. Inconsistent when the oracle finds a
// model of a closed formula, when extraction of an open verdict fails or is
// not verified, when an extracted model within the bound was missed by the
// oracle, when more than 2^size labels were used, or when a cap was hit.
CrossResult crosscheck(const Formula& f, std::size_t oracleBound, const DecideOptions& opts = {},
                       const DecideFn& decideFn = {});

struct SuiteLine {
  std::string name;
  std::string formula;
  std::string verdict;
  std::string oracle;
  bool consistent = false;
  double millis = 0.0;
};

// "name, formula, verdict, oracle, consistent, millis". Without timing the
// last column is omitted so that repeated runs are byte-identical.
std::string format_line(const SuiteLine& line, bool timing = true);

struct SchemaRunOptions {
  std::set<std::string> atoms{"p", "q"};
  std::size_t metaSize = 3;      // metavariables range over formulas up to this size
  std::size_t wideMetaSize = 2;  // used instead for schemata of arity 4 or more
  std::size_t modelWorlds = 3;
  DecideOptions decideOptions;
  DecideFn decideFn;
};

// Checks every instance of s: proved by the engine and true in every model.
// For rules, instances whose premise is not proved are reported as vacuous.
std::vector<SuiteLine> check_schema(const Schema& s, const SchemaRunOptions& opts);

struct SuiteOptions {
  bool axioms = true;
  bool corpus = true;
  SchemaRunOptions schema;
  CorpusSpec corpusSpec;
  std::size_t oracleBound = 3;
  DecideOptions decideOptions;
  DecideFn decideFn;
};

struct SuiteSummary {
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::map<std::string, std::size_t> failuresByName;
};

SuiteSummary run_suite(const SuiteOptions& opts, const std::function<void(const SuiteLine&)>& sink);

}  // namespace csl

#endif  // CSL_SUITE_HPP_
