// Finite models for CSL: preferential models (one ranking per world) and
// distance minspace models, evaluation under both, the conversions between
// them, exhaustive model enumeration and the brute-force satisfiability
// oracle.

#ifndef CSL_SEMANTICS_HPP_
#define CSL_SEMANTICS_HPP_

#include <boost/dynamic_bitset.hpp>
#include <boost/rational.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "csl/formula.hpp"

namespace csl {

using World = std::size_t;
using WorldSet = boost::dynamic_bitset<>;
using Rational = boost::rational<std::int64_t>;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Valuation shared by both model kinds. Atoms absent from the map have an
// empty extension.
using Valuation = std::map<std::string, std::set<World>>;

// A CSL-preferential model. Each relation ≺_w is represented by a ranking
// r_w with y ≺_w z iff r_w(y) < r_w(z), which makes it modular by
// construction; the constructor enforces centering (r_w(w) = 0 and
// r_w(x) >= 1 for x != w). Finite domains give the Limit Assumption.
class PreferentialModel {
 public:
  PreferentialModel(std::vector<std::string> worlds, std::vector<std::vector<unsigned>> rank,
                    Valuation valuation);

  std::size_t size() const noexcept { return worlds_.size(); }
  const std::vector<std::string>& worlds() const noexcept { return worlds_; }
  const std::string& world_name(World w) const { return worlds_.at(w); }
  std::optional<World> find_world(std::string_view name) const;
  World world(std::string_view name) const;  // throws ModelError if unknown

  unsigned rank(World w, World x) const { return rank_[w][x]; }
  const std::vector<std::vector<unsigned>>& ranks() const noexcept { return rank_; }
  // y ≺_w z
  bool prefers(World w, World y, World z) const { return rank_[w][y] < rank_[w][z]; }

  const Valuation& valuation() const noexcept { return valuation_; }
  WorldSet extension(const std::string& atom) const;

 private:
  std::vector<std::string> worlds_;
  std::vector<std::vector<unsigned>> rank_;
  Valuation valuation_;
};

// A distance model over a finite domain. Finiteness makes every minspace
// condition hold; the constructor enforces (ID): d(x, y) = 0 iff x = y.
class DistanceMinspaceModel {
 public:
  DistanceMinspaceModel(std::vector<std::string> worlds, std::vector<std::vector<Rational>> dist,
                        Valuation valuation);

  std::size_t size() const noexcept { return worlds_.size(); }
  const std::vector<std::string>& worlds() const noexcept { return worlds_; }
  const std::string& world_name(World w) const { return worlds_.at(w); }
  std::optional<World> find_world(std::string_view name) const;
  World world(std::string_view name) const;

  const Rational& dist(World w, World x) const { return dist_[w][x]; }
  const std::vector<std::vector<Rational>>& distances() const noexcept { return dist_; }

  const Valuation& valuation() const noexcept { return valuation_; }
  WorldSet extension(const std::string& atom) const;

 private:
  std::vector<std::string> worlds_;
  std::vector<std::vector<Rational>> dist_;
  Valuation valuation_;
};

// Computes extensions over a fixed preferential model, caching them by
// formula node so repeated queries over shared subterms stay cheap.
class PrefEvaluator {
 public:
  explicit PrefEvaluator(const PreferentialModel& m) : m_(m) {}

  const WorldSet& extension(const Formula& f);
  bool holds(World w, const Formula& f) { return extension(f).test(w); }
  // x ∈ (□_w f): every y ≺_w x satisfies f.
  bool box(World w, World x, const Formula& f);

 private:
  const PreferentialModel& m_;
  std::unordered_map<const void*, WorldSet> cache_;
  std::vector<Formula> keep_;  // pins cached nodes
};

WorldSet extension_pref(const PreferentialModel& m, const Formula& f);
bool eval_pref(const PreferentialModel& m, World w, const Formula& f);
bool eval_box(const PreferentialModel& m, World w, World x, const Formula& f);

WorldSet extension_dist(const DistanceMinspaceModel& m, const Formula& f);
bool eval_dist(const DistanceMinspaceModel& m, World w, const Formula& f);

// Rankings by position among the distinct sorted distances of each row.
PreferentialModel dist_to_pref(const DistanceMinspaceModel& m);
// d(w, w) = 0 and d(w, x) = r_w(x) otherwise.
DistanceMinspaceModel pref_to_dist(const PreferentialModel& m);

// Raw enumeration of all preferential models over `atoms` with 1..maxWorlds
// worlds: every valuation and every ranking family with r_w(w) = 0 and
// r_w(x) in 1..n-1. Models are addressable by index so that the space can be
// sampled or partitioned. Worlds are named w0, w1, ...
class ModelSpace {
 public:
  ModelSpace(std::set<std::string> atoms, std::size_t maxWorlds);

  std::uint64_t size() const noexcept { return total_; }
  PreferentialModel at(std::uint64_t index) const;
  // Stops early when the visitor returns false.
  void for_each(const std::function<bool(const PreferentialModel&)>& visit) const;

  const std::vector<std::string>& atoms() const noexcept { return atoms_; }
  std::size_t max_worlds() const noexcept { return maxWorlds_; }

 private:
  std::vector<std::string> atoms_;
  std::size_t maxWorlds_;
  std::vector<std::uint64_t> perSize_;  // number of models with exactly n+1 worlds
  std::uint64_t total_ = 0;
};

struct SatWitness {
  PreferentialModel model;
  World world;
};

// satisfiable == false only means that no model up to `bound` worlds was
// found; it is not an unsatisfiability proof.
struct SatVerdict {
  bool satisfiable = false;
  std::size_t bound = 0;
  std::optional<SatWitness> witness;
};

SatVerdict oracle_sat(const Formula& f, std::size_t maxWorlds);

}  // namespace csl

#endif  // CSL_SEMANTICS_HPP_
