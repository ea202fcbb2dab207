#include "csl/semantics.hpp"

#include <algorithm>
#include <limits>

namespace csl {

namespace {

std::optional<World> find_in(const std::vector<std::string>& worlds, std::string_view name) {
  auto it = std::find(worlds.begin(), worlds.end(), name);
  if (it == worlds.end()) return std::nullopt;
  return static_cast<World>(it - worlds.begin());
}

void check_worlds(const std::vector<std::string>& worlds, const Valuation& val) {
  if (worlds.empty()) throw ModelError("model must have at least one world");
  std::set<std::string> seen;
  for (const auto& w : worlds) {
    if (!seen.insert(w).second) throw ModelError("duplicate world '" + w + "'");
  }
  for (const auto& [atom, ws] : val) {
    for (World w : ws) {
      if (w >= worlds.size()) {
        throw ModelError("valuation of '" + atom + "' refers to world index out of range");
      }
    }
  }
}

WorldSet atom_ext(const Valuation& val, std::size_t n, const std::string& atom) {
  WorldSet out(n);
  if (auto it = val.find(atom); it != val.end()) {
    for (World w : it->second) out.set(w);
  }
  return out;
}

// Per-world comparison key: rank for preferential models, distance for
// distance models. w ∈ A << B iff min_{x∈A} key_w(x) < min_{y∈B} key_w(y),
// with the minimum over an empty set taken as infinite.
template <typename Model>
struct Keyed;

template <>
struct Keyed<PreferentialModel> {
  using Key = unsigned;
  static Key key(const PreferentialModel& m, World w, World x) { return m.rank(w, x); }
};

template <>
struct Keyed<DistanceMinspaceModel> {
  using Key = Rational;
  static Key key(const DistanceMinspaceModel& m, World w, World x) { return m.dist(w, x); }
};

template <typename Model>
WorldSet compose(const Model& m, Op op, const WorldSet& a, const WorldSet& b) {
  using K = Keyed<Model>;
  const std::size_t n = m.size();
  WorldSet out(n);
  for (World w = 0; w < n; ++w) {
    std::optional<typename K::Key> minA, minB;
    for (World x = a.find_first(); x != WorldSet::npos; x = a.find_next(x)) {
      auto k = K::key(m, w, x);
      if (!minA || k < *minA) minA = k;
    }
    if (op == Op::Sim) {
      if (!minA) continue;
      for (World y = b.find_first(); y != WorldSet::npos; y = b.find_next(y)) {
        auto k = K::key(m, w, y);
        if (!minB || k < *minB) minB = k;
      }
      if (!minB || *minA < *minB) out.set(w);
    } else {
      // Cond: every closest A-world is a B-world.
      bool ok = true;
      if (minA) {
        for (World x = a.find_first(); x != WorldSet::npos && ok; x = a.find_next(x)) {
          if (K::key(m, w, x) == *minA && !b.test(x)) ok = false;
        }
      }
      if (ok) out.set(w);
    }
  }
  return out;
}

template <typename Model>
class Evaluation {
 public:
  explicit Evaluation(const Model& m) : m_(m) {}

  const WorldSet& ext(const Formula& f) {
    if (auto it = cache_.find(f.identity()); it != cache_.end()) return it->second;
    WorldSet out;
    switch (f.op()) {
      case Op::Atom:
        out = m_.extension(f.name());
        break;
      case Op::Bottom:
        out = WorldSet(m_.size());
        break;
      case Op::Not:
        out = ~ext(f.operand());
        break;
      case Op::And:
        out = ext(f.lhs()) & ext(f.rhs());
        break;
      case Op::Sim:
      case Op::Cond: {
        const WorldSet a = ext(f.lhs());
        out = compose(m_, f.op(), a, ext(f.rhs()));
        break;
      }
    }
    keep_.push_back(f);
    return cache_.emplace(f.identity(), std::move(out)).first->second;
  }

 private:
  const Model& m_;
  std::unordered_map<const void*, WorldSet> cache_;
  std::vector<Formula> keep_;
};

}  // namespace

// ---------------------------------------------------------------------------

PreferentialModel::PreferentialModel(std::vector<std::string> worlds,
                                     std::vector<std::vector<unsigned>> rank, Valuation valuation)
    : worlds_(std::move(worlds)), rank_(std::move(rank)), valuation_(std::move(valuation)) {
  check_worlds(worlds_, valuation_);
  const std::size_t n = worlds_.size();
  if (rank_.size() != n) throw ModelError("ranking table must have one row per world");
  for (World w = 0; w < n; ++w) {
    if (rank_[w].size() != n) throw ModelError("ranking row of '" + worlds_[w] + "' is incomplete");
    if (rank_[w][w] != 0) {
      throw ModelError("centering violated: r_" + worlds_[w] + "(" + worlds_[w] + ") != 0");
    }
    for (World x = 0; x < n; ++x) {
      if (x != w && rank_[w][x] == 0) {
        throw ModelError("centering violated: r_" + worlds_[w] + "(" + worlds_[x] + ") = 0");
      }
    }
  }
}

std::optional<World> PreferentialModel::find_world(std::string_view name) const {
  return find_in(worlds_, name);
}

World PreferentialModel::world(std::string_view name) const {
  if (auto w = find_world(name)) return *w;
  throw ModelError("unknown world '" + std::string(name) + "'");
}

WorldSet PreferentialModel::extension(const std::string& atom) const {
  return atom_ext(valuation_, size(), atom);
}

DistanceMinspaceModel::DistanceMinspaceModel(std::vector<std::string> worlds,
                                             std::vector<std::vector<Rational>> dist,
                                             Valuation valuation)
    : worlds_(std::move(worlds)), dist_(std::move(dist)), valuation_(std::move(valuation)) {
  check_worlds(worlds_, valuation_);
  const std::size_t n = worlds_.size();
  if (dist_.size() != n) throw ModelError("distance table must have one row per world");
  for (World w = 0; w < n; ++w) {
    if (dist_[w].size() != n) throw ModelError("distance row of '" + worlds_[w] + "' is incomplete");
    for (World x = 0; x < n; ++x) {
      const Rational& d = dist_[w][x];
      if (d < Rational(0)) throw ModelError("negative distance from '" + worlds_[w] + "'");
      if ((d == Rational(0)) != (w == x)) {
        throw ModelError("(ID) violated between '" + worlds_[w] + "' and '" + worlds_[x] + "'");
      }
    }
  }
}

std::optional<World> DistanceMinspaceModel::find_world(std::string_view name) const {
  return find_in(worlds_, name);
}

World DistanceMinspaceModel::world(std::string_view name) const {
  if (auto w = find_world(name)) return *w;
  throw ModelError("unknown world '" + std::string(name) + "'");
}

WorldSet DistanceMinspaceModel::extension(const std::string& atom) const {
  return atom_ext(valuation_, size(), atom);
}

// ---------------------------------------------------------------------------

const WorldSet& PrefEvaluator::extension(const Formula& f) {
  if (auto it = cache_.find(f.identity()); it != cache_.end()) return it->second;
  WorldSet out;
  switch (f.op()) {
    case Op::Atom:
      out = m_.extension(f.name());
      break;
    case Op::Bottom:
      out = WorldSet(m_.size());
      break;
    case Op::Not:
      out = ~extension(f.operand());
      break;
    case Op::And:
      out = extension(f.lhs()) & extension(f.rhs());
      break;
    case Op::Sim:
    case Op::Cond: {
      const WorldSet a = extension(f.lhs());
      out = compose(m_, f.op(), a, extension(f.rhs()));
      break;
    }
  }
  keep_.push_back(f);
  return cache_.emplace(f.identity(), std::move(out)).first->second;
}

bool PrefEvaluator::box(World w, World x, const Formula& f) {
  const WorldSet& e = extension(f);
  for (World y = 0; y < m_.size(); ++y) {
    if (m_.prefers(w, y, x) && !e.test(y)) return false;
  }
  return true;
}

namespace {

void check_world(std::size_t n, World w) {
  if (w >= n) throw ModelError("world index " + std::to_string(w) + " out of range");
}

}  // namespace

WorldSet extension_pref(const PreferentialModel& m, const Formula& f) {
  return Evaluation<PreferentialModel>(m).ext(f);
}

bool eval_pref(const PreferentialModel& m, World w, const Formula& f) {
  check_world(m.size(), w);
  return extension_pref(m, f).test(w);
}

bool eval_box(const PreferentialModel& m, World w, World x, const Formula& f) {
  check_world(m.size(), w);
  check_world(m.size(), x);
  PrefEvaluator ev(m);
  return ev.box(w, x, f);
}

WorldSet extension_dist(const DistanceMinspaceModel& m, const Formula& f) {
  return Evaluation<DistanceMinspaceModel>(m).ext(f);
}

bool eval_dist(const DistanceMinspaceModel& m, World w, const Formula& f) {
  check_world(m.size(), w);
  return extension_dist(m, f).test(w);
}

// ---------------------------------------------------------------------------

PreferentialModel dist_to_pref(const DistanceMinspaceModel& m) {
  const std::size_t n = m.size();
  std::vector<std::vector<unsigned>> rank(n, std::vector<unsigned>(n, 0));
  for (World w = 0; w < n; ++w) {
    std::vector<Rational> levels(m.distances()[w]);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (World x = 0; x < n; ++x) {
      auto it = std::lower_bound(levels.begin(), levels.end(), m.dist(w, x));
      rank[w][x] = static_cast<unsigned>(it - levels.begin());
    }
  }
  return PreferentialModel(m.worlds(), std::move(rank), m.valuation());
}

DistanceMinspaceModel pref_to_dist(const PreferentialModel& m) {
  const std::size_t n = m.size();
  std::vector<std::vector<Rational>> dist(n, std::vector<Rational>(n, Rational(0)));
  for (World w = 0; w < n; ++w) {
    for (World x = 0; x < n; ++x) {
      if (x == w) continue;
      if (m.rank(w, x) == 0) throw ModelError("centering violated; cannot build a distance");
      dist[w][x] = Rational(m.rank(w, x));
    }
  }
  return DistanceMinspaceModel(m.worlds(), std::move(dist), m.valuation());
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kMax / a) throw std::overflow_error("model space too large to index");
  return a * b;
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

std::uint64_t rankings_per_world(std::size_t n) { return checked_pow(n - 1, n - 1); }

}  // namespace

ModelSpace::ModelSpace(std::set<std::string> atoms, std::size_t maxWorlds)
    : atoms_(atoms.begin(), atoms.end()), maxWorlds_(maxWorlds) {
  if (maxWorlds == 0) throw std::invalid_argument("maxWorlds must be at least 1");
  for (std::size_t n = 1; n <= maxWorlds; ++n) {
    const std::uint64_t vals = checked_pow(2, n * atoms_.size());
    const std::uint64_t ranks = checked_pow(rankings_per_world(n), n);
    const std::uint64_t count = checked_mul(vals, ranks);
    if (total_ > kMax - count) throw std::overflow_error("model space too large to index");
    perSize_.push_back(count);
    total_ += count;
  }
}

PreferentialModel ModelSpace::at(std::uint64_t index) const {
  if (index >= total_) throw std::out_of_range("model index out of range");
  std::size_t n = 1;
  for (std::uint64_t c : perSize_) {
    if (index < c) break;
    index -= c;
    ++n;
  }
  const std::uint64_t vals = std::uint64_t{1} << (n * atoms_.size());
  std::uint64_t valIdx = index % vals;
  std::uint64_t rankIdx = index / vals;

  std::vector<std::string> worlds;
  for (std::size_t w = 0; w < n; ++w) worlds.push_back("w" + std::to_string(w));

  Valuation val;
  for (std::size_t a = 0; a < atoms_.size(); ++a) {
    std::set<World> ws;
    for (World w = 0; w < n; ++w) {
      if (valIdx >> (a * n + w) & 1U) ws.insert(w);
    }
    if (!ws.empty()) val.emplace(atoms_[a], std::move(ws));
  }

  std::vector<std::vector<unsigned>> rank(n, std::vector<unsigned>(n, 0));
  if (n > 1) {
    const std::uint64_t base = n - 1;
    const std::uint64_t perWorld = rankings_per_world(n);
    for (World w = 0; w < n; ++w) {
      std::uint64_t digits = rankIdx % perWorld;
      rankIdx /= perWorld;
      for (World x = 0; x < n; ++x) {
        if (x == w) continue;
        rank[w][x] = static_cast<unsigned>(digits % base) + 1;
        digits /= base;
      }
    }
  }
  return PreferentialModel(std::move(worlds), std::move(rank), std::move(val));
}

void ModelSpace::for_each(const std::function<bool(const PreferentialModel&)>& visit) const {
  for (std::uint64_t i = 0; i < total_; ++i) {
    if (!visit(at(i))) return;
  }
}

SatVerdict oracle_sat(const Formula& f, std::size_t maxWorlds) {
  if (contains_op(f, Op::Cond)) {
    throw std::invalid_argument("oracle_sat expects a formula without '~>'; translate it first");
  }
  SatVerdict verdict;
  verdict.bound = maxWorlds;
  ModelSpace space(atoms_of(f), maxWorlds);
  space.for_each([&](const PreferentialModel& m) {
    WorldSet e = extension_pref(m, f);
    if (e.none()) return true;
    verdict.satisfiable = true;
    verdict.witness = SatWitness{m, e.find_first()};
    return false;
  });
  return verdict;
}

}  // namespace csl
