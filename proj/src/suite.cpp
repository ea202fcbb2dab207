#include "csl/suite.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

#include "csl/modelext.hpp"

namespace csl {

namespace {

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Formula mv(const std::string& n) { return Formula::atom(n); }

Formula sim(const Formula& a, const Formula& b) { return Formula::sim(a, b); }

Formula big_and(const std::vector<Formula>& fs) {
  Formula out = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) out = Formula::conj(out, fs[i]);
  return out;
}

Formula big_or(const std::vector<Formula>& fs) {
  Formula out = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) out = Formula::disj(out, fs[i]);
  return out;
}

Schema axiom(std::string name, std::vector<std::string> vars, Formula f) {
  return Schema{std::move(name), std::move(vars), std::move(f), std::nullopt};
}

// T6.n and T7.n share the antecedent (A << B1) & ... & (A << Bn).
std::pair<Schema, Schema> t6_t7(std::size_t n) {
  const Formula a = mv("A");
  std::vector<std::string> vars{"A"};
  std::vector<Formula> bs, prems, negs{a};
  for (std::size_t i = 1; i <= n; ++i) {
    vars.push_back("B" + std::to_string(i));
    bs.push_back(mv(vars.back()));
    prems.push_back(sim(a, bs.back()));
    negs.push_back(Formula::negate(bs.back()));
  }
  const Formula ante = big_and(prems), joined = big_or(bs);
  const std::string suffix = "." + std::to_string(n);
  return {axiom("T6" + suffix, vars, Formula::implies(ante, sim(a, joined))),
          axiom("T7" + suffix, vars, Formula::implies(ante, sim(big_and(negs), joined)))};
}

std::vector<Formula> meta_range(const std::set<std::string>& atoms, std::size_t size) {
  return generate_corpus(CorpusSpec{atoms, size, size});
}

Verdict run_decide(const DecideFn& fn, const Formula& f, const DecideOptions& opts) {
  return fn ? fn(f, opts) : decide(f, opts);
}

// Odometer over range^k.
std::vector<std::vector<std::uint32_t>> all_tuples(std::size_t rangeSize, std::size_t k) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> cur(k, 0);
  if (rangeSize == 0) return out;
  while (true) {
    out.push_back(cur);
    std::size_t i = 0;
    while (i < k && ++cur[i] == rangeSize) cur[i++] = 0;
    if (i == k) break;
  }
  return out;
}

}  // namespace

std::vector<Schema> axiom_schemata() {
  const Formula a = mv("A"), b = mv("B"), c = mv("C"), bot = Formula::bottom();
  using F = Formula;
  std::vector<Schema> out{
      axiom("Ax1", {"A", "B"}, F::disj(F::negate(sim(a, b)), F::negate(sim(b, a)))),
      axiom("Ax2", {"A", "B", "C"}, F::implies(sim(a, b), F::disj(sim(a, c), sim(c, b)))),
      axiom("Ax3", {"A", "B"}, F::implies(F::conj(a, F::negate(b)), sim(a, b))),
      axiom("Ax4", {"A", "B"}, F::implies(sim(a, b), F::negate(b))),
      axiom("Ax5", {"A", "B", "C"},
            F::implies(F::conj(sim(a, b), sim(a, c)), sim(a, F::disj(b, c)))),
      axiom("Ax6", {"A"},
            F::implies(sim(a, bot), F::negate(sim(F::negate(sim(a, bot)), bot)))),
      axiom("T1", {"A"}, F::implies(a, sim(a, bot))),
      axiom("T2", {"A"}, F::negate(sim(a, a))),
      axiom("T3", {"A"}, F::negate(sim(a, F::top()))),
      axiom("T4", {"A"}, F::implies(sim(sim(a, bot), bot), sim(a, bot))),
      axiom("T5", {"A", "B", "C"}, F::implies(F::conj(sim(a, b), sim(b, c)), sim(a, c))),
  };
  for (std::size_t n = 1; n <= 3; ++n) {
    auto [t6, t7] = t6_t7(n);
    out.push_back(std::move(t6));
    out.push_back(std::move(t7));
  }
  out.push_back(Schema{"Mon", {"A", "B", "C"}, F::implies(sim(a, c), sim(b, c)),
                       F::implies(a, b)});
  out.push_back(Schema{"R1", {"A", "B", "C"}, F::implies(sim(c, b), sim(c, a)),
                       F::implies(a, b)});
  return out;
}

std::optional<Schema> find_schema(const std::string& name) {
  for (auto& s : axiom_schemata()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

Formula instantiate(const Formula& t, const std::map<std::string, Formula>& sub) {
  switch (t.op()) {
    case Op::Atom: {
      auto it = sub.find(t.name());
      return it == sub.end() ? t : it->second;
    }
    case Op::Bottom:
      return t;
    case Op::Not:
      return Formula::negate(instantiate(t.operand(), sub));
    case Op::And:
      return Formula::conj(instantiate(t.lhs(), sub), instantiate(t.rhs(), sub));
    case Op::Sim:
      return Formula::sim(instantiate(t.lhs(), sub), instantiate(t.rhs(), sub));
    case Op::Cond:
      return Formula::cond(instantiate(t.lhs(), sub), instantiate(t.rhs(), sub));
  }
  throw std::logic_error("unknown operator");
}

Formula instantiate(const Schema& s, const std::vector<Formula>& args) {
  if (args.size() != s.arity()) {
    throw std::invalid_argument(s.name + " takes " + std::to_string(s.arity()) + " arguments");
  }
  std::map<std::string, Formula> sub;
  for (std::size_t i = 0; i < args.size(); ++i) sub.emplace(s.metavars[i], args[i]);
  return instantiate(s.conclusion, sub);
}

std::vector<Formula> generate_corpus(const CorpusSpec& spec) {
  if (spec.maxSize == 0) return {};
  std::vector<std::vector<Formula>> bySize(spec.maxSize + 1);
  for (const auto& a : spec.atoms) bySize[1].push_back(Formula::atom(a));
  bySize[1].push_back(Formula::bottom());
  std::vector<std::vector<std::size_t>> depth(spec.maxSize + 1);
  depth[1].assign(bySize[1].size(), 0);

  for (std::size_t n = 2; n <= spec.maxSize; ++n) {
    for (std::size_t i = 0; i < bySize[n - 1].size(); ++i) {
      bySize[n].push_back(Formula::negate(bySize[n - 1][i]));
      depth[n].push_back(depth[n - 1][i]);
    }
    for (std::size_t l = 1; l + 1 < n; ++l) {
      const std::size_t r = n - 1 - l;
      for (std::size_t i = 0; i < bySize[l].size(); ++i) {
        for (std::size_t j = 0; j < bySize[r].size(); ++j) {
          const std::size_t d = std::max(depth[l][i], depth[r][j]);
          bySize[n].push_back(Formula::conj(bySize[l][i], bySize[r][j]));
          depth[n].push_back(d);
          if (d + 1 <= spec.maxSimDepth) {
            bySize[n].push_back(Formula::sim(bySize[l][i], bySize[r][j]));
            depth[n].push_back(d + 1);
          }
        }
      }
    }
  }
  // Distinct (l, r, op) choices give distinct trees, so no duplicates arise;
  // the set below only guards that property.
  std::vector<Formula> out;
  std::set<Formula> seen;
  for (auto& level : bySize) {
    for (auto& f : level) {
      if (seen.insert(f).second) out.push_back(std::move(f));
    }
  }
  return out;
}

ModelValidity::ModelValidity(const ModelSpace& space, std::vector<Formula> range)
    : range_(std::move(range)) {
  if (space.max_worlds() > 8) throw std::invalid_argument("ModelValidity supports up to 8 worlds");
  space.for_each([&](const PreferentialModel& m) {
    Classes c;
    std::map<unsigned long, std::uint8_t> byMask;
    PrefEvaluator ev(m);
    for (std::uint32_t i = 0; i < range_.size(); ++i) {
      const unsigned long mask = ev.extension(range_[i]).to_ulong();
      auto [it, fresh] = byMask.emplace(mask, static_cast<std::uint8_t>(c.witness.size()));
      if (fresh) c.witness.push_back(i);
      c.of.push_back(it->second);
    }
    models_.push_back(m);
    classes_.push_back(std::move(c));
    return true;
  });
}

std::vector<bool> ModelValidity::valid(const Formula& tmpl, const std::vector<std::string>& metavars,
                                       const std::vector<std::vector<std::uint32_t>>& tuples) const {
  const std::size_t k = metavars.size();
  std::vector<bool> out(tuples.size(), true);
  std::vector<std::int8_t> cache;
  for (std::size_t mi = 0; mi < models_.size(); ++mi) {
    const auto& m = models_[mi];
    const auto& c = classes_[mi];
    const std::size_t d = c.witness.size();
    std::size_t cells = 1;
    for (std::size_t j = 0; j < k; ++j) cells *= d;
    cache.assign(cells, -1);
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      if (!out[i]) continue;
      std::size_t cell = 0;
      for (std::size_t j = k; j-- > 0;) cell = cell * d + c.of[tuples[i][j]];
      if (cache[cell] < 0) {
        std::map<std::string, Formula> sub;
        std::size_t rest = cell;
        for (std::size_t j = 0; j < k; ++j, rest /= d) {
          sub.emplace(metavars[j], range_[c.witness[rest % d]]);
        }
        cache[cell] = extension_pref(m, instantiate(tmpl, sub)).all() ? 1 : 0;
      }
      if (cache[cell] == 0) out[i] = false;
    }
  }
  return out;
}

CrossResult crosscheck(const Formula& f, std::size_t oracleBound, const DecideOptions& opts,
                       const DecideFn& decideFn) {
  const auto t0 = Clock::now();
  CrossResult r{f, "", false, oracleBound, false, 0, false, "", 0.0};
  const SatVerdict oracle = oracle_sat(f, oracleBound);
  r.oracleSat = oracle.satisfiable;

  std::optional<Verdict> v;
  try {
    v = run_decide(decideFn, f, opts);
  } catch (const ResourceLimit& e) {
    r.verdict = "INCONCLUSIVE";
    r.issue = e.what();
    r.millis = millis_since(t0);
    return r;
  }
  r.labels = v->maxLabels;
  r.verdict = v->status == Status::Closed ? "CLOSED" : "OPEN";

  std::string issue;
  if (f.size() < 63 && r.labels > (std::size_t{1} << f.size())) {
    issue = "used " + std::to_string(r.labels) + " labels, more than 2^size";
  }
  if (v->status == Status::Closed) {
    if (r.oracleSat) issue = "oracle found a model of a formula the prover closed";
  } else if (!v->openSet) {
    issue = "open verdict without an open set";
  } else {
    try {
      const auto rep = extract(*v->openSet, v->root, f);
      r.extractionVerified = rep.verified;
      if (!rep.verified) {
        issue = "extracted model does not satisfy the formula";
      } else if (rep.model.size() <= oracleBound && !r.oracleSat) {
        issue = "oracle missed a model within its bound";
      }
    } catch (const std::exception& e) {
      issue = std::string("extraction failed: ") + e.what();
    }
  }
  r.issue = issue;
  r.consistent = issue.empty();
  r.millis = millis_since(t0);
  return r;
}

std::string format_line(const SuiteLine& l, bool timing) {
  std::string out = l.name + ", " + l.formula + ", " + l.verdict + ", " + l.oracle + ", " +
                    (l.consistent ? "true" : "false");
  if (timing) {
    char buf[32];
    std::snprintf(buf, sizeof buf, ", %.3f", l.millis);
    out += buf;
  }
  return out;
}

std::vector<SuiteLine> check_schema(const Schema& s, const SchemaRunOptions& opts) {
  const std::size_t size = s.arity() >= 4 ? opts.wideMetaSize : opts.metaSize;
  const ModelValidity models(ModelSpace(opts.atoms, opts.modelWorlds), meta_range(opts.atoms, size));
  const auto& range = models.range();
  const auto tuples = all_tuples(range.size(), s.arity());
  const auto modelValid = models.valid(s.conclusion, s.metavars, tuples);
  std::vector<bool> premiseModelValid;
  if (s.premise) premiseModelValid = models.valid(*s.premise, s.metavars, tuples);

  std::unordered_map<Formula, bool, FormulaHash> premiseProved;
  std::vector<SuiteLine> lines;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    std::map<std::string, Formula> sub;
    for (std::size_t j = 0; j < s.arity(); ++j) sub.emplace(s.metavars[j], range[tuples[i][j]]);
    const auto t0 = Clock::now();
    const Formula inst = instantiate(s.conclusion, sub);
    SuiteLine line{s.name, to_string(inst), "", modelValid[i] ? "VALID" : "FALSIFIED", false, 0};
    try {
      if (s.premise) {
        const Formula prem = instantiate(*s.premise, sub);
        auto it = premiseProved.find(prem);
        if (it == premiseProved.end()) {
          const bool proved = run_decide(opts.decideFn, Formula::negate(prem), opts.decideOptions)
                                  .status == Status::Closed;
          it = premiseProved.emplace(prem, proved).first;
        }
        if (!it->second) continue;  // premise not valid: nothing to check
        line.formula = to_string(prem) + " => " + line.formula;
        if (!premiseModelValid[i]) line.oracle = "PREMISE-FALSIFIED";
      }
      const bool proved =
          run_decide(opts.decideFn, Formula::negate(inst), opts.decideOptions).status ==
          Status::Closed;
      line.verdict = proved ? "VALID" : "INVALID";
      line.consistent = proved && line.oracle == "VALID";
    } catch (const ResourceLimit&) {
      line.verdict = "INCONCLUSIVE";
    }
    line.millis = millis_since(t0);
    lines.push_back(std::move(line));
  }
  return lines;
}

SuiteSummary run_suite(const SuiteOptions& opts, const std::function<void(const SuiteLine&)>& sink) {
  SuiteSummary sum;
  auto record = [&](const SuiteLine& l) {
    ++sum.checks;
    if (!l.consistent) {
      ++sum.failures;
      ++sum.failuresByName[l.name];
    }
    if (sink) sink(l);
  };
  if (opts.axioms) {
    SchemaRunOptions so = opts.schema;
    if (!so.decideFn) so.decideFn = opts.decideFn;
    for (const auto& s : axiom_schemata()) {
      for (const auto& l : check_schema(s, so)) record(l);
    }
  }
  if (opts.corpus) {
    const std::string bound = "NONE<=" + std::to_string(opts.oracleBound);
    for (const auto& f : generate_corpus(opts.corpusSpec)) {
      const auto r = crosscheck(f, opts.oracleBound, opts.decideOptions, opts.decideFn);
      record(SuiteLine{"corpus", to_string(f), r.verdict, r.oracleSat ? "SAT" : bound,
                       r.consistent, r.millis});
    }
  }
  return sum;
}

}  // namespace csl
