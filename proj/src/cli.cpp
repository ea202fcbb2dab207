#include "csl/cli.hpp"

#include <algorithm>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "csl/model_io.hpp"
#include "csl/modelext.hpp"
#include "csl/suite.hpp"

namespace csl::cli {

namespace {

using nlohmann::ordered_json;

struct Config {
  std::string formula;
  std::string direction;
  std::string modelPath;
  std::string world;
  std::size_t oracleBound = 3;
  std::size_t labelCap = 0;
  bool trace = false;
  bool json = false;
  bool satMode = false;
  bool withOracle = false;
  // suite
  std::size_t maxSize = 5;
  std::size_t maxSimDepth = 2;
  std::size_t metaSize = 3;
  std::size_t wideMetaSize = 2;
  std::vector<std::string> schemas;
  bool noAxioms = false;
  bool noCorpus = false;
  bool noTiming = false;
  bool injectFault = false;
};

// A report is an ordered JSON object. In text mode the "result" member comes
// out bare on the first line and every other member becomes "key: value",
// with arrays spread over indented lines.
void render(const ordered_json& report, bool json, std::ostream& out) {
  if (json) {
    out << report.dump() << "\n";
    return;
  }
  for (const auto& [key, value] : report.items()) {
    if (key == "result") {
      out << value.get<std::string>() << "\n";
    } else if (value.is_array()) {
      out << key << ":\n";
      for (const auto& v : value) out << "  " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    } else if (value.is_string()) {
      out << key << ": " << value.get<std::string>() << "\n";
    } else {
      out << key << ": " << value.dump() << "\n";
    }
  }
}

// Formulas with '~>' are rewritten before they reach the prover.
Formula prover_input(const Formula& f, ordered_json& report) {
  if (!contains_op(f, Op::Cond)) return f;
  Formula g = cond_to_csl(f);
  report["translated"] = to_string(g);
  return g;
}

// Runs the prover on `target` and fills the tableau fields of the report.
// Returns the verdict; a countermodel or witness is attached when open.
Verdict prove(const Formula& target, const Config& cfg, ordered_json& report) {
  DecideOptions opts;
  opts.labelCap = cfg.labelCap;
  opts.trace = cfg.trace;
  Verdict v = decide(target, opts);
  report["tableau"] = v.status == Status::Closed ? "CLOSED" : "OPEN";
  report["labels"] = v.maxLabels;
  report["branchPoints"] = v.nodes;
  if (v.status == Status::OpenSaturated) {
    auto rep = extract(*v.openSet, v.root, target);
    report["verified"] = rep.verified;
    report["model"] = ordered_json::parse(model_to_json(rep.model, rep.rootWorld));
  }
  if (cfg.trace) report["trace"] = v.trace;
  return v;
}

int cmd_check(const Config& cfg, std::ostream& out) {
  ordered_json report;
  report["result"] = "";
  report["meaning"] = "";
  const Formula f = parse(cfg.formula);
  report["formula"] = to_string(f);
  const Formula g = prover_input(f, report);
  const Formula target = Formula::negate(g);
  report["decided"] = "satisfiability of " + to_string(target);
  const Verdict v = prove(target, cfg, report);
  const bool valid = v.status == Status::Closed;
  report["result"] = valid ? "VALID" : "INVALID";
  report["meaning"] = valid ? "the negation has no model" : "the model below falsifies the formula at its root";
  render(report, cfg.json, out);
  return valid ? kOk : kNegative;
}

int cmd_sat(const Config& cfg, std::ostream& out) {
  ordered_json report;
  report["result"] = "";
  report["meaning"] = "";
  const Formula f = parse(cfg.formula);
  report["formula"] = to_string(f);
  const Formula g = prover_input(f, report);
  report["decided"] = "satisfiability of " + to_string(g);
  const Verdict v = prove(g, cfg, report);
  const bool sat = v.status == Status::OpenSaturated;
  report["result"] = sat ? "SAT" : "UNSAT";
  report["meaning"] = sat ? "the model below satisfies the formula at its root"
                          : "no model of any size satisfies the formula";
  if (cfg.withOracle) {
    const SatVerdict o = oracle_sat(g, cfg.oracleBound);
    report["oracle"] = o.satisfiable ? "SAT" : "NONE<=" + std::to_string(cfg.oracleBound);
  }
  render(report, cfg.json, out);
  return sat ? kOk : kNegative;
}

int cmd_eval(const Config& cfg, std::ostream& out, std::ostream& err) {
  const LoadedModel m = load_model_file(cfg.modelPath);
  std::string name = cfg.world;
  if (name.empty()) name = m.root.value_or(m.worlds().front());
  const auto w = m.find_world(name);
  if (!w) {
    err << "error: unknown world '" << name << "'\n";
    return kError;
  }
  const Formula f = parse(cfg.formula);
  const bool value = m.eval(*w, f);
  ordered_json report;
  report["result"] = value ? "true" : "false";
  report["formula"] = to_string(f);
  report["world"] = name;
  report["model"] = m.is_preferential() ? "preferential" : "distance";
  render(report, cfg.json, out);
  return value ? kOk : kNegative;
}

int cmd_translate(const Config& cfg, std::ostream& out, std::ostream& err) {
  const Formula f = parse(cfg.formula);
  Formula g = f;
  if (cfg.direction == "to-conditional") {
    if (contains_op(f, Op::Cond)) {
      err << "error: to-conditional expects a formula without '~>'\n";
      return kError;
    }
    g = csl_to_cond(f);
  } else {
    g = cond_to_csl(f);
  }
  ordered_json report;
  report["result"] = to_string(g);
  report["direction"] = cfg.direction;
  report["formula"] = to_string(f);
  render(report, cfg.json, out);
  return kOk;
}

int cmd_suite(const Config& cfg, std::ostream& out) {
  SuiteOptions so;
  so.axioms = !cfg.noAxioms;
  so.corpus = !cfg.noCorpus;
  so.oracleBound = cfg.oracleBound;
  so.corpusSpec.maxSize = cfg.maxSize;
  so.corpusSpec.maxSimDepth = cfg.maxSimDepth;
  so.schema.metaSize = cfg.metaSize;
  so.schema.wideMetaSize = cfg.wideMetaSize;
  so.decideOptions.labelCap = cfg.labelCap;
  so.schema.decideOptions.labelCap = cfg.labelCap;
  if (cfg.injectFault) {
    // Test fixture: a prover that closes everything.
    so.decideFn = [](const Formula&, const DecideOptions&) { return Verdict{}; };
  }

  ordered_json lines = ordered_json::array();
  auto sink = [&](const SuiteLine& l) {
    if (cfg.json) {
      ordered_json j;
      j["name"] = l.name;
      j["formula"] = l.formula;
      j["verdict"] = l.verdict;
      j["oracle"] = l.oracle;
      j["consistent"] = l.consistent;
      if (!cfg.noTiming) j["millis"] = l.millis;
      lines.push_back(std::move(j));
    } else {
      out << format_line(l, !cfg.noTiming) << "\n";
    }
  };

  SuiteSummary sum;
  if (cfg.schemas.empty()) {
    sum = run_suite(so, sink);
  } else {
    // Only the named schemata; the corpus part is skipped.
    SchemaRunOptions sr = so.schema;
    sr.decideFn = so.decideFn;
    for (const auto& name : cfg.schemas) {
      for (const auto& l : check_schema(*find_schema(name), sr)) {
        ++sum.checks;
        if (!l.consistent) {
          ++sum.failures;
          ++sum.failuresByName[l.name];
        }
        sink(l);
      }
    }
  }

  ordered_json report;
  report["result"] = sum.failures == 0 ? "CONSISTENT" : "INCONSISTENT";
  report["checks"] = sum.checks;
  report["failures"] = sum.failures;
  if (!sum.failuresByName.empty()) report["failuresByName"] = sum.failuresByName;
  if (cfg.json) {
    ordered_json all;
    all["lines"] = std::move(lines);
    for (const auto& [k, v] : report.items()) all[k] = v;
    out << all.dump() << "\n";
  } else {
    render(report, false, out);
  }
  return sum.failures == 0 ? kOk : kNegative;
}

void add_prover_flags(CLI::App* sub, Config& cfg) {
  sub->add_option("--label-cap", cfg.labelCap, "Maximum number of labels (0: automatic)");
  sub->add_flag("--trace", cfg.trace, "Include the rule applications of the search");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Prover and model checker for the logic of comparative similarity", "csl"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", cfg.json, "Emit the report as one JSON object");

  auto* check = app.add_subcommand("check", "Decide validity (VALID, or INVALID with a countermodel)");
  check->add_option("formula", cfg.formula)->required();
  add_prover_flags(check, cfg);

  auto* sat = app.add_subcommand("sat", "Decide satisfiability (SAT with a model, or UNSAT)");
  sat->add_option("formula", cfg.formula)->required();
  add_prover_flags(sat, cfg);
  sat->add_flag("--oracle", cfg.withOracle, "Also search all models up to --oracle-bound worlds");
  sat->add_option("--oracle-bound", cfg.oracleBound)->check(CLI::Range(1, 6));

  auto* eval = app.add_subcommand("eval", "Evaluate a formula in a model file");
  eval->add_option("formula", cfg.formula)->required();
  eval->add_option("--model", cfg.modelPath, "JSON model file")->required();
  eval->add_option("--world", cfg.world, "World name (default: root, else the first world)");

  auto* translate = app.add_subcommand("translate", "Translate between << and ~>");
  translate->add_option("direction", cfg.direction)
      ->required()
      ->check(CLI::IsMember({"to-conditional", "to-csl"}));
  translate->add_option("formula", cfg.formula)->required();

  auto* suite = app.add_subcommand("suite", "Run the axiom suite and the corpus cross-check");
  suite->add_option("--oracle-bound", cfg.oracleBound, "Worlds searched by the oracle")
      ->check(CLI::Range(1, 6));
  suite->add_option("--label-cap", cfg.labelCap);
  suite->add_option("--max-size", cfg.maxSize, "Corpus formula size bound")->check(CLI::Range(1, 8));
  suite->add_option("--max-sim-depth", cfg.maxSimDepth, "Corpus nesting bound for <<");
  suite->add_option("--meta-size", cfg.metaSize, "Size bound for metavariable values")
      ->check(CLI::Range(1, 4));
  suite->add_option("--wide-meta-size", cfg.wideMetaSize,
                    "Size bound for schemata with four or more metavariables")
      ->check(CLI::Range(1, 3));
  std::vector<std::string> names;
  for (const auto& s : axiom_schemata()) names.push_back(s.name);
  suite->add_option("--schema", cfg.schemas, "Check only these schemata")->check(CLI::IsMember(names));
  suite->add_flag("--no-axioms", cfg.noAxioms);
  suite->add_flag("--no-corpus", cfg.noCorpus);
  suite->add_flag("--no-timing", cfg.noTiming, "Omit the millis column");
  suite->add_flag("--inject-fault", cfg.injectFault)->group("");

  auto* trace = app.add_subcommand("trace", "Print the tableau search for the validity check");
  trace->add_option("formula", cfg.formula)->required();
  trace->add_option("--label-cap", cfg.labelCap);
  trace->add_flag("--sat", cfg.satMode, "Trace the satisfiability check instead");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*check) return cmd_check(cfg, out);
    if (*sat) return cmd_sat(cfg, out);
    if (*eval) return cmd_eval(cfg, out, err);
    if (*translate) return cmd_translate(cfg, out, err);
    if (*suite) return cmd_suite(cfg, out);
    cfg.trace = true;
    return cfg.satMode ? cmd_sat(cfg, out) : cmd_check(cfg, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ResourceLimit& e) {
    err << "resource cap: " << e.what() << "\n";
    return kResourceCap;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kError;
}

}  // namespace csl::cli
