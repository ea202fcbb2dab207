#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "csl/cli.hpp"
#include "csl/model_io.hpp"
#include "csl/modelext.hpp"
#include "csl/suite.hpp"

namespace py = pybind11;
using namespace csl;

namespace {

py::dict decide_dict(const Formula& f, std::size_t labelCap, bool trace) {
  DecideOptions opts;
  opts.labelCap = labelCap;
  opts.trace = trace;
  const Verdict v = decide(f, opts);
  py::dict d;
  d["status"] = v.status == Status::Closed ? "CLOSED" : "OPEN";
  d["labels"] = v.maxLabels;
  d["branch_points"] = v.nodes;
  d["trace"] = v.trace;
  if (v.openSet) {
    const auto rep = extract(*v.openSet, v.root, f);
    d["verified"] = rep.verified;
    d["steps"] = rep.steps;
    d["model"] = model_to_json(rep.model, rep.rootWorld);
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_csl, m) {
  m.doc() = "Prover, model checker and test harness for comparative similarity logic";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ResourceLimit>(m, "ResourceLimit", PyExc_RuntimeError);

  py::class_<Formula>(m, "Formula")
      .def(py::init([](const std::string& text) { return parse(text); }), py::arg("text"))
      .def("__str__", [](const Formula& f) { return to_string(f); })
      .def("__repr__", [](const Formula& f) { return "Formula('" + to_string(f) + "')"; })
      .def("__eq__", [](const Formula& a, const Formula& b) { return a == b; })
      .def("__hash__", [](const Formula& f) { return f.hash(); })
      .def_property_readonly("size", &Formula::size)
      .def_property_readonly("sim_depth", [](const Formula& f) { return sim_depth(f); })
      .def_property_readonly("atoms", [](const Formula& f) { return atoms_of(f); });

  m.def("parse", [](const std::string& s) { return parse(s); }, py::arg("text"));
  m.def("to_conditional", &csl_to_cond, py::arg("formula"));
  m.def("to_csl", &cond_to_csl, py::arg("formula"));

  m.def("decide", &decide_dict, py::arg("formula"), py::arg("label_cap") = 0,
        py::arg("trace") = false,
        "Run the tableau on the formula; an open result carries a verified model as JSON.");
  m.def(
      "is_valid",
      [](const Formula& f) { return decide(Formula::negate(f)).status == Status::Closed; },
      py::arg("formula"));
  m.def(
      "is_satisfiable",
      [](const Formula& f) { return decide(f).status == Status::OpenSaturated; },
      py::arg("formula"));

  m.def(
      "evaluate",
      [](const std::string& modelJson, const Formula& f, std::optional<std::string> world) {
        const auto lm = model_from_json(modelJson);
        const std::string name = world.value_or(lm.root.value_or(lm.worlds().front()));
        const auto w = lm.find_world(name);
        if (!w) throw ModelError("unknown world " + name);
        return lm.eval(*w, f);
      },
      py::arg("model_json"), py::arg("formula"), py::arg("world") = py::none());

  m.def(
      "oracle_sat",
      [](const Formula& f, std::size_t bound) -> std::optional<std::string> {
        const auto v = oracle_sat(f, bound);
        if (!v.satisfiable) return std::nullopt;
        return model_to_json(v.witness->model, v.witness->world);
      },
      py::arg("formula"), py::arg("bound") = 3,
      "JSON of the first model within the bound that satisfies the formula, or None.");

  m.def(
      "generate_corpus",
      [](const std::vector<std::string>& atoms, std::size_t maxSize, std::size_t maxSimDepth) {
        return generate_corpus({{atoms.begin(), atoms.end()}, maxSize, maxSimDepth});
      },
      py::arg("atoms") = std::vector<std::string>{"p", "q"}, py::arg("max_size") = 5,
      py::arg("max_sim_depth") = 2);

  m.def(
      "crosscheck",
      [](const Formula& f, std::size_t bound) {
        const auto r = crosscheck(f, bound);
        py::dict d;
        d["verdict"] = r.verdict;
        d["oracle_sat"] = r.oracleSat;
        d["extraction_verified"] = r.extractionVerified;
        d["labels"] = r.labels;
        d["consistent"] = r.consistent;
        d["issue"] = r.issue;
        return d;
      },
      py::arg("formula"), py::arg("oracle_bound") = 3);

  m.def(
      "schema_names",
      [] {
        std::vector<std::string> out;
        for (const auto& s : axiom_schemata()) out.push_back(s.name);
        return out;
      });
  m.def(
      "instantiate",
      [](const std::string& name, const std::vector<Formula>& args) {
        const auto s = find_schema(name);
        if (!s) throw py::key_error(name);
        return instantiate(*s, args);
      },
      py::arg("schema"), py::arg("args"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in-process: (exit code, stdout, stderr).");
}
