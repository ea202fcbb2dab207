#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "csl/cli.hpp"
#include "csl/model_io.hpp"

using namespace csl;

namespace {

struct Run {
  int code;
  std::string out, err;
  std::string first_line() const { return out.substr(0, out.find('\n')); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// The value of a "key: value" line of a text report.
std::string field(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  return "";
}

struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream(path) << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("check") {
  auto r = run({"check", "p & ~q -> (p << q)"});
  CHECK(r.code == 0);
  CHECK(r.first_line() == "VALID");
  CHECK(field(r.out, "tableau") == "CLOSED");

  r = run({"check", "~(p << p)"});
  CHECK(r.code == 0);
  CHECK(r.first_line() == "VALID");

  r = run({"check", "p << q"});
  CHECK(r.code == 1);
  CHECK(r.first_line() == "INVALID");
  CHECK(field(r.out, "verified") == "true");
  // The printed countermodel falsifies the formula at its root.
  auto m = model_from_json(field(r.out, "model"));
  REQUIRE(m.root);
  CHECK_FALSE(m.eval(*m.find_world(*m.root), parse("p << q")));
}

TEST_CASE("check translates conditionals first") {
  auto r = run({"check", "p ~> p"});
  CHECK(r.code == 0);
  CHECK(field(r.out, "translated") == "(p << (p & ~p)) | ~(p << false)");
  CHECK(run({"check", "p ~> q"}).code == 1);
}

TEST_CASE("sat") {
  auto r = run({"sat", "p << q"});
  CHECK(r.code == 0);
  CHECK(r.first_line() == "SAT");

  r = run({"sat", "p << p"});
  CHECK(r.code == 1);
  CHECK(r.first_line() == "UNSAT");

  r = run({"sat", "true"});
  CHECK(r.code == 0);
  auto m = model_from_json(field(r.out, "model"));
  CHECK(m.worlds().size() == 1);

  r = run({"sat", "p << p", "--oracle", "--oracle-bound", "2"});
  CHECK(field(r.out, "oracle") == "NONE<=2");
  r = run({"sat", "p << q", "--oracle"});
  CHECK(field(r.out, "oracle") == "SAT");
}

TEST_CASE("eval") {
  TempFile one("test_cli_one.json", R"({"worlds":["w"],"rank":{"w":{"w":0}},"val":{"p":["w"]}})");
  auto r = run({"eval", "--model", one.path, "p << false"});
  CHECK(r.code == 0);
  CHECK(r.first_line() == "true");
  r = run({"eval", "--model", one.path, "p << p"});
  CHECK(r.code == 1);
  CHECK(r.first_line() == "false");
  CHECK(run({"eval", "--model", one.path, "true"}).first_line() == "true");
  CHECK(run({"eval", "--model", one.path, "--world", "v", "true"}).code == 2);

  TempFile dist("test_cli_dist.json",
                R"({"worlds":["w","v"],"dist":{"w":{"w":"0","v":"1/2"},"v":{"v":"0","w":"1/3"}},"val":{"p":["v"]},"root":"w"})");
  r = run({"eval", "--model", dist.path, "p << ~p"});
  CHECK(r.code == 1);
  CHECK(field(r.out, "world") == "w");
  CHECK(field(r.out, "model") == "distance");
  CHECK(run({"eval", "--model", dist.path, "--world", "v", "p << ~p"}).code == 0);

  TempFile broken("test_cli_broken.json", R"({"worlds":["w"]})");
  r = run({"eval", "--model", broken.path, "p"});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  CHECK(run({"eval", "--model", "/nonexistent.json", "p"}).code == 2);
}

TEST_CASE("translate") {
  CHECK(run({"translate", "to-conditional", "p << q"}).first_line() ==
        "(((p | q) ~> p) & (p ~> ~q)) & ~(p ~> false)");
  CHECK(run({"translate", "to-csl", "p ~> q"}).first_line() == "(p << (p & ~q)) | ~(p << false)");
  CHECK(run({"translate", "to-csl", "p"}).first_line() == "p");
  CHECK(run({"translate", "to-conditional", "p ~> q"}).code == 2);
  CHECK(run({"translate", "sideways", "p"}).code == 2);
}

TEST_CASE("errors and caps") {
  auto r = run({"check", "p <<"});
  CHECK(r.code == 2);
  CHECK(r.err.find("error") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"check"}).code == 2);
  CHECK(run({"check", "p", "--label-cap", "x"}).code == 2);
  CHECK(run({"--help"}).code == 0);

  r = run({"sat", "(q << false) & ~q", "--label-cap", "1"});
  CHECK(r.code == 3);
  CHECK(r.err.find("resource cap") != std::string::npos);
  CHECK(run({"sat", "(q << false) & ~q"}).code == 0);
}

TEST_CASE("trace reproduces the split of the three-way rule") {
  auto r = run({"trace", "p & ~q -> (p << q)"});
  CHECK(r.code == 0);
  CHECK(r.first_line() == "VALID");
  for (const char* part : {"  F1<< x0:~(p << q) => x0:[]~p | 0.1",
                           "  F1<< x0:~(p << q) => x0:q | 0.2",
                           "  F1<< x0:~(p << q) => x0:~p, x0:~q | 0.3",
                           "  T[] x0:[]~p => x0:~p"}) {
    CHECK(r.out.find(part) != std::string::npos);
  }
  CHECK(run({"check", "--trace", "p & ~q -> (p << q)"}).out == r.out);
  auto s = run({"trace", "--sat", "p << q"});
  CHECK(s.first_line() == "SAT");
  CHECK(s.out.find("trace:") != std::string::npos);
}

TEST_CASE("output is deterministic and JSON mirrors text") {
  for (const char* f : {"p << q", "~((p << q) -> (q << p))", "p & ~q -> (p << q)"}) {
    const auto a = run({"check", "--trace", f});
    CHECK(a.out == run({"check", "--trace", f}).out);

    const auto j = run({"--json", "check", "--trace", f});
    CHECK(j.code == a.code);
    auto doc = nlohmann::ordered_json::parse(j.out);
    CHECK(doc["result"] == a.first_line());
    for (const auto& [key, value] : doc.items()) {
      if (key == "result") continue;
      if (value.is_string()) {
        CHECK(field(a.out, key) == value.get<std::string>());
      } else if (value.is_array()) {
        CHECK(a.out.find(key + ":\n") != std::string::npos);
        for (const auto& line : value) CHECK(a.out.find("  " + line.get<std::string>() + "\n") != std::string::npos);
      } else {
        CHECK(field(a.out, key) == value.dump());
      }
    }
  }
}

TEST_CASE("suite") {
  auto r = run({"suite", "--no-axioms", "--max-size", "4", "--no-timing"});
  CHECK(r.code == 0);
  CHECK(field(r.out, "failures") == "0");
  CHECK(r.out.find("corpus, p << q, OPEN, SAT, true\n") != std::string::npos);
  CHECK(run({"suite", "--no-axioms", "--max-size", "4", "--no-timing"}).out == r.out);

  r = run({"suite", "--schema", "T2", "--schema", "Ax1", "--meta-size", "2"});
  CHECK(r.code == 0);
  CHECK(field(r.out, "checks") == std::to_string(6 + 36));
  // Timing column present by default.
  CHECK(r.out.find("T2, ~(p << p), VALID, VALID, true, ") != std::string::npos);

  r = run({"suite", "--no-axioms", "--max-size", "3", "--inject-fault"});
  CHECK(r.code == 1);
  CHECK(r.first_line() != "CONSISTENT");
  CHECK(field(r.out, "failures") != "0");

  r = run({"--json", "suite", "--schema", "T2", "--meta-size", "1"});
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["result"] == "CONSISTENT");
  CHECK(doc["lines"].size() == 3);
  CHECK(doc["lines"][0].contains("millis"));

  CHECK(run({"suite", "--schema", "T99"}).code == 2);
}
