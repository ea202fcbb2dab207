#include "csl/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace csl {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json valuation_json(const std::vector<std::string>& worlds, const Valuation& v) {
  ordered_json out = ordered_json::object();
  for (const auto& [atom, ext] : v) {
    ordered_json names = ordered_json::array();
    for (World w : ext) names.push_back(worlds.at(w));
    out[atom] = std::move(names);
  }
  return out;
}

std::string finish(ordered_json j, const std::vector<std::string>& worlds,
                   std::optional<World> root, int indent) {
  if (root) j["root"] = worlds.at(*root);
  return j.dump(indent);
}

std::string rational_text(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Rational parse_rational(const json& v) {
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  if (!v.is_string()) throw ModelError("distance must be a \"num/den\" string");
  const std::string s = v.get<std::string>();
  try {
    std::size_t used = 0;
    const auto slash = s.find('/');
    const std::int64_t num = std::stoll(s.substr(0, slash), &used);
    if (used != (slash == std::string::npos ? s.size() : slash)) throw std::invalid_argument(s);
    std::int64_t den = 1;
    if (slash != std::string::npos) {
      const std::string d = s.substr(slash + 1);
      den = std::stoll(d, &used);
      if (used != d.size()) throw std::invalid_argument(s);
    }
    if (den == 0) throw ModelError("zero denominator in distance \"" + s + "\"");
    return Rational(num, den);
  } catch (const std::logic_error&) {
    throw ModelError("bad distance \"" + s + "\"");
  }
}

std::map<std::string, World> index_worlds(const std::vector<std::string>& worlds) {
  std::map<std::string, World> idx;
  for (World i = 0; i < worlds.size(); ++i) {
    if (!idx.emplace(worlds[i], i).second) throw ModelError("duplicate world " + worlds[i]);
  }
  return idx;
}

// Reads a per-world table {"w": {"v": value, ...}, ...} into an n×n matrix.
template <class T, class Conv>
std::vector<std::vector<T>> read_table(const json& t, const std::map<std::string, World>& idx,
                                       const char* field, Conv conv) {
  const std::size_t n = idx.size();
  if (!t.is_object()) throw ModelError(std::string("\"") + field + "\" must be an object");
  std::vector<std::vector<T>> out(n, std::vector<T>(n));
  for (const auto& [w, wi] : idx) {
    if (!t.contains(w)) throw ModelError(std::string(field) + " has no row for " + w);
    const json& row = t.at(w);
    if (!row.is_object() || row.size() != n) {
      throw ModelError(std::string(field) + " row " + w + " must list every world");
    }
    for (const auto& [x, xi] : idx) {
      if (!row.contains(x)) throw ModelError(std::string(field) + " row " + w + " lacks " + x);
      out[wi][xi] = conv(row.at(x));
    }
  }
  if (t.size() != n) throw ModelError(std::string(field) + " names an unknown world");
  return out;
}

}  // namespace

const std::vector<std::string>& LoadedModel::worlds() const {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.worlds(); },
                    model);
}

std::optional<World> LoadedModel::find_world(std::string_view name) const {
  return std::visit([&](const auto& m) { return m.find_world(name); }, model);
}

bool LoadedModel::eval(World w, const Formula& f) const {
  if (const auto* p = std::get_if<PreferentialModel>(&model)) return eval_pref(*p, w, f);
  return eval_dist(std::get<DistanceMinspaceModel>(model), w, f);
}

std::string model_to_json(const PreferentialModel& m, std::optional<World> root, int indent) {
  ordered_json j;
  j["worlds"] = m.worlds();
  ordered_json rank = ordered_json::object();
  for (World w = 0; w < m.size(); ++w) {
    ordered_json row = ordered_json::object();
    for (World x = 0; x < m.size(); ++x) row[m.world_name(x)] = m.rank(w, x);
    rank[m.world_name(w)] = std::move(row);
  }
  j["rank"] = std::move(rank);
  j["val"] = valuation_json(m.worlds(), m.valuation());
  return finish(std::move(j), m.worlds(), root, indent);
}

std::string model_to_json(const DistanceMinspaceModel& m, std::optional<World> root,
                          int indent) {
  ordered_json j;
  j["worlds"] = m.worlds();
  ordered_json dist = ordered_json::object();
  for (World w = 0; w < m.size(); ++w) {
    ordered_json row = ordered_json::object();
    for (World x = 0; x < m.size(); ++x) row[m.world_name(x)] = rational_text(m.dist(w, x));
    dist[m.world_name(w)] = std::move(row);
  }
  j["dist"] = std::move(dist);
  j["val"] = valuation_json(m.worlds(), m.valuation());
  return finish(std::move(j), m.worlds(), root, indent);
}

LoadedModel model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ModelError("model must be a JSON object");
  if (!j.contains("worlds") || !j["worlds"].is_array() || j["worlds"].empty()) {
    throw ModelError("\"worlds\" must be a nonempty array of names");
  }
  std::vector<std::string> worlds;
  for (const auto& w : j["worlds"]) {
    if (!w.is_string()) throw ModelError("world names must be strings");
    worlds.push_back(w.get<std::string>());
  }
  const auto idx = index_worlds(worlds);

  Valuation val;
  if (j.contains("val")) {
    if (!j["val"].is_object()) throw ModelError("\"val\" must be an object");
    for (const auto& [atom, ext] : j["val"].items()) {
      if (!is_identifier(atom)) throw ModelError("bad atom name \"" + atom + "\"");
      if (!ext.is_array()) throw ModelError("extension of " + atom + " must be an array");
      auto& set = val[atom];
      for (const auto& w : ext) {
        if (!w.is_string() || !idx.count(w.get<std::string>())) {
          throw ModelError("extension of " + atom + " names an unknown world");
        }
        set.insert(idx.at(w.get<std::string>()));
      }
    }
  }

  std::optional<std::string> root;
  if (j.contains("root")) {
    if (!j["root"].is_string() || !idx.count(j["root"].get<std::string>())) {
      throw ModelError("\"root\" must name a world");
    }
    root = j["root"].get<std::string>();
  }

  const bool hasRank = j.contains("rank"), hasDist = j.contains("dist");
  if (hasRank == hasDist) throw ModelError("exactly one of \"rank\" and \"dist\" is required");
  if (hasRank) {
    auto rank = read_table<unsigned>(j["rank"], idx, "rank", [](const json& v) {
      if (!v.is_number_unsigned()) throw ModelError("ranks must be nonnegative integers");
      return v.get<unsigned>();
    });
    return LoadedModel{PreferentialModel(worlds, std::move(rank), std::move(val)), root};
  }
  auto dist = read_table<Rational>(j["dist"], idx, "dist", parse_rational);
  return LoadedModel{DistanceMinspaceModel(worlds, std::move(dist), std::move(val)), root};
}

LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace csl
