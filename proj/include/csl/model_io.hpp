// JSON reading and writing of finite models.
//
//   {"worlds": ["w", "v"],
//    "rank": {"w": {"w": 0, "v": 1}, "v": {"v": 0, "w": 1}},
//    "val": {"p": ["w"]}}
//
// Distance models carry "dist" instead of "rank", with every entry a string
// "num/den" (a bare integer string or a JSON integer is also accepted on
// input). An optional "root" names a designated world.

#ifndef CSL_MODEL_IO_HPP_
#define CSL_MODEL_IO_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "csl/semantics.hpp"

namespace csl {

struct LoadedModel {
  std::variant<PreferentialModel, DistanceMinspaceModel> model;
  std::optional<std::string> root;

  bool is_preferential() const { return model.index() == 0; }
  const std::vector<std::string>& worlds() const;
  std::optional<World> find_world(std::string_view name) const;
  bool eval(World w, const Formula& f) const;
};

// indent < 0 gives a single line.
std::string model_to_json(const PreferentialModel& m, std::optional<World> root = std::nullopt,
                          int indent = -1);
std::string model_to_json(const DistanceMinspaceModel& m,
                          std::optional<World> root = std::nullopt, int indent = -1);

// Throws ModelError on malformed input.
LoadedModel model_from_json(std::string_view text);
LoadedModel load_model_file(const std::string& path);

}  // namespace csl

#endif  // CSL_MODEL_IO_HPP_
