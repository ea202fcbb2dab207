// Countermodel extraction from open tableau sets.
//
// decide() stops at sets that are saturated only up to blocking. The three
// completion steps below add the missing preference statements and rebuild
// the relations of blocked labels, after which the set is saturated outright
// and its canonical model satisfies every formula in it.

#ifndef CSL_MODELEXT_HPP_
#define CSL_MODELEXT_HPP_

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "csl/semantics.hpp"
#include "csl/tableau.hpp"

namespace csl {

// Raised when an input set breaks an invariant the engine should guarantee.
class ExtractionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

TableauSet complete_step1(const TableauSet& g);
TableauSet complete_step2(const TableauSet& g1);
TableauSet complete_step3(const TableauSet& g2);

// Worlds are the alive labels in birth order; y ≺_x z iff y <_x z is in g.
// `labels` receives the label of each world.
PreferentialModel canonical_model(const TableauSet& g, const std::set<std::string>& atoms,
                                  std::vector<Label>* labels = nullptr);

// Every formula of g holds in m when each label l is read as world f[l].
bool satisfied_under(const PreferentialModel& m, const std::map<Label, World>& f,
                     const TableauSet& g);

struct ExtractionReport {
  PreferentialModel model;
  World rootWorld = 0;
  std::vector<std::string> steps;  // "Step1", "Step2", "Step3" when they changed the set
  bool verified = false;
  std::vector<Label> worldLabels;
  TableauSet completed;
};

ExtractionReport extract(const TableauSet& g, Label root, const Formula& input);

}  // namespace csl

#endif  // CSL_MODELEXT_HPP_
