#include "paa/analysis/derivation.hpp"

namespace paa {

using nlohmann::json;

std::vector<std::string> rule::inference_rules() {
  return {Var,      Field, Deref,     Reform1,   Reform2,    Reform3,   Reform4, RunExpr,
          Malloc,   Plus,  Md,        Fi,        AddrVar,    Mu,        AddrField, AddrDeref,
          LoadDeref, StoreDeref, CopyDeref, Assign, Seq,      RunStmt,   If,      While};
}

std::vector<std::string> rule::all_rules() {
  auto r = inference_rules();
  r.insert(r.end(), {IntLit, AddrOf, Skip});
  return r;
}

std::size_t Derivation::node_count() const {
  std::size_t n = 1;
  for (const auto& p : premises) n += p.node_count();
  return n;
}

json to_json(const Derivation& d) {
  json premises = json::array();
  for (const auto& p : d.premises) premises.push_back(to_json(p));
  return json{{"rule", d.rule}, {"premises", std::move(premises)}, {"inputs", d.inputs}, {"conclusion", d.conclusion}};
}

}  // namespace paa
