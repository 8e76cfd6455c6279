#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace paa {

// Labels of the inference rules, spelled as in the certificate format.
namespace rule {
// locations
inline constexpr const char* Var = "x^p";
inline constexpr const char* Field = "->^p";
inline constexpr const char* Deref = "[l]^p";
// distributed expressions
inline constexpr const char* Reform1 = "reform1^p";
inline constexpr const char* Reform2 = "reform2^p";
inline constexpr const char* Reform3 = "reform3^p";
inline constexpr const char* Reform4 = "reform4^p";
inline constexpr const char* RunExpr = "run_e^p";
inline constexpr const char* Malloc = "malloc^p";
inline constexpr const char* Plus = "+^p";
// statements
inline constexpr const char* Md = "md^p";
inline constexpr const char* Fi = "fi^p";
inline constexpr const char* AddrVar = "&1";
inline constexpr const char* Mu = "mu^p";
inline constexpr const char* AddrField = "&2^p";
inline constexpr const char* AddrDeref = "&3^p";
inline constexpr const char* LoadDeref = "[]1^p";
inline constexpr const char* StoreDeref = "[]2^p";
inline constexpr const char* CopyDeref = "[]3^p";
inline constexpr const char* Assign = ":=^p";
inline constexpr const char* Seq = ";^p";
inline constexpr const char* RunStmt = "run_s^p";
inline constexpr const char* If = "if^p";
inline constexpr const char* While = "whl^p";
// plumbing: integer literals, &l inside an expression, empty blocks
inline constexpr const char* IntLit = "int";
inline constexpr const char* AddrOf = "addr";
inline constexpr const char* Skip = "skip";

std::vector<std::string> inference_rules();  // the 24 inference rules
std::vector<std::string> all_rules();    // inference rules plus plumbing
}  // namespace rule

// One rule application. `inputs` identifies the judgment (source position
// and side information); `conclusion` is its result: an abstract value for
// expressions, the changed slice of the alias type for statements.
struct Derivation {
  std::string rule;
  std::vector<Derivation> premises;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json conclusion = nlohmann::json::object();

  std::size_t node_count() const;
};

nlohmann::json to_json(const Derivation& d);

}  // namespace paa
