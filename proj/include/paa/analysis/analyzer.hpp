// Probabilistic alias analysis of SSA-DisLang programs, run as a
// derivation-producing judgment engine. Every rule application is recorded
// as a Derivation node so the result can be shipped as a certificate.
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "paa/analysis/alias_type.hpp"
#include "paa/analysis/derivation.hpp"
#include "paa/diagnostic.hpp"
#include "paa/syntax/ast.hpp"

namespace paa {

enum class MergeMode { Weighted, MaxUnion };
enum class WhileMode { Iterated, Literal };

const char* merge_mode_name(MergeMode m);
const char* while_mode_name(WhileMode m);

struct AnalysisConfig {
  double threshold = 0.5;  // p_t, compared against the reaching probability
  MergeMode ifMerge = MergeMode::Weighted;
  WhileMode whileMode = WhileMode::Iterated;
  bool strictMd = true;

  nlohmann::json to_json() const;
};

struct ReachCtx {
  double reachProb = 1.0;  // product of branch weights from program entry
  std::string currentMachine;
  // Branch weight of the if/while that a following fi statement joins;
  // empty when the statement does not directly follow one.
  std::optional<double> joinProb;
};

// Hard analysis failure. Codes: unbound-location, no-witness, md-premise,
// unknown-machine, unknown-region, cyclic-alias.
class AnalysisError : public std::runtime_error {
 public:
  AnalysisError(std::string code, Span at, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)), at_(at) {}
  const std::string& code() const { return code_; }
  const Span& at() const { return at_; }

 private:
  std::string code_;
  Span at_;
};

struct Judgment {
  AbstractValue value;
  Derivation derivation;
};

struct Transfer {
  AliasType post;
  Derivation derivation;
};

// Base address of the region owned by the root variable of `l`.
AbstractAddress region_base(const Program& p, const LocExpr& l);

// Key whose pair set stands for `l` in the location rules: the variable
// itself for `x`, the root region for `l->y`, and the inner key for `[l]`.
AliasKey base_key(const Program& p, const LocExpr& l);

// Key written by `l := ...` when `l` is not a dereference.
AliasKey store_key(const Program& p, const LocExpr& l);

Judgment resolve_var(const SsaVar& x, const AliasType& P, Span at = {});
Judgment resolve_field(const Program& prog, const LocExpr& l, const SsaVar& y, const AliasType& P, Span at = {});
Judgment resolve_deref(const Program& prog, const LocExpr& l, const AliasType& P, Span at = {});

Judgment eval_expr(const Program& prog, const Expr& e, const AliasType& P, const ReachCtx& ctx,
                   const AnalysisConfig& cfg, Diagnostics* warnings = nullptr);

AliasType merge(const AliasType& P1, const AliasType& P2, double w1, MergeMode mode);

// The seven assignment rules, in dispatch priority order.
enum class AssignRule { AddrField, AddrDeref, AddrVar, CopyDeref, LoadDeref, StoreDeref, Assign };

const char* assign_rule_label(AssignRule r);
AssignRule classify_assign(const Stmt::Assign& a);
// Side condition of one rule taken on its own; exactly one holds per shape.
bool assign_rule_applies(AssignRule r, const Stmt::Assign& a);

Transfer transfer_stmt(const Program& prog, const Stmt& s, const AliasType& P, const ReachCtx& ctx,
                       const AnalysisConfig& cfg, Diagnostics* warnings = nullptr);

struct AnalysisResult {
  AliasType final;
  // Pre-state of every statement, keyed by (line, col) of its start.
  std::map<std::pair<std::uint32_t, std::uint32_t>, AliasType> perPoint;
  // Empty for a program with no statements.
  std::optional<Derivation> derivation;
  Diagnostics warnings;
};

// Runs the statement rules over p.body from the empty alias type at the
// entry machine with reaching probability 1. Throws AnalysisError.
AnalysisResult analyze(const Program& p, const AnalysisConfig& cfg = {});

}  // namespace paa
