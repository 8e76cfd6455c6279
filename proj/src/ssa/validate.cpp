#include "paa/ssa/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace paa {

const char* severity_name(Severity s) { return s == Severity::Error ? "error" : "warning"; }

bool has_errors(const Diagnostics& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

namespace {

struct Validator {
  const Program& program;
  Diagnostics out;
  std::map<SsaVar, Span> defs;
  std::set<SsaVar> declared;

  void define(const SsaVar& v, const Span& at) {
    auto [it, fresh] = defs.emplace(v, at);
    if (!fresh)
      out.push_back({Severity::Error, "ssa-multi-def", at,
                     "'" + v.str() + "' is already defined at " + it->second.str()});
  }

  bool defined(const SsaVar& v) const { return defs.count(v) || declared.count(v); }

  void collect(const Stmt& s) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Stmt::Assign>) {
            if (auto* v = std::get_if<LocExpr::Var>(&n.lhs.node)) define(v->var, s.span);
          } else if constexpr (std::is_same_v<T, Stmt::Phi>) {
            define(n.target, s.span);
          } else if constexpr (std::is_same_v<T, Stmt::Seq>) {
            collect(*n.first);
            collect(*n.second);
          } else if constexpr (std::is_same_v<T, Stmt::RunStmt>) {
            collect(*n.body);
          } else if constexpr (std::is_same_v<T, Stmt::If>) {
            collect(*n.thenBranch);
            collect(*n.elseBranch);
          } else if constexpr (std::is_same_v<T, Stmt::While>) {
            collect(*n.body);
          }
        },
        s.node);
  }

  void require(const SsaVar& v, const Span& at, const char* code, const char* role) {
    if (!defined(v))
      out.push_back({Severity::Error, code, at, std::string(role) + " '" + v.str() + "' is never defined"});
  }

  // `afterJoin`: the statement directly follows an if/while, possibly with
  // other fi statements in between.
  void check_block(const Stmt& s) {
    std::vector<const Stmt*> list;
    flatten_seq(s, list);
    bool afterJoin = false;
    for (const Stmt* st : list) {
      bool isPhi = std::holds_alternative<Stmt::Phi>(st->node);
      if (isPhi && !afterJoin)
        out.push_back({Severity::Warning, "ssa-phi-placement", st->span,
                       "fi statement does not directly follow an if or while"});
      check(*st);
      if (std::holds_alternative<Stmt::If>(st->node) || std::holds_alternative<Stmt::While>(st->node))
        afterJoin = true;
      else if (!isPhi)
        afterJoin = false;
    }
  }

  void check(const Stmt& s) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Stmt::Phi>) {
            require(n.left, s.span, "ssa-undef-arg", "fi argument");
            require(n.right, s.span, "ssa-undef-arg", "fi argument");
          } else if constexpr (std::is_same_v<T, Stmt::Md>) {
            require(n.source, s.span, "ssa-undef-arg", "md argument");
            require(n.target, s.span, "ssa-undef-arg", "md target");
          } else if constexpr (std::is_same_v<T, Stmt::Mu>) {
            require(n.var, s.span, "ssa-undef-mu", "mu variable");
          } else if constexpr (std::is_same_v<T, Stmt::RunStmt>) {
            check_block(*n.body);
          } else if constexpr (std::is_same_v<T, Stmt::If>) {
            check_block(*n.thenBranch);
            check_block(*n.elseBranch);
          } else if constexpr (std::is_same_v<T, Stmt::While>) {
            check_block(*n.body);
          }
        },
        s.node);
  }
};

}  // namespace

Diagnostics validate_ssa(const Program& p) {
  Validator v{p, {}, {}, {}};
  for (const auto& d : p.decls) v.declared.insert(SsaVar{d.name, 0});
  v.collect(p.body);
  v.check_block(p.body);
  std::stable_sort(v.out.begin(), v.out.end(), [](const Diagnostic& a, const Diagnostic& b) {
    if (a.span.line != b.span.line) return a.span.line < b.span.line;
    if (a.span.col != b.span.col) return a.span.col < b.span.col;
    return a.code < b.code;
  });
  return v.out;
}

}  // namespace paa
