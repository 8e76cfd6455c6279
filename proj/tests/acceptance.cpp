// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "corpus.hpp"
#include "paa/analysis/analyzer.hpp"
#include "paa/cli/cli.hpp"
#include "paa/pcc/certificate.hpp"
#include "paa/semantics/interpreter.hpp"
#include "paa/syntax/parser.hpp"

using namespace paa;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass;
  std::string summary;
};

SsaVar v(std::string_view s) { return SsaVar::parse(s); }

AbstractAddress addr(const std::string& region, std::int64_t off = 0, const std::string& m = "m0") {
  return AbstractAddress{m, region, off};
}

AbstractValue at(const std::string& region, std::int64_t off = 0, const std::string& m = "m0") {
  return AbstractValue::address(addr(region, off, m));
}

// ---------------------------------------------------------------------------
// 1. golden rule instances

const char* kDecls =
    "machines { m0 (m1) }\nfield f = 2;\nfield y = 1;\nvar a on m0[4];\nvar b on m0[4];\nvar arr on m0[8];\n"
    "var s on m1[4];\n";

Program program(const std::string& body) { return parse(std::string(kDecls) + "begin m0 {\n" + body + "\n}\n"); }

const Program& decls() {
  static const Program p = program("");
  return p;
}

// The right-hand side of `t_0 := e;`.
Expr expr(const Program& p) { return std::get<Stmt::Assign>(p.body.node).rhs; }

LocExpr var_loc(std::string_view s) { return LocExpr{LocExpr::Var{v(s)}, {}}; }

struct Golden {
  const char* rule;
  std::function<std::optional<std::string>()> check;
};

std::optional<std::string> value_is(const Judgment& j, const char* rule, const AbstractValue& want) {
  if (j.derivation.rule != rule) return "derived by " + j.derivation.rule;
  if (!(j.value == want)) return "got " + j.value.str() + ", want " + want.str();
  return std::nullopt;
}

std::optional<std::string> post_is(const Transfer& t, const char* rule, const AliasType& want) {
  if (t.derivation.rule != rule) return "derived by " + t.derivation.rule;
  if (!(t.post == want))
    return "got\n" + format_alias_type(t.post, "    ") + "  want\n" + format_alias_type(want, "    ");
  return std::nullopt;
}

std::optional<std::string> eval_is(const std::string& e, const AliasType& P, double reach, const std::string& machine,
                                   const char* rule, const AbstractValue& want) {
  Program p = program("t_0 := " + e + ";");
  return value_is(eval_expr(p, expr(p), P, ReachCtx{reach, machine, std::nullopt}, {}), rule, want);
}

std::optional<std::string> transfer_is(const std::string& body, const AliasType& P, const char* rule,
                                       const AliasType& want, std::optional<double> join = std::nullopt) {
  Program p = program(body);
  return post_is(transfer_stmt(p, p.body, P, ReachCtx{1.0, "m0", join}, {}), rule, want);
}

std::vector<Golden> golden_instances() {
  std::vector<Golden> g;

  g.push_back({rule::Var, [] {
                 AliasType P;
                 P.set(v("x_1"), {{addr("A"), 0.3}, {addr("B"), 0.7}});
                 return value_is(resolve_var(v("x_1"), P), rule::Var, at("B"));
               }});
  g.push_back({rule::Field, [] {
                 // joints 0.8*0.6 = 0.48 and 0.5*0.9 = 0.45: the first pair of P(y) wins
                 AliasType P;
                 P.set(v("l_1"), {{addr("A"), 0.8}, {addr("B"), 0.5}});
                 P.set(v("y"), {{addr("A"), 0.6}, {addr("B"), 0.9}});
                 return value_is(resolve_field(decls(), var_loc("l_1"), v("y"), P), rule::Field, at("A"));
               }});
  g.push_back({rule::Deref, [] {
                 // joints 0.5*0.9 = 0.45 and 0.5*0.8 = 0.40
                 AliasType P;
                 P.set(v("l_1"), {{addr("A"), 0.5}, {addr("B"), 0.5}});
                 P.set(addr("A"), {{addr("C"), 0.9}});
                 P.set(addr("B"), {{addr("D"), 0.8}});
                 return value_is(resolve_deref(decls(), var_loc("l_1"), P), rule::Deref, at("C"));
               }});

  AliasType xa;
  xa.set(v("x_1"), {{addr("a"), 1.0}});
  g.push_back({rule::Reform1, [xa] { return eval_is("reform(alis m0, int m0) x_1", xa, 0.9, "m0", rule::Reform1, at("a")); }});
  g.push_back({rule::Reform2, [xa] {
                 return eval_is("reform(alis m0, int m0) x_1", xa, 0.4, "m0", rule::Reform2, AbstractValue::bottom());
               }});
  g.push_back({rule::Reform3, [xa] {
                 return eval_is("reform(int m0, int m1) x_1", xa, 0.5, "m0", rule::Reform3, at("a", 0, "m1"));
               }});
  g.push_back({rule::Reform4, [xa] {
                 return eval_is("reform(int m0, int m1) x_1", xa, 0.4, "m0", rule::Reform4, AbstractValue::bottom());
               }});
  g.push_back({rule::RunExpr, [] { return eval_is("run(&a, m1)", {}, 0.5, "m0", rule::RunExpr, at("a", 0, "m1")); }});
  g.push_back({rule::Malloc, [] {
                 Expr m{Expr::Malloc{3}, {}};
                 auto j = eval_expr(decls(), m, {}, ReachCtx{1.0, "m1", std::nullopt}, {});
                 return value_is(j, rule::Malloc, AbstractValue::address(AbstractAddress{"m1", MallocSite{3}, 0}));
               }});
  g.push_back({rule::Plus, [] {
                 AliasType P;
                 P.set(v("q_1"), {{addr("arr", 2), 1.0}});
                 return eval_is("q_1 + 3", P, 1.0, "m0", rule::Plus, at("arr", 5));
               }});
  g.push_back({rule::Md, [] {
                 AliasType P;
                 P.set(v("x_2"), {{v("x_1"), 0.6}});
                 P.set(v("x_1"), {{v("x_3"), 0.2}});
                 AliasType want = P;
                 want.set(v("x_1"), {{v("x_3"), 0.6}, {v("x_2"), 0.4}});
                 return transfer_is("x_1 := md(x_2);", P, rule::Md, want);
               }});
  g.push_back({rule::Fi, [] {
                 AliasType P;
                 P.set(v("x_1"), {{addr("a"), 0.7}});
                 P.set(v("x_2"), {{addr("b"), 1.0 - 0.7}});
                 AliasType want = P;
                 want.set(v("x_3"), {{v("x_1"), 0.7}, {v("x_2"), 1.0 - 0.7}});
                 return transfer_is("x_3 := fi(x_1, x_2);", P, rule::Fi, want, 0.7);
               }});
  g.push_back({rule::AddrVar, [] {
                 AliasType want;
                 want.set(v("x_1"), {{addr("arr"), 1.0}});
                 return transfer_is("x_1 := &arr;", {}, rule::AddrVar, want);
               }});
  g.push_back({rule::Mu, [xa] { return transfer_is("mu(x_1);", xa, rule::Mu, xa); }});
  g.push_back({rule::AddrField, [] {
                 AliasType want;
                 want.set(addr("a"), {{addr("b", 2), 1.0}});
                 return transfer_is("a->f := &b;", {}, rule::AddrField, want);
               }});
  g.push_back({rule::AddrDeref, [] {
                 AliasType P;
                 P.set(v("x_1"), {{addr("A"), 0.6}, {addr("B"), 0.4}});
                 AliasType want = P;
                 want.set(addr("A"), {{addr("b"), 0.6}});
                 want.set(addr("B"), {{addr("b"), 0.4}});
                 return transfer_is("[x_1] := &b;", P, rule::AddrDeref, want);
               }});
  g.push_back({rule::LoadDeref, [] {
                 AliasType P;
                 P.set(v("x_1"), {{addr("A"), 0.3}, {addr("B"), 0.7}});
                 P.set(addr("B"), {{addr("C"), 0.9}});
                 AliasType want = P;
                 want.set(v("y_1"), {{addr("C"), 0.9}});
                 return transfer_is("y_1 := [x_1];", P, rule::LoadDeref, want);
               }});
  g.push_back({rule::StoreDeref, [] {
                 AliasType P;
                 P.set(v("e_1"), {{addr("E"), 1.0}});
                 P.set(addr("E"), {{addr("B"), 0.9}});
                 P.set(v("x_1"), {{addr("C"), 0.4}});
                 AliasType want = P;
                 want.set(addr("C"), {{addr("B"), 0.4}});
                 return transfer_is("[x_1] := e_1;", P, rule::StoreDeref, want);
               }});
  g.push_back({rule::CopyDeref, [] {
                 // min(0.8, 0.5*0.9) = 0.45, min(0.8, 0.5*0.2) = 0.1
                 AliasType P;
                 P.set(v("x_1"), {{addr("C"), 0.5}});
                 P.set(v("r_1"), {{addr("R"), 1.0}});
                 P.set(addr("R"), {{addr("S"), 0.8}});
                 P.set(addr("S"), {{addr("T"), 0.9}, {addr("U"), 0.2}});
                 AliasType want = P;
                 want.set(addr("C"), {{addr("T"), 0.45}, {addr("U"), 0.1}});
                 return transfer_is("[x_1] := [r_1];", P, rule::CopyDeref, want);
               }});
  g.push_back({rule::Assign, [] {
                 AliasType P;
                 P.set(v("x_1"), {{addr("A"), 1.0}});
                 P.set(addr("A"), {{addr("B"), 0.7}});
                 AliasType want = P;
                 want.set(v("y_1"), {{addr("B"), 0.7}});
                 return transfer_is("y_1 := x_1;", P, rule::Assign, want);
               }});
  g.push_back({rule::Seq, [] {
                 AliasType want;
                 want.set(v("x_1"), {{addr("a"), 1.0}});
                 want.set(addr("a"), {{addr("b"), 1.0}});
                 return transfer_is("x_1 := &a;\n[x_1] := &b;", {}, rule::Seq, want);
               }});
  g.push_back({rule::RunStmt, [] () -> std::optional<std::string> {
                 Program p = program("run (m1) { x_1 := &s; [x_1] := malloc(); }");
                 auto t = transfer_stmt(p, p.body, {}, ReachCtx{1.0, "m0", std::nullopt}, {});
                 AliasType want;
                 want.set(v("x_1"), {{addr("s", 0, "m1"), 1.0}});
                 want.set(addr("s", 0, "m1"), {});
                 if (auto e = post_is(t, rule::RunStmt, want)) return e;
                 const Derivation& store = t.derivation.premises.at(0).premises.at(1);
                 if (store.premises.at(0).inputs["machine"] != "m1") return "malloc not placed on m1";
                 return std::nullopt;
               }});
  g.push_back({rule::If, [] {
                 AliasType want;
                 want.set(v("x_1"), {{addr("a"), 0.7}});
                 want.set(v("x_2"), {{addr("b"), 1.0 - 0.7}});
                 return transfer_is("if c @0.7 then { x_1 := &a; } else { x_2 := &b; }", {}, rule::If, want);
               }});
  g.push_back({rule::While, [xa] {
                 AliasType want = xa;
                 want.set(addr("a"), {{addr("b"), 1.0}});
                 return transfer_is("while c @(0.8, 2) do { [x_1] := &b; }", xa, rule::While, want);
               }});
  return g;
}

Outcome golden_suite() {
  auto g = golden_instances();
  std::set<std::string> covered;
  int ok = 0;
  for (const auto& inst : g) {
    std::optional<std::string> err;
    try {
      err = inst.check();
    } catch (const std::exception& e) {
      err = std::string("threw: ") + e.what();
    }
    if (err)
      std::cout << "    " << inst.rule << ": " << *err << "\n";
    else
      ++ok;
    covered.insert(inst.rule);
  }
  auto rules = rule::inference_rules();
  bool all = std::all_of(rules.begin(), rules.end(), [&](const std::string& r) { return covered.count(r); });
  return {ok == 24 && g.size() == 24 && all,
          std::to_string(ok) + "/" + std::to_string(rules.size()) + " rule instances" +
              (all ? "" : ", some rules lack an instance")};
}

// ---------------------------------------------------------------------------
// 2. assignment dispatch partition

struct ShapeGen {
  std::mt19937_64 rng;
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  LocExpr loc(int depth) {
    int k = depth >= 3 ? 0 : pick(3);
    if (k == 0) return var_loc("x_" + std::to_string(pick(4)));
    if (k == 1) return LocExpr{LocExpr::Field{loc(depth + 1), v("y")}, {}};
    return LocExpr{LocExpr::Deref{loc(depth + 1)}, {}};
  }

  Expr expr(int depth) {
    int k = depth >= 2 ? pick(3) : pick(8);
    switch (k) {
      case 0: return Expr{Expr::Loc{loc(depth + 1)}, {}};
      case 1: return Expr{Expr::AddrOf{loc(depth + 1)}, {}};
      case 2: return Expr{Expr::IntLit{pick(10)}, {}};
      case 3: return Expr{Expr::Malloc{pick(5)}, {}};
      case 4: return Expr{Expr::BinOp{static_cast<BinaryOp>(pick(3)), expr(depth + 1), expr(depth + 1)}, {}};
      case 5: return Expr{Expr::Run{expr(depth + 1), "m1"}, {}};
      case 6: return Expr{Expr::ReformAliasToInt{"m0", expr(depth + 1)}, {}};
      default: return Expr{Expr::ReformIntToInt{"m0", "m1", expr(depth + 1)}, {}};
    }
  }
};

Outcome dispatch_partition() {
  ShapeGen gen{std::mt19937_64(20240611)};
  const AssignRule all[] = {AssignRule::AddrField,  AssignRule::AddrDeref,  AssignRule::AddrVar, AssignRule::CopyDeref,
                            AssignRule::LoadDeref, AssignRule::StoreDeref, AssignRule::Assign};
  std::map<std::string, int> hits;
  int doubles = 0, none = 0, misclassified = 0;
  for (int i = 0; i < 1000; ++i) {
    Stmt::Assign a{gen.loc(0), gen.expr(0)};
    int n = 0;
    std::optional<AssignRule> fired;
    for (AssignRule r : all)
      if (assign_rule_applies(r, a)) {
        ++n;
        fired = r;
      }
    if (n > 1) ++doubles;
    if (n == 0) ++none;
    if (n == 1) {
      if (classify_assign(a) != *fired) ++misclassified;
      ++hits[assign_rule_label(*fired)];
    }
  }
  std::string dist;
  for (const auto& [r, n] : hits) dist += (dist.empty() ? "" : " ") + r + "=" + std::to_string(n);
  bool ok = doubles == 0 && none == 0 && misclassified == 0 && hits.size() == 7;
  return {ok, "1000 statements, " + std::to_string(doubles) + " double-fires, " + std::to_string(none) +
                  " no-fires, " + std::to_string(misclassified) + " dispatcher disagreements (" + dist + ")"};
}

// ---------------------------------------------------------------------------
// 3. argmax against brute-force enumeration

struct AliasGen {
  std::mt19937_64 rng;
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  // Coarse grid so ties are common.
  double prob() { return (1 + pick(10)) / 10.0; }

  PairSet set(const std::vector<AbstractAddress>& pool, int maxSize) {
    PairSet s;
    int n = pick(maxSize + 1);
    for (int i = 0; i < n; ++i) s[pool[pick(static_cast<int>(pool.size()))]] = prob();
    return s;
  }
};

// Candidates (joint, target, index); best has the highest joint, ties broken
// by `earlier`.
template <class Cand, class Earlier>
std::optional<Cand> best_of(const std::vector<Cand>& cands, Earlier earlier) {
  std::optional<Cand> best;
  for (const auto& c : cands)
    if (!best || c.joint > best->joint || (c.joint == best->joint && earlier(c, *best))) best = c;
  return best;
}

struct Cand {
  double joint;
  AliasKey target;
  std::size_t index;
};

std::optional<std::string> agree(const std::string& what, const std::function<AbstractValue()>& run,
                                 const std::optional<AbstractValue>& expected) {
  std::optional<AbstractValue> got;
  std::string code;
  try {
    got = run();
  } catch (const AnalysisError& e) {
    code = e.code();
  }
  if (got.has_value() != expected.has_value() || (got && !(*got == *expected)))
    return what + ": analysis " + (got ? got->str() : code) + ", oracle " + (expected ? expected->str() : "error");
  return std::nullopt;
}

Outcome argmax_oracle() {
  AliasGen gen{std::mt19937_64(77)};
  std::vector<AbstractAddress> pool;
  for (const char* r : {"A", "B", "C", "D", "E", "F"}) pool.push_back(addr(r));
  int checks = 0, mismatches = 0;
  std::string first;
  auto note = [&](std::optional<std::string> e) {
    ++checks;
    if (e) {
      ++mismatches;
      if (first.empty()) first = *e;
    }
  };

  for (int i = 0; i < 1000; ++i) {
    AliasType P;
    PairSet l = gen.set(pool, 4), y = gen.set(pool, 4);
    P.set(v("l_1"), l);
    P.set(v("y"), y);
    for (const auto& a : pool)
      if (gen.pick(5)) P.set(a, gen.set(pool, 4));

    // var: every pair is a candidate.
    {
      std::vector<Cand> c;
      std::size_t k = 0;
      for (const auto& [t, p] : l) c.push_back({p, t, k++});
      auto b = best_of(c, [](const Cand& x, const Cand& y) { return x.target < y.target; });
      std::optional<AbstractValue> want =
          b ? AbstractValue::address(std::get<AbstractAddress>(b->target)) : AbstractValue::bottom();
      note(agree("var", [&] { return resolve_var(v("l_1"), P).value; }, want));
    }
    // field: the j-th pair of P(l) against the j-th pair of P(y), when l's
    // j-th target occurs in P(y).
    {
      std::vector<std::pair<AliasKey, double>> lv(l.begin(), l.end()), yv(y.begin(), y.end());
      std::vector<Cand> c;
      for (std::size_t j = 0; j < std::min(lv.size(), yv.size()); ++j) {
        bool witnessed = false;
        for (const auto& [t, q] : yv) witnessed = witnessed || t == lv[j].first;
        if (witnessed) c.push_back({lv[j].second * yv[j].second, yv[j].first, j});
      }
      auto b = best_of(c, [](const Cand& x, const Cand& y) { return x.index < y.index; });
      std::optional<AbstractValue> want;
      if (b) want = AbstractValue::address(std::get<AbstractAddress>(b->target));
      note(agree("field", [&] { return resolve_field(decls(), var_loc("l_1"), v("y"), P).value; }, want));
    }
    // deref: every (a, b) with a in P(l) and b in P(a).
    {
      std::vector<Cand> c;
      bool unbound = false;
      for (const auto& [a, p] : l) {
        const PairSet* inner = P.get(a);
        if (!inner) {
          unbound = true;
          continue;
        }
        for (const auto& [b, q] : *inner) c.push_back({p * q, b, 0});
      }
      auto b = best_of(c, [](const Cand& x, const Cand& y) { return x.target < y.target; });
      std::optional<AbstractValue> want;
      if (b && !unbound) want = AbstractValue::address(std::get<AbstractAddress>(b->target));
      note(agree("deref", [&] { return resolve_deref(decls(), var_loc("l_1"), P).value; }, want));
    }
  }
  return {mismatches == 0, std::to_string(checks) + " resolutions over 1000 alias types, " +
                               std::to_string(checks - mismatches) + " agree" + (first.empty() ? "" : "; " + first)};
}

// ---------------------------------------------------------------------------
// 4. support soundness over the corpus

unsigned workers() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

Outcome soundness() {
  std::uint64_t runs = 0, failed = 0, violating = 0;
  std::string first;
  auto entries = testing::corpus();
  for (const auto& e : entries) {
    Program p = parse(e.source);
    AliasType P = analyze(p).final;
    SampleOptions o;
    o.runs = 1000;
    o.expected = &P;
    o.threads = workers();
    auto d = sample(p, o);
    runs += d.runs;
    failed += d.failed;
    violating += d.violatingRuns;
    if (first.empty() && !d.violations.empty())
      first = e.name + " seed " + std::to_string(d.violations[0].first) + ": " + d.violations[0].second.key +
              " holds " + d.violations[0].second.value;
    if (first.empty() && d.failed) first = e.name + ": " + d.errors.begin()->first;
  }
  return {violating == 0 && failed == 0,
          std::to_string(entries.size()) + " programs x 1000 seeds, " + std::to_string(runs - failed) +
              " runs completed, " + std::to_string(violating) + " violating" + (first.empty() ? "" : "; " + first)};
}

// ---------------------------------------------------------------------------
// 5. calibration of fi frequencies

Outcome calibration() {
  bool ok = true;
  std::ostringstream s;
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    Program prog = parse(testing::calibration_program(p));
    AliasType P = analyze(prog).final;
    double analyzed = P.get(v("x_3"))->at(v("x_1"));
    SampleOptions o;
    o.runs = 1000;
    o.baseSeed = 1;
    o.threads = workers();
    auto d = sample(prog, o);
    const auto& [first, total] = d.phis.begin()->second;
    double observed = static_cast<double>(first) / static_cast<double>(total);
    double tol = 3 * std::sqrt(p * (1 - p) / 1000);
    bool in = total == 1000 && std::abs(observed - analyzed) <= tol;
    ok = ok && in;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%sp=%.1f: %.3f vs %.3f (tol %.4f)%s", s.tellp() ? ", " : "", p, observed,
                  analyzed, tol, in ? "" : " OUT");
    s << buf;
  }
  return {ok, s.str()};
}

// ---------------------------------------------------------------------------
// 6. certificate round trip and mutation

void collect_nodes(json& n, std::vector<json*>& out) {
  out.push_back(&n);
  for (auto& p : n["premises"]) collect_nodes(p, out);
}

void collect_probabilities(json& j, std::vector<json*>& out, bool top = true) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    char* end = nullptr;
    double d = std::strtod(s.c_str(), &end);
    if (!s.empty() && *end == '\0' && d >= 0 && d <= 1) out.push_back(&j);
  } else if (j.is_structured()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!(top && j.is_object() && it.key() == "at")) collect_probabilities(*it, out, false);
  }
}

// Changes one node; returns the kind of change, or "" if the node offered
// nothing of that kind.
std::string mutate(json& node, int kind, std::mt19937_64& rng) {
  auto labels = rule::all_rules();
  switch (kind) {
    case 0: {
      std::string r = node["rule"];
      std::string to;
      do to = labels[rng() % labels.size()];
      while (to == r);
      node["rule"] = to;
      return "rule";
    }
    case 1:
      if (node["premises"].empty()) return "";
      node["premises"].erase(rng() % node["premises"].size());
      return "drop-premise";
    case 2:
      if (node["premises"].empty()) return "";
      node["premises"].push_back(node["premises"][rng() % node["premises"].size()]);
      return "extra-premise";
    case 3: {
      std::string a = node["inputs"]["at"];
      node["inputs"]["at"] = std::to_string(1 + rng() % 40) + ":" + std::to_string(1 + rng() % 40);
      return node["inputs"]["at"] == a ? "" : "position";
    }
    case 4:
    case 5: {
      std::vector<json*> probs;
      collect_probabilities(node["conclusion"], probs);
      collect_probabilities(node["inputs"], probs);
      if (probs.empty()) return "";
      json* p = probs[rng() % probs.size()];
      double d = std::strtod(p->get<std::string>().c_str(), nullptr);
      double e = d >= 0.5 ? d - 0.01 * (1 + rng() % 10) : d + 0.01 * (1 + rng() % 10);
      *p = format_probability(e);
      return "probability";
    }
    default:
      if (!node["conclusion"].contains("update")) return "";
      node["conclusion"]["update"]["q_99"] = {{"m0:zz[0]", "1"}};
      return "extra-update";
  }
}

Outcome pcc() {
  auto entries = testing::corpus();
  std::vector<std::pair<Program, json>> certs;
  int accepted = 0;
  std::string first;
  for (const auto& e : entries) {
    Program p = parse(e.source);
    json c = json::parse(serialize_certificate(export_certificate(analyze(p), p, {})));
    Verdict v = check_certificate(c, p, {});
    if (v.accepted)
      ++accepted;
    else if (first.empty())
      first = e.name + ": " + v.str();
    certs.emplace_back(std::move(p), std::move(c));
  }

  std::mt19937_64 rng(4242);
  std::map<std::string, int> kinds;
  int rejected = 0, tried = 0;
  while (tried < 200) {
    auto& [p, c] = certs[rng() % certs.size()];
    json m = c;
    std::vector<json*> nodes;
    collect_nodes(m["derivation"], nodes);
    json& node = *nodes[rng() % nodes.size()];
    std::string kind = mutate(node, static_cast<int>(rng() % 7), rng);
    if (kind.empty() || m == c) continue;
    ++tried;
    ++kinds[kind];
    Verdict v = check_certificate(m, p, {});
    if (!v.accepted)
      ++rejected;
    else if (first.empty())
      first = "accepted a " + kind + " mutation";
  }
  std::string dist;
  for (const auto& [k, n] : kinds) dist += (dist.empty() ? "" : " ") + k + "=" + std::to_string(n);
  return {accepted == static_cast<int>(entries.size()) && rejected == 200,
          std::to_string(accepted) + "/" + std::to_string(entries.size()) + " certificates accepted, " +
              std::to_string(rejected) + "/200 mutations rejected (" + dist + ")" +
              (first.empty() ? "" : "; " + first)};
}

// ---------------------------------------------------------------------------
// 7. determinism

std::filesystem::path scratch() {
  auto dir = std::filesystem::temp_directory_path() / ("paa_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

std::string cli_out(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int rc = run_cli(args, out, err);
  return std::to_string(rc) + "\n" + out.str();
}

Outcome determinism() {
  int compared = 0, differing = 0;
  std::string first;
  auto same = [&](const std::string& what, const std::string& a, const std::string& b) {
    ++compared;
    if (a != b) {
      ++differing;
      if (first.empty()) first = what;
    }
  };
  for (const auto& e : testing::corpus()) {
    auto file = (scratch() / (e.name + ".sdl")).string();
    std::ofstream(file) << e.source;
    for (const char* fmt : {"text", "structured"})
      same(e.name + " analyze", cli_out({"analyze", file, "--format", fmt}), cli_out({"analyze", file, "--format", fmt}));
    same(e.name + " prove", cli_out({"prove", file}), cli_out({"prove", file}));
    Program p = parse(e.source);
    for (std::uint64_t seed : {0u, 17u, 123456789u}) {
      RunConfig rc;
      rc.seed = seed;
      same(e.name + " run", interpret(p, rc).to_json().dump(), interpret(p, rc).to_json().dump());
      same(e.name + " run (cli)", cli_out({"run", file, "--seed", std::to_string(seed), "--format", "structured"}),
           cli_out({"run", file, "--seed", std::to_string(seed), "--format", "structured"}));
    }
  }
  std::filesystem::remove_all(scratch());
  return {differing == 0, std::to_string(compared) + " repeated invocations, " + std::to_string(differing) +
                              " differ" + (first.empty() ? "" : "; first: " + first)};
}

// ---------------------------------------------------------------------------
// 8. performance

std::string straight_line(int statements) {
  std::ostringstream s;
  s << "machines { m0 }\n";
  for (int r = 0; r < 10; ++r) s << "var r" << r << " on m0[16];\n";
  s << "begin m0 {\n";
  for (int k = 0; k < statements / 4; ++k) {
    s << "  p_" << k << " := &r" << k % 10 << ";\n";
    s << "  [p_" << k << "] := &r" << (k + 1) % 10 << ";\n";
    s << "  q_" << k << " := [p_" << k << "];\n";
    s << "  t_" << k << " := p_" << k << " + 1;\n";
  }
  s << "}\n";
  return s.str();
}

Outcome performance() {
  std::string src = straight_line(1000);
  auto file = (scratch() / "straight1000.sdl").string();
  std::ofstream(file) << src;
  auto t0 = std::chrono::steady_clock::now();
  std::string out = cli_out({"analyze", file, "--format", "structured"});
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  std::filesystem::remove_all(scratch());

  Program p = parse(src);
  auto t1 = std::chrono::steady_clock::now();
  auto r = analyze(p);
  double core = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t1).count();
  bool ran = out.rfind("0\n", 0) == 0 && r.perPoint.size() == 1000;
  char buf[128];
  std::snprintf(buf, sizeof buf, "1000 statements: analyze command %.1f ms (analysis alone %.1f ms)", ms, core);
  return {ran && ms < 1000.0, std::string(buf) + (ran ? "" : ", analysis did not complete")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "rule-conformance golden suite", golden_suite},
      {2, "assignment dispatch partition", dispatch_partition},
      {3, "argmax oracle", argmax_oracle},
      {4, "support soundness over the corpus", soundness},
      {5, "fi probability calibration", calibration},
      {6, "certificate round trip and mutation", pcc},
      {7, "determinism", determinism},
      {8, "performance", performance},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << "  " << c.name << ": " << o.summary << std::endl;
  }
  std::cout << (8 - failed) << "/8 criteria pass\n";
  return failed ? 1 : 0;
}
