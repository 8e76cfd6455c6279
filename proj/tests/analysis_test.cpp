#include "doctest.h"
#include "paa/analysis/analyzer.hpp"
#include "paa/syntax/parser.hpp"

using namespace paa;

namespace {

AbstractAddress addr(const std::string& region, std::int64_t off = 0, const std::string& m = "m0") {
  return AbstractAddress{m, region, off};
}

SsaVar v(std::string_view s) { return SsaVar::parse(s); }

LocExpr var_loc(std::string_view s) { return LocExpr{LocExpr::Var{v(s)}, {}}; }

const Program& decls() {
  static const Program p = parse(
      "machines { m0 (m1) }\nfield y = 1;\nvar a on m0[4];\nvar b on m0[4];\nvar arr on m0[8];\nbegin m0 { }\n");
  return p;
}

AliasType run(const std::string& body, const AnalysisConfig& cfg = {}) {
  Program p = parse("machines { m0 (m1) }\nvar a on m0[4];\nvar b on m0[4];\nbegin m0 {\n" + body + "\n}\n");
  return analyze(p, cfg).final;
}

std::string code_of(auto&& fn) {
  try {
    fn();
  } catch (const AnalysisError& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("variable resolution takes the most probable target") {
  AliasType P;
  P.set(v("x"), {{addr("A"), 0.3}, {addr("B"), 0.7}});
  auto j = resolve_var(v("x"), P);
  CHECK(j.value == AbstractValue::address(addr("B")));
  CHECK(j.derivation.rule == rule::Var);

  P.set(v("x"), {{addr("A"), 1.0}});
  CHECK(resolve_var(v("x"), P).value == AbstractValue::address(addr("A")));

  P.set(v("x"), {{addr("B"), 0.5}, {addr("A"), 0.5}});
  CHECK(resolve_var(v("x"), P).value == AbstractValue::address(addr("A")));

  CHECK(code_of([&] { resolve_var(v("z"), P); }) == "unbound-location");

  P.set(v("e"), {});
  CHECK(resolve_var(v("e"), P).value.is_bottom());
}

TEST_CASE("variable targets are followed and cycles rejected") {
  AliasType P;
  P.set(v("x_3"), {{v("x_1"), 0.7}, {v("x_2"), 0.3}});
  P.set(v("x_1"), {{addr("a"), 1.0}});
  P.set(v("x_2"), {{addr("b"), 1.0}});
  auto j = resolve_var(v("x_3"), P);
  CHECK(j.value == AbstractValue::address(addr("a")));
  REQUIRE(j.derivation.premises.size() == 1);
  CHECK(j.derivation.conclusion["target"] == "x_1");

  P.set(v("x_1"), {{v("x_3"), 1.0}});
  CHECK(code_of([&] { resolve_var(v("x_3"), P); }) == "cyclic-alias");
}

TEST_CASE("field resolution pairs positions") {
  AliasType P;
  P.set(v("l"), {{addr("A"), 0.8}, {addr("B"), 0.5}});
  P.set(v("y"), {{addr("A"), 0.6}, {addr("B"), 0.9}});
  auto j = resolve_field(decls(), var_loc("l"), v("y"), P);
  CHECK(j.value == AbstractValue::address(addr("A")));
  CHECK(j.derivation.rule == rule::Field);

  P.set(v("l"), {{addr("A"), 1.0}});
  P.set(v("y"), {{addr("A"), 1.0}});
  CHECK(resolve_field(decls(), var_loc("l"), v("y"), P).value == AbstractValue::address(addr("A")));

  P.set(v("l"), {{addr("A"), 0.5}});
  P.set(v("y"), {{addr("C"), 0.9}});
  CHECK(code_of([&] { resolve_field(decls(), var_loc("l"), v("y"), P); }) == "no-witness");
  CHECK(code_of([&] { resolve_field(decls(), var_loc("l"), v("w"), P); }) == "unbound-location");
}

TEST_CASE("dereference resolution maximizes the joint probability") {
  AliasType P;
  P.set(v("l"), {{addr("A"), 0.5}, {addr("B"), 0.5}});
  P.set(addr("A"), {{addr("C"), 0.9}});
  P.set(addr("B"), {{addr("D"), 0.8}});
  auto j = resolve_deref(decls(), var_loc("l"), P);
  CHECK(j.value == AbstractValue::address(addr("C")));
  CHECK(j.derivation.rule == rule::Deref);

  AliasType Q;
  Q.set(v("l"), {{addr("A"), 1.0}});
  Q.set(addr("A"), {{addr("C"), 1.0}});
  CHECK(resolve_deref(decls(), var_loc("l"), Q).value == AbstractValue::address(addr("C")));

  AliasType R;
  R.set(v("l"), {{addr("A"), 0.6}});
  R.set(addr("A"), {});
  CHECK(code_of([&] { resolve_deref(decls(), var_loc("l"), R); }) == "unbound-location");
  R.set(v("l"), {{addr("Z"), 0.6}});
  CHECK(code_of([&] { resolve_deref(decls(), var_loc("l"), R); }) == "unbound-location");
}

TEST_CASE("expression rules") {
  const Program& p = decls();
  AnalysisConfig cfg;
  ReachCtx ctx{1.0, "m1", std::nullopt};

  Expr m{Expr::Malloc{3}, {}};
  auto j = eval_expr(p, m, {}, ctx, cfg);
  CHECK(j.value == AbstractValue::address(AbstractAddress{"m1", MallocSite{3}, 0}));
  CHECK(j.derivation.rule == rule::Malloc);

  Expr reform{Expr::ReformIntToInt{"m0", "m1", Expr{Expr::IntLit{1}, {}}}, {}};
  ReachCtx low{0.4, "m0", std::nullopt};
  auto r = eval_expr(p, reform, {}, low, cfg);
  CHECK(r.value.is_bottom());
  CHECK(r.derivation.rule == rule::Reform4);
  CHECK(eval_expr(p, reform, {}, ctx, cfg).derivation.rule == rule::Reform3);

  AliasType P;
  P.set(v("q"), {{addr("arr", 2), 1.0}});
  Expr sum{Expr::BinOp{BinaryOp::Add, Expr{Expr::Loc{var_loc("q")}, {}}, Expr{Expr::IntLit{3}, {}}}, {}};
  CHECK(eval_expr(p, sum, P, ctx, cfg).value == AbstractValue::address(addr("arr", 5)));

  Diagnostics w;
  Expr twice{Expr::BinOp{BinaryOp::Add, Expr{Expr::Loc{var_loc("q")}, {}}, Expr{Expr::Loc{var_loc("q")}, {}}}, {}};
  CHECK(eval_expr(p, twice, P, ctx, cfg, &w).value.is_bottom());
  REQUIRE(w.size() == 1);
  CHECK(w[0].code == "addr-addr-arith");

  Expr bad{Expr::Run{Expr{Expr::IntLit{0}, {}}, "m9"}, {}};
  CHECK(code_of([&] { eval_expr(p, bad, {}, ctx, cfg); }) == "unknown-machine");
}

TEST_CASE("run expressions re-tag addresses above the threshold") {
  Expr e{Expr::Run{Expr{Expr::AddrOf{var_loc("a")}, {}}, "m1"}, {}};
  AnalysisConfig cfg;
  auto hi = eval_expr(decls(), e, {}, ReachCtx{0.5, "m0", std::nullopt}, cfg);
  CHECK(hi.value == AbstractValue::address(addr("a", 0, "m1")));
  auto lo = eval_expr(decls(), e, {}, ReachCtx{0.49, "m0", std::nullopt}, cfg);
  CHECK(lo.value.is_bottom());
}

TEST_CASE("merge modes") {
  auto one = [](const PairSet& s) {
    AliasType t;
    t.set(v("x"), s);
    return t;
  };
  CHECK(merge(one({{addr("A"), 0.8}}), one({{addr("A"), 0.4}}), 0.5, MergeMode::Weighted) ==
        one({{addr("A"), 0.5 * 0.8 + 0.5 * 0.4}}));
  CHECK(merge(one({{addr("A"), 1.0}}), one({{addr("B"), 1.0}}), 0.7, MergeMode::Weighted) ==
        one({{addr("A"), 0.7}, {addr("B"), 1.0 - 0.7}}));
  CHECK(merge(one({{addr("A"), 0.6}}), one({{addr("A"), 0.2}, {addr("B"), 0.5}}), 0.5, MergeMode::MaxUnion) ==
        one({{addr("A"), 0.6}, {addr("B"), 0.5}}));

  AliasType left = one({{addr("A"), 1.0}});
  AliasType merged = merge(left, AliasType{}, 0.25, MergeMode::Weighted);
  CHECK(*merged.get(v("x")) == PairSet{{addr("A"), 0.25}});
}

TEST_CASE("address-of assignments") {
  auto P = run("x_1 := &a;");
  CHECK(*P.get(v("x_1")) == PairSet{{addr("a"), 1.0}});

  Program p = parse("machines { m0 }\nfield f = 2;\nvar a on m0[4];\nvar b on m0[4];\nbegin m0 { a->f := &b; }\n");
  auto r = analyze(p);
  CHECK(*r.final.get(addr("a")) == PairSet{{addr("b", 2), 1.0}});
  CHECK(r.derivation->rule == rule::AddrField);

  auto Q = run("x_1 := &a;\n[x_1] := &b;");
  CHECK(*Q.get(addr("a")) == PairSet{{addr("b"), 1.0}});
}

TEST_CASE("store through a dereference takes the minimum") {
  Stmt s{Stmt::Assign{LocExpr{LocExpr::Deref{var_loc("l")}, {}}, Expr{Expr::Loc{var_loc("e")}, {}}}, {}};
  AliasType P;
  P.set(v("e"), {{addr("E"), 1.0}});
  P.set(addr("E"), {{addr("B"), 0.9}});
  P.set(v("l"), {{addr("C"), 0.4}});
  auto t = transfer_stmt(decls(), s, P, ReachCtx{1.0, "m0", std::nullopt}, {});
  CHECK(t.derivation.rule == rule::StoreDeref);
  CHECK(*t.post.get(addr("C")) == PairSet{{addr("B"), 0.4}});
}

TEST_CASE("copy through dereferences") {
  Stmt s{Stmt::Assign{LocExpr{LocExpr::Deref{var_loc("l")}, {}},
                      Expr{Expr::Loc{LocExpr{LocExpr::Deref{var_loc("r")}, {}}}, {}}},
         {}};
  AliasType P;
  P.set(v("l"), {{addr("C"), 0.5}});
  P.set(v("r"), {{addr("R"), 1.0}});
  P.set(addr("R"), {{addr("S"), 0.8}});
  P.set(addr("S"), {{addr("T"), 0.9}, {addr("U"), 0.2}});
  auto t = transfer_stmt(decls(), s, P, ReachCtx{1.0, "m0", std::nullopt}, {});
  CHECK(t.derivation.rule == rule::CopyDeref);
  CHECK(*t.post.get(addr("C")) == PairSet{{addr("T"), std::min(0.8, 0.5 * 0.9)}, {addr("U"), std::min(0.8, 0.5 * 0.2)}});
}

TEST_CASE("load through a dereference copies the pointee's set") {
  auto P = run("x_1 := &a;\n[x_1] := &b;\ny_1 := [x_1];");
  CHECK(*P.get(v("y_1")) == PairSet{{addr("b"), 1.0}});
}

TEST_CASE("md rewrites the target") {
  AliasType P;
  P.set(v("x_j"), {{v("x_i"), 0.6}});
  P.set(v("x_i"), {{v("x_k"), 0.2}});
  Stmt s{Stmt::Md{v("x_i"), v("x_j")}, {}};
  ReachCtx ctx{1.0, "m0", std::nullopt};
  auto t = transfer_stmt(decls(), s, P, ctx, {});
  CHECK(*t.post.get(v("x_i")) == PairSet{{v("x_k"), 0.6}, {v("x_j"), 1.0 - 0.6}});

  P.set(v("x_j"), {{v("x_i"), 0.6}, {v("x_k"), 0.4}});
  CHECK(code_of([&] { transfer_stmt(decls(), s, P, ctx, {}); }) == "md-premise");
  AnalysisConfig lenient;
  lenient.strictMd = false;
  Diagnostics w;
  auto l = transfer_stmt(decls(), s, P, ctx, lenient, &w);
  CHECK(l.post == P);
  CHECK(w.size() == 1);
}

TEST_CASE("fi after if uses the branch probabilities") {
  auto P = run("if c @0.7 then { x_1 := &a; } else { x_2 := &b; }\nx_3 := fi(x_1, x_2);");
  CHECK(*P.get(v("x_3")) == PairSet{{v("x_1"), 0.7}, {v("x_2"), 1.0 - 0.7}});
  CHECK(*P.get(v("x_1")) == PairSet{{addr("a"), 0.7}});

  auto Q = run("x_1 := &a;\nx_2 := &b;\nx_3 := fi(x_1, x_2);");
  CHECK(*Q.get(v("x_3")) == PairSet{{v("x_1"), 0.5}, {v("x_2"), 0.5}});

  auto W = run("x_1 := &a;\nwhile c @(0.8, 3) do { x_2 := &b; }\nx_3 := fi(x_2, x_1);");
  CHECK(*W.get(v("x_3")) == PairSet{{v("x_2"), 0.8}, {v("x_1"), 1.0 - 0.8}});
}

TEST_CASE("mu is the identity") {
  auto P = run("x_1 := &a;");
  CHECK(run("x_1 := &a;\nmu(x_1);") == P);
}

TEST_CASE("while modes") {
  std::string body = "x_1 := &a;\nwhile c @(0.9, 2) do { [x_1] := &b; }";
  AnalysisConfig it;
  auto P = run(body, it);
  CHECK(*P.get(addr("a")) == PairSet{{addr("b"), 1.0}});
  AnalysisConfig lit;
  lit.whileMode = WhileMode::Literal;
  CHECK(run(body, lit) == P);

  Program p = parse("machines { m0 }\nvar a on m0[1];\nbegin m0 { while c @(0.5, 0) do { x_1 := &a; } }\n");
  auto r = analyze(p);
  CHECK(r.final.empty());
  CHECK(r.derivation->premises.empty());
  CHECK(analyze(p, lit).final.empty());
}

TEST_CASE("assignment shapes map to exactly one rule") {
  std::vector<LocExpr> lhs = {var_loc("x"), LocExpr{LocExpr::Field{var_loc("a"), v("y")}, {}},
                              LocExpr{LocExpr::Deref{var_loc("x")}, {}}};
  std::vector<Expr> rhs = {Expr{Expr::AddrOf{var_loc("a")}, {}}, Expr{Expr::Loc{LocExpr{LocExpr::Deref{var_loc("x")}, {}}}, {}},
                           Expr{Expr::Loc{var_loc("x")}, {}}, Expr{Expr::Malloc{0}, {}}};
  for (const auto& l : lhs)
    for (const auto& r : rhs) {
      Stmt::Assign a{l, r};
      int hits = 0;
      for (auto k : {AssignRule::AddrField, AssignRule::AddrDeref, AssignRule::AddrVar, AssignRule::CopyDeref,
                     AssignRule::LoadDeref, AssignRule::StoreDeref, AssignRule::Assign})
        hits += assign_rule_applies(k, a);
      CHECK(hits == 1);
      CHECK(assign_rule_applies(classify_assign(a), a));
    }
}

TEST_CASE("per-point states and derivation shape") {
  Program p = parse("machines { m0 (m1) }\nvar a on m0[4];\nbegin m0 {\nx_1 := &a;\nrun (m1) { y_1 := malloc(); }\n}\n");
  auto r = analyze(p);
  REQUIRE(r.derivation);
  CHECK(r.derivation->rule == rule::Seq);
  CHECK(r.derivation->premises[1].rule == rule::RunStmt);
  CHECK(*r.final.get(v("y_1")) == PairSet{});
  CHECK(r.perPoint.at({4, 1}).empty());
  CHECK(r.perPoint.at({5, 1}).size() == 1);
  CHECK(to_json(*r.derivation)["premises"][0]["conclusion"]["update"]["x_1"]["m0:a[0]"] == "1");

  CHECK_FALSE(analyze(parse("machines { m0 }\nbegin m0 { }\n")).derivation);
}
