// Certificate checker. Deliberately does not call into the analysis engine:
// each rule is re-stated here over the shared data model, and every node of
// the certificate is compared against what the rule yields at that point.
#include <algorithm>

#include "paa/pcc/certificate.hpp"
#include "paa/syntax/parser.hpp"

namespace paa {

using nlohmann::json;

namespace {

struct Reject {
  std::string reason;
  std::string path;
  std::string detail;
};

[[noreturn]] void mismatch(const std::string& path, std::string detail) {
  throw Reject{"node-mismatch", path, std::move(detail)};
}

struct Ctx {
  double reach;
  std::string machine;
};

class Checker {
 public:
  Checker(const Program& p, const AnalysisConfig& cfg) : prog_(p), cfg_(cfg) {}

  AliasType state;

  void stmt(const Stmt& s, const json& n, const std::string& path, const Ctx& ctx) {
    std::visit([&](const auto& node) { check(node, s, n, path, ctx); }, s.node);
    bool joinSurvives = std::holds_alternative<Stmt::Phi>(s.node) || std::holds_alternative<Stmt::Seq>(s.node) ||
                        std::holds_alternative<Stmt::If>(s.node) || std::holds_alternative<Stmt::While>(s.node);
    if (!joinSurvives) join_.reset();
  }

 private:
  const Program& prog_;
  const AnalysisConfig& cfg_;
  std::optional<double> join_;

  // ---- node plumbing ----

  static const json& open(const json& n, const std::string& path, const char* rule, std::size_t premises) {
    if (!n.is_object() || n.size() != 4 || !n.contains("rule") || !n["rule"].is_string() ||
        !n.contains("premises") || !n["premises"].is_array() || !n.contains("inputs") || !n["inputs"].is_object() ||
        !n.contains("conclusion") || !n["conclusion"].is_object())
      throw Reject{"malformed", path, "node needs exactly rule, premises, inputs, conclusion"};
    if (n["rule"].get<std::string>() != rule)
      mismatch(path + "/rule", "expected " + std::string(rule) + ", found " + n["rule"].get<std::string>());
    if (n["premises"].size() != premises)
      mismatch(path + "/premises", "expected " + std::to_string(premises) + " premises, found " +
                                       std::to_string(n["premises"].size()));
    return n["premises"];
  }

  static std::string sub(const std::string& path, std::size_t i) { return path + "/premises/" + std::to_string(i); }

  static void expect(const json& n, const std::string& path, const char* field, const json& want) {
    if (n[field] != want) mismatch(path + "/" + field, "expected " + want.dump() + ", found " + n[field].dump());
  }

  static json at(Span s) { return json{{"at", s.str()}}; }

  void set(AliasType& t, const AliasKey& k, PairSet s, const std::string& path) {
    try {
      t.set(k, std::move(s));
    } catch (const std::logic_error& e) {
      mismatch(path, e.what());
    }
  }

  void commit(const json& n, const std::string& path, const AliasType& update) {
    expect(n, path, "conclusion", json{{"update", to_json(update)}});
    for (const auto& [k, s] : update.entries()) state.set(k, s);
  }

  // ---- data model helpers ----

  AbstractAddress base_of(const LocExpr& l, const std::string& path) const {
    const VarDecl* d = prog_.find_decl(l.root().name);
    if (!d) mismatch(path, "no region for '" + l.root().name + "'");
    return AbstractAddress{d->machine, d->name, 0};
  }

  AliasKey key_of(const LocExpr& l, const std::string& path) const {
    const LocExpr* cur = &l;
    while (auto* d = std::get_if<LocExpr::Deref>(&cur->node)) cur = &*d->inner;
    if (auto* v = std::get_if<LocExpr::Var>(&cur->node)) return v->var;
    return base_of(*cur, path);
  }

  const PairSet& lookup(const AliasKey& k, const std::string& path) const {
    const PairSet* s = state.get(k);
    if (!s) mismatch(path, "'" + key_str(k) + "' has no entry in the alias type");
    return *s;
  }

  void machine(const std::string& m, const std::string& path) const {
    if (!prog_.machines.contains(m)) mismatch(path, "unknown machine '" + m + "'");
  }

  // First target with the highest probability; targets iterate in key order.
  static const AliasKey* top(const PairSet& s) {
    double hi = -1.0;
    for (const auto& [t, p] : s) hi = std::max(hi, p);
    for (const auto& [t, p] : s)
      if (p == hi) return &t;
    return nullptr;
  }

  // Caller has already opened `n` with one premise iff `t` is a variable.
  AbstractValue reach_target(const AliasKey& t, const json& n, const std::string& path, Span where,
                             std::vector<SsaVar>& chain) {
    json c{{"target", key_str(t)}};
    AbstractValue v = AbstractValue::bottom();
    if (auto* x = std::get_if<SsaVar>(&t))
      v = var(*x, where, n["premises"][0], sub(path, 0), chain);
    else
      v = AbstractValue::address(std::get<AbstractAddress>(t));
    c["value"] = v.str();
    expect(n, path, "conclusion", c);
    return v;
  }

  // ---- locations ----

  AbstractValue var(const SsaVar& x, Span where, const json& n, const std::string& path, std::vector<SsaVar>& chain) {
    if (std::count(chain.begin(), chain.end(), x)) mismatch(path, "alias cycle through '" + x.str() + "'");
    const PairSet& s = lookup(x, path);
    json in = at(where);
    in["var"] = x.str();
    const AliasKey* t = top(s);
    if (!t) {
      open(n, path, rule::Var, 0);
      expect(n, path, "inputs", in);
      expect(n, path, "conclusion", json{{"value", "bot"}});
      return AbstractValue::bottom();
    }
    open(n, path, rule::Var, std::holds_alternative<SsaVar>(*t) ? 1 : 0);
    expect(n, path, "inputs", in);
    chain.push_back(x);
    AbstractValue v = reach_target(*t, n, path, where, chain);
    chain.pop_back();
    return v;
  }

  AbstractValue field(const LocExpr& base, const SsaVar& y, Span where, const json& n, const std::string& path) {
    const PairSet& ls = lookup(key_of(base, path), path);
    const PairSet& ys = lookup(y, path);
    std::vector<std::pair<AliasKey, double>> lv(ls.begin(), ls.end()), yv(ys.begin(), ys.end());
    const AliasKey* best = nullptr;
    double hi = -1.0;
    for (std::size_t j = 0; j < std::min(lv.size(), yv.size()); ++j) {
      if (!ys.count(lv[j].first)) continue;
      if (lv[j].second * yv[j].second > hi) {
        hi = lv[j].second * yv[j].second;
        best = &ys.find(yv[j].first)->first;
      }
    }
    if (!best) mismatch(path, "no witness for field '" + y.str() + "'");
    open(n, path, rule::Field, std::holds_alternative<SsaVar>(*best) ? 1 : 0);
    json in = at(where);
    in["field"] = y.str();
    expect(n, path, "inputs", in);
    std::vector<SsaVar> chain;
    return reach_target(*best, n, path, where, chain);
  }

  AbstractValue deref(const LocExpr& inner, Span where, const json& n, const std::string& path) {
    const PairSet& ls = lookup(key_of(inner, path), path);
    const AliasKey* best = nullptr;
    double hi = -1.0;
    for (const auto& [a, p] : ls)
      for (const auto& [b, q] : lookup(a, path)) {
        double joint = p * q;
        if (joint > hi || (joint == hi && b < *best)) {
          hi = joint;
          best = &b;
        }
      }
    if (!best) mismatch(path, "nothing to dereference");
    open(n, path, rule::Deref, std::holds_alternative<SsaVar>(*best) ? 1 : 0);
    expect(n, path, "inputs", at(where));
    std::vector<SsaVar> chain;
    return reach_target(*best, n, path, where, chain);
  }

  AbstractValue loc(const LocExpr& l, Span where, const json& n, const std::string& path) {
    std::vector<SsaVar> chain;
    if (auto* v = std::get_if<LocExpr::Var>(&l.node)) return var(v->var, where, n, path, chain);
    if (auto* f = std::get_if<LocExpr::Field>(&l.node)) return field(*f->base, f->field, where, n, path);
    return deref(*std::get<LocExpr::Deref>(l.node).inner, where, n, path);
  }

  // ---- expressions ----

  AbstractValue expr(const Expr& e, const json& n, const std::string& path, const Ctx& ctx) {
    AbstractValue v = std::visit([&](const auto& node) { return value(node, e, n, path, ctx); }, e.node);
    if (!std::holds_alternative<Expr::Loc>(e.node)) expect(n, path, "conclusion", json{{"value", v.str()}});
    return v;
  }

  AbstractValue value(const Expr::Loc& l, const Expr& e, const json& n, const std::string& path, const Ctx&) {
    return loc(l.loc, e.span, n, path);
  }

  AbstractValue value(const Expr::IntLit& i, const Expr& e, const json& n, const std::string& path, const Ctx&) {
    open(n, path, rule::IntLit, 0);
    expect(n, path, "inputs", at(e.span));
    return AbstractValue::integer(i.value);
  }

  AbstractValue value(const Expr::BinOp& b, const Expr& e, const json& n, const std::string& path, const Ctx& ctx) {
    const json& ps = open(n, path, rule::Plus, 2);
    json in = at(e.span);
    in["op"] = binary_op_symbol(b.op);
    expect(n, path, "inputs", in);
    AbstractValue l = expr(*b.lhs, ps[0], sub(path, 0), ctx);
    AbstractValue r = expr(*b.rhs, ps[1], sub(path, 1), ctx);
    auto* li = std::get_if<AbstractValue::Int>(&l.v);
    auto* ri = std::get_if<AbstractValue::Int>(&r.v);
    if (li && ri) {
      switch (b.op) {
        case BinaryOp::Add: return AbstractValue::integer(li->n + ri->n);
        case BinaryOp::Sub: return AbstractValue::integer(li->n - ri->n);
        case BinaryOp::Mul: return AbstractValue::integer(li->n * ri->n);
      }
    }
    if (l.addr() && ri && b.op != BinaryOp::Mul) {
      AbstractAddress a = *l.addr();
      a.offset += b.op == BinaryOp::Add ? ri->n : -ri->n;
      return AbstractValue::address(a);
    }
    if (li && r.addr() && b.op == BinaryOp::Add) {
      AbstractAddress a = *r.addr();
      a.offset += li->n;
      return AbstractValue::address(a);
    }
    return AbstractValue::bottom();
  }

  AbstractValue value(const Expr::AddrOf& a, const Expr& e, const json& n, const std::string& path, const Ctx&) {
    open(n, path, rule::AddrOf, 0);
    expect(n, path, "inputs", at(e.span));
    return AbstractValue::address(base_of(a.loc, path));
  }

  AbstractValue value(const Expr::Malloc& m, const Expr& e, const json& n, const std::string& path, const Ctx& ctx) {
    open(n, path, rule::Malloc, 0);
    machine(ctx.machine, path);
    json in = at(e.span);
    in["site"] = m.site;
    in["machine"] = ctx.machine;
    expect(n, path, "inputs", in);
    return AbstractValue::address(AbstractAddress{ctx.machine, MallocSite{m.site}, 0});
  }

  json reach_inputs(Span s, const Ctx& ctx) {
    json in = at(s);
    in["reach"] = format_probability(ctx.reach);
    return in;
  }

  static AbstractValue moved_to(AbstractValue v, const std::string& m) {
    if (const AbstractAddress* a = v.addr()) {
      AbstractAddress b = *a;
      b.machine = m;
      return AbstractValue::address(b);
    }
    return v;
  }

  AbstractValue value(const Expr::Run& r, const Expr& e, const json& n, const std::string& path, const Ctx& ctx) {
    machine(r.machine, path);
    const json& ps = open(n, path, rule::RunExpr, 1);
    json in = reach_inputs(e.span, ctx);
    in["machine"] = r.machine;
    expect(n, path, "inputs", in);
    AbstractValue v = expr(*r.inner, ps[0], sub(path, 0), Ctx{ctx.reach, r.machine});
    return ctx.reach >= cfg_.threshold ? moved_to(v, r.machine) : AbstractValue::bottom();
  }

  AbstractValue value(const Expr::ReformAliasToInt& r, const Expr& e, const json& n, const std::string& path,
                      const Ctx& ctx) {
    machine(r.machine, path);
    bool live = ctx.reach >= cfg_.threshold;
    const json& ps = open(n, path, live ? rule::Reform1 : rule::Reform2, live ? 1 : 0);
    expect(n, path, "inputs", reach_inputs(e.span, ctx));
    return live ? expr(*r.inner, ps[0], sub(path, 0), ctx) : AbstractValue::bottom();
  }

  AbstractValue value(const Expr::ReformIntToInt& r, const Expr& e, const json& n, const std::string& path,
                      const Ctx& ctx) {
    machine(r.from, path);
    machine(r.to, path);
    bool live = ctx.reach >= cfg_.threshold;
    const json& ps = open(n, path, live ? rule::Reform3 : rule::Reform4, live ? 1 : 0);
    expect(n, path, "inputs", reach_inputs(e.span, ctx));
    return live ? moved_to(expr(*r.inner, ps[0], sub(path, 0), ctx), r.to) : AbstractValue::bottom();
  }

  // ---- statements ----

  void block(const Stmt& s, const json& n, const std::string& path, const Ctx& ctx) {
    join_.reset();
    stmt(s, n, path, ctx);
  }

  PairSet pointee(const AbstractValue& v) const {
    const AbstractAddress* a = v.addr();
    const PairSet* s = a ? state.get(*a) : nullptr;
    return s ? *s : PairSet{};
  }

  void check(const Stmt::Skip&, const Stmt& s, const json& n, const std::string& path, const Ctx&) {
    open(n, path, rule::Skip, 0);
    expect(n, path, "inputs", at(s.span));
    expect(n, path, "conclusion", json::object());
  }

  void check(const Stmt::Assign& a, const Stmt& s, const json& n, const std::string& path, const Ctx& ctx) {
    auto* lderef = std::get_if<LocExpr::Deref>(&a.lhs.node);
    auto* lfield = std::get_if<LocExpr::Field>(&a.lhs.node);
    auto* rloc = std::get_if<Expr::Loc>(&a.rhs.node);
    auto* raddr = std::get_if<Expr::AddrOf>(&a.rhs.node);
    auto* rderef = rloc ? std::get_if<LocExpr::Deref>(&rloc->loc.node) : nullptr;

    AliasType update;
    auto lhs_key = [&] { return lfield ? AliasKey{base_of(*lfield->base, path)} : key_of(a.lhs, path); };

    if (raddr) {
      AbstractAddress dst = base_of(raddr->loc, path);
      if (lfield) {
        open(n, path, rule::AddrField, 0);
        dst.offset += prog_.field_offset(lfield->field).value_or(0);
        set(update, base_of(*lfield->base, path), {{dst, 1.0}}, path);
      } else if (lderef) {
        open(n, path, rule::AddrDeref, 0);
        for (const auto& [b, p] : lookup(key_of(*lderef->inner, path), path)) set(update, b, {{dst, p}}, path);
      } else {
        open(n, path, rule::AddrVar, 0);
        set(update, lhs_key(), {{dst, 1.0}}, path);
      }
    } else if (rderef && lderef) {
      const json& ps = open(n, path, rule::CopyDeref, 1);
      AbstractValue src = loc(*rderef->inner, a.rhs.span, ps[0], sub(path, 0));
      PairSet mid = pointee(src);
      for (const auto& [c, q] : lookup(key_of(*lderef->inner, path), path)) {
        PairSet out;
        for (const auto& [b, p] : mid) {
          const PairSet* far = state.get(b);
          if (!far) continue;
          for (const auto& [d, t] : *far) out[d] = std::max(out.count(d) ? out[d] : 0.0, std::min(p, q * t));
        }
        set(update, c, out, path);
      }
    } else if (rderef) {
      const json& ps = open(n, path, rule::LoadDeref, 1);
      AbstractValue src = loc(*rderef->inner, a.rhs.span, ps[0], sub(path, 0));
      set(update, lhs_key(), pointee(src), path);
    } else if (lderef) {
      const json& ps = open(n, path, rule::StoreDeref, 1);
      PairSet from = pointee(expr(a.rhs, ps[0], sub(path, 0), ctx));
      for (const auto& [c, q] : lookup(key_of(*lderef->inner, path), path)) {
        PairSet out;
        for (const auto& [b, p] : from) out[b] = std::min(p, q);
        set(update, c, out, path);
      }
    } else {
      const json& ps = open(n, path, rule::Assign, 1);
      set(update, lhs_key(), pointee(expr(a.rhs, ps[0], sub(path, 0), ctx)), path);
    }
    expect(n, path, "inputs", at(s.span));
    commit(n, path, update);
  }

  void check(const Stmt::Phi& f, const Stmt& s, const json& n, const std::string& path, const Ctx&) {
    open(n, path, rule::Fi, 0);
    double wl = join_ ? *join_ : 0.5;
    double wr = 1.0 - wl;
    json in = at(s.span);
    in["weights"] = json::array({format_probability(wl), format_probability(wr)});
    expect(n, path, "inputs", in);
    AliasType update;
    set(update, f.target, f.left == f.right ? PairSet{{f.left, 1.0}} : PairSet{{f.left, wl}, {f.right, wr}}, path);
    commit(n, path, update);
  }

  void check(const Stmt::Md& m, const Stmt& s, const json& n, const std::string& path, const Ctx&) {
    open(n, path, rule::Md, 0);
    const PairSet* j = state.get(m.source);
    const PairSet* i = state.get(m.target);
    json in = at(s.span);
    AliasType update;
    if (j && i && j->size() == 1 && i->size() == 1 && std::get_if<SsaVar>(&j->begin()->first) &&
        std::get<SsaVar>(j->begin()->first) == m.target) {
      double a = j->begin()->second;
      PairSet out{{i->begin()->first, a}};
      out[m.source] = 1.0 - a;
      set(update, m.target, out, path);
    } else if (cfg_.strictMd) {
      mismatch(path, "md premises do not hold");
    } else {
      in["skipped"] = true;
    }
    expect(n, path, "inputs", in);
    commit(n, path, update);
  }

  void check(const Stmt::Mu&, const Stmt& s, const json& n, const std::string& path, const Ctx&) {
    open(n, path, rule::Mu, 0);
    expect(n, path, "inputs", at(s.span));
    commit(n, path, {});
  }

  void check(const Stmt::Seq& q, const Stmt& s, const json& n, const std::string& path, const Ctx& ctx) {
    const json& ps = open(n, path, rule::Seq, 2);
    expect(n, path, "inputs", at(s.span));
    stmt(*q.first, ps[0], sub(path, 0), ctx);
    stmt(*q.second, ps[1], sub(path, 1), ctx);
    expect(n, path, "conclusion", json{{"entries", state.size()}});
  }

  void check(const Stmt::RunStmt& r, const Stmt& s, const json& n, const std::string& path, const Ctx& ctx) {
    machine(r.machine, path);
    const json& ps = open(n, path, rule::RunStmt, 1);
    json in = at(s.span);
    in["machine"] = r.machine;
    expect(n, path, "inputs", in);
    block(*r.body, ps[0], sub(path, 0), Ctx{ctx.reach, r.machine});
    expect(n, path, "conclusion", json{{"entries", state.size()}});
  }

  // Combination of two alias types at a join, keyed over both domains.
  static AliasType combine(const AliasType& a, const AliasType& b, double wa, bool weighted) {
    AliasType out;
    std::vector<AliasKey> keys;
    for (const auto& [k, s] : a.entries()) keys.push_back(k);
    for (const auto& [k, s] : b.entries()) keys.push_back(k);
    for (const auto& k : keys) {
      if (out.get(k)) continue;
      PairSet sa = a.get(k) ? *a.get(k) : PairSet{};
      PairSet sb = b.get(k) ? *b.get(k) : PairSet{};
      PairSet r;
      for (const auto& [t, p] : sa) r[t] = 0.0;
      for (const auto& [t, p] : sb) r[t] = 0.0;
      for (auto& [t, p] : r) {
        double pa = sa.count(t) ? sa[t] : 0.0;
        double pb = sb.count(t) ? sb[t] : 0.0;
        p = weighted ? wa * pa + (1.0 - wa) * pb : std::max(pa, pb);
      }
      out.set(k, r);
    }
    return out;
  }

  void check(const Stmt::If& f, const Stmt& s, const json& n, const std::string& path, const Ctx& ctx) {
    const json& ps = open(n, path, rule::If, 2);
    json in = at(s.span);
    in["weight"] = format_probability(f.thenProb);
    expect(n, path, "inputs", in);
    AliasType pre = state;
    block(*f.thenBranch, ps[0], sub(path, 0), Ctx{ctx.reach * f.thenProb, ctx.machine});
    AliasType yes = std::move(state);
    state = pre;
    block(*f.elseBranch, ps[1], sub(path, 1), Ctx{ctx.reach * (1.0 - f.thenProb), ctx.machine});
    try {
      state = combine(yes, state, f.thenProb, cfg_.ifMerge == MergeMode::Weighted);
    } catch (const std::logic_error& e) {
      mismatch(path, e.what());
    }
    expect(n, path, "conclusion", json{{"update", to_json(delta(pre, state))}});
    join_ = f.thenProb;
  }

  void check(const Stmt::While& w, const Stmt& s, const json& n, const std::string& path, const Ctx& ctx) {
    bool literal = cfg_.whileMode == WhileMode::Literal;
    std::size_t passes = literal ? (w.expectedIters > 0 ? 1 : 0) : static_cast<std::size_t>(std::max<std::int64_t>(0, w.expectedIters));
    const json& ps = open(n, path, rule::While, passes);
    json in = at(s.span);
    in["iterations"] = w.expectedIters;
    in["mode"] = literal ? "literal" : "iterated";
    expect(n, path, "inputs", in);
    AliasType pre = state;
    AliasType acc = pre;
    Ctx inner{ctx.reach * w.bodyProb, ctx.machine};
    for (std::size_t k = 0; k < passes; ++k) {
      block(*w.body, ps[k], sub(path, k), inner);
      acc = combine(acc, state, 0.5, false);
    }
    if (literal && passes == 1) acc = state;
    state = acc;
    expect(n, path, "conclusion", json{{"update", to_json(delta(pre, state))}});
    join_ = w.bodyProb;
  }
};

const json* member(const json& doc, const char* key) {
  auto it = doc.find(key);
  return it == doc.end() ? nullptr : &*it;
}

}  // namespace

Verdict check_certificate(const json& cert, const Program& p, const AnalysisConfig& cfg) {
  try {
    if (!cert.is_object()) throw Reject{"malformed", "", "certificate is not an object"};
    for (const char* k : {"version", "digest", "config", "final", "derivation"})
      if (!member(cert, k)) throw Reject{"malformed", std::string("/") + k, "missing"};
    if (cert.size() != 5) throw Reject{"malformed", "", "unexpected top-level fields"};
    if (cert["version"] != kCertificateVersion) throw Reject{"malformed", "/version", "unsupported version"};
    if (!cert["digest"].is_string() || cert["digest"].get<std::string>() != program_digest(p))
      throw Reject{"wrong-program", "/digest", "digest does not match the program"};
    if (cert["config"] != cfg.to_json())
      throw Reject{"wrong-config", "/config", "certificate was produced under " + cert["config"].dump()};

    Checker checker(p, cfg);
    const json& root = cert["derivation"];
    if (std::holds_alternative<Stmt::Skip>(p.body.node)) {
      if (!root.is_null()) mismatch("/derivation", "empty program has no derivation");
    } else {
      if (root.is_null()) mismatch("/derivation", "derivation missing");
      checker.stmt(p.body, root, "/derivation", Ctx{1.0, p.entryMachine});
    }
    if (cert["final"] != to_json(checker.state))
      throw Reject{"final-mismatch", "/final", "claimed final alias type differs from the replayed one"};
    return Verdict{true, "", "", ""};
  } catch (const Reject& r) {
    return Verdict{false, r.reason, r.path, r.detail};
  } catch (const json::exception& e) {
    return Verdict{false, "malformed", "", e.what()};
  }
}

}  // namespace paa
