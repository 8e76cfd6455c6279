#include "paa/analysis/analyzer.hpp"

#include <algorithm>

#include "paa/syntax/parser.hpp"

namespace paa {

using nlohmann::json;

const char* merge_mode_name(MergeMode m) { return m == MergeMode::Weighted ? "weighted" : "max-union"; }
const char* while_mode_name(WhileMode m) { return m == WhileMode::Iterated ? "iterated" : "literal"; }

json AnalysisConfig::to_json() const {
  return json{{"threshold", format_probability(threshold)},
              {"if_merge", merge_mode_name(ifMerge)},
              {"while_mode", while_mode_name(whileMode)},
              {"strict_md", strictMd}};
}

AbstractAddress region_base(const Program& p, const LocExpr& l) {
  const VarDecl* d = p.find_decl(l.root().name);
  if (!d) throw AnalysisError("unknown-region", l.span, "no region is declared for '" + l.root().name + "'");
  return AbstractAddress{d->machine, d->name, 0};
}

AliasKey base_key(const Program& p, const LocExpr& l) {
  if (auto* v = std::get_if<LocExpr::Var>(&l.node)) return v->var;
  if (std::holds_alternative<LocExpr::Field>(l.node)) return region_base(p, l);
  return base_key(p, *std::get<LocExpr::Deref>(l.node).inner);
}

AliasKey store_key(const Program& p, const LocExpr& l) {
  if (std::holds_alternative<LocExpr::Deref>(l.node))
    throw std::logic_error("store_key called on a dereference");
  return base_key(p, l);
}

namespace {

json value_conclusion(const AbstractValue& v) { return json{{"value", v.str()}}; }

Derivation node(const char* rule, Span at, std::vector<Derivation> premises = {}) {
  Derivation d;
  d.rule = rule;
  d.inputs["at"] = at.str();
  d.premises = std::move(premises);
  return d;
}

// Resolves a target reached by a location rule. Variables stand for the
// value they denote, so they are followed through (x^p).
Judgment resolve_var_chain(const SsaVar& x, const AliasType& P, Span at, std::vector<SsaVar>& chain);

Judgment settle(const AliasKey& target, const AliasType& P, Span at, std::vector<SsaVar>& chain,
                Derivation d) {
  d.conclusion["target"] = key_str(target);
  if (auto* v = std::get_if<SsaVar>(&target)) {
    Judgment inner = resolve_var_chain(*v, P, at, chain);
    d.conclusion["value"] = inner.value.str();
    d.premises.push_back(std::move(inner.derivation));
    return Judgment{inner.value, std::move(d)};
  }
  AbstractValue val = AbstractValue::address(std::get<AbstractAddress>(target));
  d.conclusion["value"] = val.str();
  return Judgment{val, std::move(d)};
}

Judgment resolve_var_chain(const SsaVar& x, const AliasType& P, Span at, std::vector<SsaVar>& chain) {
  if (std::find(chain.begin(), chain.end(), x) != chain.end())
    throw AnalysisError("cyclic-alias", at, "variable targets of '" + x.str() + "' form a cycle");
  const PairSet* s = P.get(x);
  if (!s) throw AnalysisError("unbound-location", at, "'" + x.str() + "' is not in the alias type");
  Derivation d = node(rule::Var, at);
  d.inputs["var"] = x.str();
  if (s->empty()) {
    d.conclusion = value_conclusion(AbstractValue::bottom());
    return Judgment{AbstractValue::bottom(), std::move(d)};
  }
  const AliasKey* best = nullptr;
  double bestP = -1.0;
  for (const auto& [t, p] : *s)
    if (p > bestP) {
      best = &t;
      bestP = p;
    }
  chain.push_back(x);
  Judgment j = settle(*best, P, at, chain, std::move(d));
  chain.pop_back();
  return j;
}

}  // namespace

Judgment resolve_var(const SsaVar& x, const AliasType& P, Span at) {
  std::vector<SsaVar> chain;
  return resolve_var_chain(x, P, at, chain);
}

Judgment resolve_field(const Program& prog, const LocExpr& l, const SsaVar& y, const AliasType& P, Span at) {
  AliasKey lk = base_key(prog, l);
  const PairSet* ls = P.get(lk);
  if (!ls) throw AnalysisError("unbound-location", at, "'" + key_str(lk) + "' is not in the alias type");
  const PairSet* ys = P.get(y);
  if (!ys) throw AnalysisError("unbound-location", at, "field '" + y.str() + "' is not in the alias type");

  // The j-th pair of P(l) is joined with the j-th pair of P(y), restricted
  // to the j where l's target also occurs among the targets of P(y).
  const AliasKey* best = nullptr;
  double bestP = -1.0;
  auto li = ls->begin();
  auto yi = ys->begin();
  for (; li != ls->end() && yi != ys->end(); ++li, ++yi) {
    if (!ys->count(li->first)) continue;
    double joint = li->second * yi->second;
    if (joint > bestP) {
      best = &yi->first;
      bestP = joint;
    }
  }
  if (!best)
    throw AnalysisError("no-witness", at,
                        "no target of '" + key_str(lk) + "' occurs among the targets of '" + y.str() + "'");
  Derivation d = node(rule::Field, at);
  d.inputs["field"] = y.str();
  std::vector<SsaVar> chain;
  return settle(*best, P, at, chain, std::move(d));
}

Judgment resolve_deref(const Program& prog, const LocExpr& l, const AliasType& P, Span at) {
  AliasKey lk = base_key(prog, l);
  const PairSet* ls = P.get(lk);
  if (!ls) throw AnalysisError("unbound-location", at, "'" + key_str(lk) + "' is not in the alias type");
  const AliasKey* best = nullptr;
  double bestP = -1.0;
  for (const auto& [a, p] : *ls) {
    const PairSet* inner = P.get(a);
    if (!inner) throw AnalysisError("unbound-location", at, "'" + key_str(a) + "' is not in the alias type");
    for (const auto& [b, q] : *inner) {
      double joint = p * q;
      if (joint > bestP || (joint == bestP && b < *best)) {
        best = &b;
        bestP = joint;
      }
    }
  }
  if (!best) throw AnalysisError("unbound-location", at, "'" + key_str(lk) + "' has no dereferenceable target");
  std::vector<SsaVar> chain;
  return settle(*best, P, at, chain, node(rule::Deref, at));
}

AliasType merge(const AliasType& P1, const AliasType& P2, double w1, MergeMode mode) {
  AliasType out;
  const PairSet empty;
  double w2 = 1.0 - w1;
  auto combine = [&](const AliasKey& k) {
    const PairSet* a = P1.get(k);
    const PairSet* b = P2.get(k);
    if (!a) a = &empty;
    if (!b) b = &empty;
    PairSet s;
    for (const auto& [t, p] : *a) s[t] = 0.0;
    for (const auto& [t, p] : *b) s[t] = 0.0;
    for (auto& [t, p] : s) {
      auto ia = a->find(t);
      auto ib = b->find(t);
      double pa = ia == a->end() ? 0.0 : ia->second;
      double pb = ib == b->end() ? 0.0 : ib->second;
      p = mode == MergeMode::Weighted ? w1 * pa + w2 * pb : std::max(pa, pb);
    }
    out.set(k, std::move(s));
  };
  for (const auto& [k, s] : P1.entries()) combine(k);
  for (const auto& [k, s] : P2.entries())
    if (!P1.get(k)) combine(k);
  return out;
}

const char* assign_rule_label(AssignRule r) {
  switch (r) {
    case AssignRule::AddrField: return rule::AddrField;
    case AssignRule::AddrDeref: return rule::AddrDeref;
    case AssignRule::AddrVar: return rule::AddrVar;
    case AssignRule::CopyDeref: return rule::CopyDeref;
    case AssignRule::LoadDeref: return rule::LoadDeref;
    case AssignRule::StoreDeref: return rule::StoreDeref;
    case AssignRule::Assign: return rule::Assign;
  }
  return "?";
}

namespace {

bool lhs_is_deref(const Stmt::Assign& a) { return std::holds_alternative<LocExpr::Deref>(a.lhs.node); }
bool lhs_is_field(const Stmt::Assign& a) { return std::holds_alternative<LocExpr::Field>(a.lhs.node); }
bool lhs_is_var(const Stmt::Assign& a) { return std::holds_alternative<LocExpr::Var>(a.lhs.node); }
bool rhs_is_addr(const Stmt::Assign& a) { return std::holds_alternative<Expr::AddrOf>(a.rhs.node); }
bool rhs_is_deref(const Stmt::Assign& a) {
  auto* l = std::get_if<Expr::Loc>(&a.rhs.node);
  return l && std::holds_alternative<LocExpr::Deref>(l->loc.node);
}

}  // namespace

bool assign_rule_applies(AssignRule r, const Stmt::Assign& a) {
  switch (r) {
    case AssignRule::AddrField: return lhs_is_field(a) && rhs_is_addr(a);
    case AssignRule::AddrDeref: return lhs_is_deref(a) && rhs_is_addr(a);
    case AssignRule::AddrVar: return lhs_is_var(a) && rhs_is_addr(a);
    case AssignRule::CopyDeref: return lhs_is_deref(a) && rhs_is_deref(a);
    case AssignRule::LoadDeref: return !lhs_is_deref(a) && rhs_is_deref(a);
    case AssignRule::StoreDeref: return lhs_is_deref(a) && !rhs_is_deref(a) && !rhs_is_addr(a);
    case AssignRule::Assign: return !lhs_is_deref(a) && !rhs_is_deref(a) && !rhs_is_addr(a);
  }
  return false;
}

AssignRule classify_assign(const Stmt::Assign& a) {
  if (rhs_is_addr(a)) {
    if (lhs_is_field(a)) return AssignRule::AddrField;
    if (lhs_is_deref(a)) return AssignRule::AddrDeref;
    return AssignRule::AddrVar;
  }
  if (rhs_is_deref(a)) return lhs_is_deref(a) ? AssignRule::CopyDeref : AssignRule::LoadDeref;
  return lhs_is_deref(a) ? AssignRule::StoreDeref : AssignRule::Assign;
}

namespace {

class Engine {
 public:
  using PointMap = std::map<std::pair<std::uint32_t, std::uint32_t>, AliasType>;

  Engine(const Program& prog, const AnalysisConfig& cfg, Diagnostics* warnings, PointMap* points)
      : prog_(prog), cfg_(cfg), warnings_(warnings), points_(points) {}

  std::optional<double> join;

  Judgment eval(const Expr& e, const AliasType& P, const ReachCtx& ctx) {
    return std::visit([&](const auto& n) { return eval_node(n, e, P, ctx); }, e.node);
  }

  Transfer transfer(const Stmt& s, const AliasType& P, const ReachCtx& ctx) {
    if (points_ && !std::holds_alternative<Stmt::Seq>(s.node) && !std::holds_alternative<Stmt::Skip>(s.node)) {
      auto key = std::make_pair(s.span.line, s.span.col);
      auto it = points_->find(key);
      if (it == points_->end())
        points_->emplace(key, P);
      else
        it->second = merge(it->second, P, 0.5, MergeMode::MaxUnion);
    }
    Transfer t = std::visit([&](const auto& n) { return transfer_node(n, s, P, ctx); }, s.node);
    bool keepsJoin = std::holds_alternative<Stmt::Phi>(s.node) || std::holds_alternative<Stmt::Seq>(s.node) ||
                     std::holds_alternative<Stmt::If>(s.node) || std::holds_alternative<Stmt::While>(s.node);
    if (!keepsJoin) join.reset();
    return t;
  }

 private:
  const Program& prog_;
  const AnalysisConfig& cfg_;
  Diagnostics* warnings_;
  PointMap* points_;

  void warn(const char* code, Span at, std::string msg) {
    if (warnings_) warnings_->push_back({Severity::Warning, code, at, std::move(msg)});
  }

  void require_machine(const std::string& m, Span at) const {
    if (!prog_.machines.contains(m)) throw AnalysisError("unknown-machine", at, "unknown machine '" + m + "'");
  }

  // ---- expressions ----

  Judgment eval_node(const Expr::Loc& n, const Expr& e, const AliasType& P, const ReachCtx&) {
    const LocExpr& l = n.loc;
    if (auto* v = std::get_if<LocExpr::Var>(&l.node)) return resolve_var(v->var, P, e.span);
    if (auto* f = std::get_if<LocExpr::Field>(&l.node)) return resolve_field(prog_, *f->base, f->field, P, e.span);
    return resolve_deref(prog_, *std::get<LocExpr::Deref>(l.node).inner, P, e.span);
  }

  Judgment eval_node(const Expr::IntLit& n, const Expr& e, const AliasType&, const ReachCtx&) {
    Derivation d = node(rule::IntLit, e.span);
    AbstractValue v = AbstractValue::integer(n.value);
    d.conclusion = value_conclusion(v);
    return {v, std::move(d)};
  }

  Judgment eval_node(const Expr::BinOp& n, const Expr& e, const AliasType& P, const ReachCtx& ctx) {
    Judgment a = eval(*n.lhs, P, ctx);
    Judgment b = eval(*n.rhs, P, ctx);
    AbstractValue v = AbstractValue::bottom();
    auto* ia = std::get_if<AbstractValue::Int>(&a.value.v);
    auto* ib = std::get_if<AbstractValue::Int>(&b.value.v);
    const AbstractAddress* aa = a.value.addr();
    const AbstractAddress* ab = b.value.addr();
    if (ia && ib) {
      std::int64_t r = n.op == BinaryOp::Add ? ia->n + ib->n : n.op == BinaryOp::Sub ? ia->n - ib->n : ia->n * ib->n;
      v = AbstractValue::integer(r);
    } else if (aa && ab) {
      warn("addr-addr-arith", e.span, "arithmetic on two addresses yields bottom");
    } else if ((aa && ib) || (ia && ab)) {
      if (n.op == BinaryOp::Add || (n.op == BinaryOp::Sub && aa)) {
        AbstractAddress r = aa ? *aa : *ab;
        std::int64_t k = aa ? ib->n : ia->n;
        r.offset += n.op == BinaryOp::Add ? k : -k;
        v = AbstractValue::address(r);
      } else {
        warn("addr-int-arith", e.span, std::string("operator '") + binary_op_symbol(n.op) +
                                           "' on an address yields bottom");
      }
    }
    Derivation d = node(rule::Plus, e.span);
    d.inputs["op"] = binary_op_symbol(n.op);
    d.premises.push_back(std::move(a.derivation));
    d.premises.push_back(std::move(b.derivation));
    d.conclusion = value_conclusion(v);
    return {v, std::move(d)};
  }

  Judgment eval_node(const Expr::AddrOf& n, const Expr& e, const AliasType&, const ReachCtx&) {
    AbstractValue v = AbstractValue::address(region_base(prog_, n.loc));
    Derivation d = node(rule::AddrOf, e.span);
    d.conclusion = value_conclusion(v);
    return {v, std::move(d)};
  }

  Judgment eval_node(const Expr::Malloc& n, const Expr& e, const AliasType&, const ReachCtx& ctx) {
    require_machine(ctx.currentMachine, e.span);
    AbstractValue v = AbstractValue::address(AbstractAddress{ctx.currentMachine, MallocSite{n.site}, 0});
    Derivation d = node(rule::Malloc, e.span);
    d.inputs["site"] = n.site;
    d.inputs["machine"] = ctx.currentMachine;
    d.conclusion = value_conclusion(v);
    return {v, std::move(d)};
  }

  Derivation reach_node(const char* r, Span at, const ReachCtx& ctx) {
    Derivation d = node(r, at);
    d.inputs["reach"] = format_probability(ctx.reachProb);
    return d;
  }

  static AbstractValue retag(AbstractValue v, const std::string& machine) {
    if (auto* a = std::get_if<AbstractValue::Addr>(&v.v)) a->addr.machine = machine;
    return v;
  }

  Judgment eval_node(const Expr::Run& n, const Expr& e, const AliasType& P, const ReachCtx& ctx) {
    require_machine(n.machine, e.span);
    ReachCtx inner = ctx;
    inner.currentMachine = n.machine;
    Judgment j = eval(*n.inner, P, inner);
    AbstractValue v = ctx.reachProb >= cfg_.threshold ? retag(j.value, n.machine) : AbstractValue::bottom();
    Derivation d = reach_node(rule::RunExpr, e.span, ctx);
    d.inputs["machine"] = n.machine;
    d.premises.push_back(std::move(j.derivation));
    d.conclusion = value_conclusion(v);
    return {v, std::move(d)};
  }

  Judgment eval_node(const Expr::ReformAliasToInt& n, const Expr& e, const AliasType& P, const ReachCtx& ctx) {
    require_machine(n.machine, e.span);
    if (ctx.reachProb < cfg_.threshold) {
      Derivation d = reach_node(rule::Reform2, e.span, ctx);
      d.conclusion = value_conclusion(AbstractValue::bottom());
      return {AbstractValue::bottom(), std::move(d)};
    }
    Judgment j = eval(*n.inner, P, ctx);
    Derivation d = reach_node(rule::Reform1, e.span, ctx);
    d.premises.push_back(std::move(j.derivation));
    d.conclusion = value_conclusion(j.value);
    return {j.value, std::move(d)};
  }

  Judgment eval_node(const Expr::ReformIntToInt& n, const Expr& e, const AliasType& P, const ReachCtx& ctx) {
    require_machine(n.from, e.span);
    require_machine(n.to, e.span);
    if (ctx.reachProb < cfg_.threshold) {
      Derivation d = reach_node(rule::Reform4, e.span, ctx);
      d.conclusion = value_conclusion(AbstractValue::bottom());
      return {AbstractValue::bottom(), std::move(d)};
    }
    Judgment j = eval(*n.inner, P, ctx);
    AbstractValue v = retag(j.value, n.to);
    Derivation d = reach_node(rule::Reform3, e.span, ctx);
    d.premises.push_back(std::move(j.derivation));
    d.conclusion = value_conclusion(v);
    return {v, std::move(d)};
  }

  // ---- statements ----

  static PairSet contents(const AbstractValue& v, const AliasType& P) {
    if (const AbstractAddress* a = v.addr())
      if (const PairSet* s = P.get(*a)) return *s;
    return {};
  }

  const PairSet& require_set(const AliasKey& k, const AliasType& P, Span at) const {
    const PairSet* s = P.get(k);
    if (!s) throw AnalysisError("unbound-location", at, "'" + key_str(k) + "' is not in the alias type");
    return *s;
  }

  static Transfer finish(Derivation d, const AliasType& P, AliasType update) {
    AliasType post = P;
    for (const auto& [k, s] : update.entries()) post.set(k, s);
    d.conclusion = json{{"update", to_json(update)}};
    return {std::move(post), std::move(d)};
  }

  Transfer transfer_node(const Stmt::Skip&, const Stmt& s, const AliasType& P, const ReachCtx&) {
    return {P, node(rule::Skip, s.span)};
  }

  Transfer transfer_node(const Stmt::Assign& a, const Stmt& s, const AliasType& P, const ReachCtx& ctx) {
    AssignRule r = classify_assign(a);
    Derivation d = node(assign_rule_label(r), s.span);
    AliasType update;
    switch (r) {
      case AssignRule::AddrVar: {
        const auto& target = std::get<Expr::AddrOf>(a.rhs.node).loc;
        update.set(std::get<LocExpr::Var>(a.lhs.node).var, PairSet{{region_base(prog_, target), 1.0}});
        break;
      }
      case AssignRule::AddrField: {
        const auto& f = std::get<LocExpr::Field>(a.lhs.node);
        const auto& target = std::get<Expr::AddrOf>(a.rhs.node).loc;
        AbstractAddress dst = region_base(prog_, target);
        dst.offset += prog_.field_offset(f.field).value_or(0);
        update.set(region_base(prog_, *f.base), PairSet{{dst, 1.0}});
        break;
      }
      case AssignRule::AddrDeref: {
        const auto& inner = *std::get<LocExpr::Deref>(a.lhs.node).inner;
        AbstractAddress dst = region_base(prog_, std::get<Expr::AddrOf>(a.rhs.node).loc);
        for (const auto& [b, p] : require_set(base_key(prog_, inner), P, s.span)) update.set(b, PairSet{{dst, p}});
        break;
      }
      case AssignRule::CopyDeref: {
        const auto& inner = *std::get<LocExpr::Deref>(a.lhs.node).inner;
        const auto& src = *std::get<LocExpr::Deref>(std::get<Expr::Loc>(a.rhs.node).loc.node).inner;
        Judgment j = eval(Expr{Expr::Loc{src}, a.rhs.span}, P, ctx);
        PairSet bs = contents(j.value, P);
        d.premises.push_back(std::move(j.derivation));
        for (const auto& [c, q] : require_set(base_key(prog_, inner), P, s.span)) {
          PairSet out;
          for (const auto& [b, p] : bs) {
            const PairSet* ds = P.get(b);
            if (!ds) continue;
            for (const auto& [dt, t] : *ds) {
              double v = std::min(p, q * t);
              auto [it, fresh] = out.emplace(dt, v);
              if (!fresh) it->second = std::max(it->second, v);
            }
          }
          update.set(c, std::move(out));
        }
        break;
      }
      case AssignRule::LoadDeref: {
        const auto& src = *std::get<LocExpr::Deref>(std::get<Expr::Loc>(a.rhs.node).loc.node).inner;
        Judgment j = eval(Expr{Expr::Loc{src}, a.rhs.span}, P, ctx);
        update.set(store_key(prog_, a.lhs), contents(j.value, P));
        d.premises.push_back(std::move(j.derivation));
        break;
      }
      case AssignRule::StoreDeref: {
        const auto& inner = *std::get<LocExpr::Deref>(a.lhs.node).inner;
        Judgment j = eval(a.rhs, P, ctx);
        PairSet bs = contents(j.value, P);
        d.premises.push_back(std::move(j.derivation));
        for (const auto& [c, q] : require_set(base_key(prog_, inner), P, s.span)) {
          PairSet out;
          for (const auto& [b, p] : bs) out[b] = std::min(p, q);
          update.set(c, std::move(out));
        }
        break;
      }
      case AssignRule::Assign: {
        Judgment j = eval(a.rhs, P, ctx);
        update.set(store_key(prog_, a.lhs), contents(j.value, P));
        d.premises.push_back(std::move(j.derivation));
        break;
      }
    }
    return finish(std::move(d), P, std::move(update));
  }

  Transfer transfer_node(const Stmt::Phi& n, const Stmt& s, const AliasType& P, const ReachCtx&) {
    double pj = join.value_or(0.5);
    double pk = 1.0 - pj;
    Derivation d = node(rule::Fi, s.span);
    d.inputs["weights"] = json::array({format_probability(pj), format_probability(pk)});
    PairSet set;
    if (n.left == n.right) {
      set.emplace(n.left, 1.0);
    } else {
      set.emplace(n.left, pj);
      set.emplace(n.right, pk);
    }
    AliasType update;
    update.set(n.target, std::move(set));
    return finish(std::move(d), P, std::move(update));
  }

  Transfer transfer_node(const Stmt::Md& n, const Stmt& s, const AliasType& P, const ReachCtx&) {
    Derivation d = node(rule::Md, s.span);
    const PairSet* src = P.get(n.source);
    const PairSet* tgt = P.get(n.target);
    bool ok = src && src->size() == 1 && src->begin()->first == AliasKey{n.target} && tgt && tgt->size() == 1;
    if (!ok) {
      std::string msg = "md premises need P(" + n.source.str() + ") = {(" + n.target.str() + ", a)} and a singleton P(" +
                        n.target.str() + ")";
      if (cfg_.strictMd) throw AnalysisError("md-premise", s.span, msg);
      warn("md-premise", s.span, msg + "; statement skipped");
      d.inputs["skipped"] = true;
      return finish(std::move(d), P, {});
    }
    double a = src->begin()->second;
    PairSet set;
    set.emplace(tgt->begin()->first, a);
    set[n.source] = 1.0 - a;
    AliasType update;
    update.set(n.target, std::move(set));
    return finish(std::move(d), P, std::move(update));
  }

  Transfer transfer_node(const Stmt::Mu&, const Stmt& s, const AliasType& P, const ReachCtx&) {
    return finish(node(rule::Mu, s.span), P, {});
  }

  Transfer transfer_node(const Stmt::Seq& n, const Stmt& s, const AliasType& P, const ReachCtx& ctx) {
    Transfer first = transfer(*n.first, P, ctx);
    Transfer second = transfer(*n.second, first.post, ctx);
    Derivation d = node(rule::Seq, s.span);
    d.premises.push_back(std::move(first.derivation));
    d.premises.push_back(std::move(second.derivation));
    d.conclusion = json{{"entries", second.post.size()}};
    return {std::move(second.post), std::move(d)};
  }

  // A nested block starts with no pending join.
  Transfer block(const Stmt& body, const AliasType& P, const ReachCtx& ctx) {
    join.reset();
    return transfer(body, P, ctx);
  }

  Transfer transfer_node(const Stmt::RunStmt& n, const Stmt& s, const AliasType& P, const ReachCtx& ctx) {
    require_machine(n.machine, s.span);
    ReachCtx inner = ctx;
    inner.currentMachine = n.machine;
    Transfer body = block(*n.body, P, inner);
    Derivation d = node(rule::RunStmt, s.span);
    d.premises.push_back(std::move(body.derivation));
    d.inputs["machine"] = n.machine;
    d.conclusion = json{{"entries", body.post.size()}};
    return {std::move(body.post), std::move(d)};
  }

  Transfer transfer_node(const Stmt::If& n, const Stmt& s, const AliasType& P, const ReachCtx& ctx) {
    ReachCtx tctx = ctx, fctx = ctx;
    tctx.reachProb = ctx.reachProb * n.thenProb;
    fctx.reachProb = ctx.reachProb * (1.0 - n.thenProb);
    Transfer t = block(*n.thenBranch, P, tctx);
    Transfer f = block(*n.elseBranch, P, fctx);
    AliasType post = merge(t.post, f.post, n.thenProb, cfg_.ifMerge);
    Derivation d = node(rule::If, s.span);
    d.premises.push_back(std::move(t.derivation));
    d.premises.push_back(std::move(f.derivation));
    d.inputs["weight"] = format_probability(n.thenProb);
    d.conclusion = json{{"update", to_json(delta(P, post))}};
    join = n.thenProb;
    return {std::move(post), std::move(d)};
  }

  Transfer transfer_node(const Stmt::While& n, const Stmt& s, const AliasType& P, const ReachCtx& ctx) {
    ReachCtx bctx = ctx;
    bctx.reachProb = ctx.reachProb * n.bodyProb;
    Derivation d = node(rule::While, s.span);
    d.inputs["iterations"] = n.expectedIters;
    d.inputs["mode"] = while_mode_name(cfg_.whileMode);
    AliasType post = P;
    if (cfg_.whileMode == WhileMode::Iterated) {
      AliasType cur = P;
      for (std::int64_t k = 0; k < n.expectedIters; ++k) {
        Transfer t = block(*n.body, cur, bctx);
        d.premises.push_back(std::move(t.derivation));
        cur = std::move(t.post);
        post = merge(post, cur, 0.5, MergeMode::MaxUnion);
      }
    } else if (n.expectedIters > 0) {
      Transfer t = block(*n.body, P, bctx);
      d.premises.push_back(std::move(t.derivation));
      post = t.post;
      for (std::int64_t k = 1; k < n.expectedIters; ++k) post = merge(post, t.post, 0.5, MergeMode::MaxUnion);
    }
    d.conclusion = json{{"update", to_json(delta(P, post))}};
    join = n.bodyProb;
    return {std::move(post), std::move(d)};
  }
};

}  // namespace

Judgment eval_expr(const Program& prog, const Expr& e, const AliasType& P, const ReachCtx& ctx,
                   const AnalysisConfig& cfg, Diagnostics* warnings) {
  Engine engine(prog, cfg, warnings, nullptr);
  return engine.eval(e, P, ctx);
}

Transfer transfer_stmt(const Program& prog, const Stmt& s, const AliasType& P, const ReachCtx& ctx,
                       const AnalysisConfig& cfg, Diagnostics* warnings) {
  Engine engine(prog, cfg, warnings, nullptr);
  engine.join = ctx.joinProb;
  return engine.transfer(s, P, ctx);
}

AnalysisResult analyze(const Program& p, const AnalysisConfig& cfg) {
  AnalysisResult r;
  if (std::holds_alternative<Stmt::Skip>(p.body.node)) return r;
  Engine engine(p, cfg, &r.warnings, &r.perPoint);
  ReachCtx ctx{1.0, p.entryMachine, std::nullopt};
  Transfer t = engine.transfer(p.body, AliasType{}, ctx);
  r.final = std::move(t.post);
  r.derivation = std::move(t.derivation);
  return r;
}

}  // namespace paa
