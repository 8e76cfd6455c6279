#include "paa/semantics/interpreter.hpp"

#include <random>

#include "paa/analysis/analyzer.hpp"

namespace paa {

std::string ConcreteAddress::str() const {
  std::string s = machine + ":" + region_str(region);
  if (std::holds_alternative<MallocSite>(region)) s += "#" + std::to_string(instance);
  return s + "[" + std::to_string(offset) + "]";
}

std::string ConcreteValue::str() const {
  if (auto* i = std::get_if<Int>(&v)) return "int:" + std::to_string(i->n);
  if (auto* a = std::get_if<Addr>(&v)) return a->addr.str();
  return "uninit";
}

nlohmann::json ConcreteMemory::to_json() const {
  nlohmann::json env_j = nlohmann::json::object(), store_j = nlohmann::json::object();
  for (const auto& [k, v] : env) env_j[k.str()] = v.str();
  for (const auto& [k, v] : store) store_j[k.str()] = v.str();
  nlohmann::json phis = nlohmann::json::array();
  for (const auto& c : phiChoices)
    phis.push_back({{"at", c.at.str()}, {"target", c.target.str()}, {"arg", c.left ? 0 : 1}});
  return {{"env", env_j}, {"store", store_j}, {"steps", steps}, {"phi_choices", phis}};
}

namespace {

using Value = ConcreteValue;

Value integer(std::int64_t n) { return Value{Value::Int{n}}; }
Value address(ConcreteAddress a) { return Value{Value::Addr{std::move(a)}}; }
Value uninit() { return Value{Value::Uninit{}}; }

struct Frame {
  double reach;
  std::string machine;
};

class Interpreter {
 public:
  Interpreter(const Program& p, const RunConfig& rc) : prog_(p), rc_(rc), rng_(rc.seed) {}

  ConcreteMemory run() {
    exec(prog_.body, Frame{1.0, prog_.entryMachine});
    return std::move(mem_);
  }

 private:
  const Program& prog_;
  const RunConfig& rc_;
  std::mt19937_64 rng_;
  ConcreteMemory mem_;
  std::map<int, std::int64_t> allocations_;
  std::map<SsaVar, std::uint64_t> definedAt_;

  bool draw(double p) {
    double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return u < p;
  }

  void tick(Span at) {
    if (++mem_.steps > rc_.maxSteps)
      throw RuntimeError("step-limit", at, "exceeded " + std::to_string(rc_.maxSteps) + " steps");
  }

  void require_machine(const std::string& m, Span at) const {
    if (!prog_.machines.contains(m)) throw RuntimeError("unknown-machine", at, "unknown machine '" + m + "'");
  }

  // ---- memory ----

  ConcreteAddress base(const LocExpr& l, Span at) const {
    const VarDecl* d = prog_.find_decl(l.root().name);
    if (!d) throw RuntimeError("unknown-region", at, "no region is declared for '" + l.root().name + "'");
    return ConcreteAddress{d->machine, d->name, 0, 0};
  }

  void bounds(const ConcreteAddress& a, Span at) const {
    std::int64_t size = INT64_MAX;
    if (auto* name = std::get_if<std::string>(&a.region))
      if (const VarDecl* d = prog_.find_decl(*name)) size = d->size;
    if (a.offset < 0 || a.offset >= size)
      throw RuntimeError("oob-offset", at, "offset " + std::to_string(a.offset) + " outside " + a.str());
  }

  Value load(const ConcreteAddress& a, Span at) const {
    bounds(a, at);
    auto it = mem_.store.find(a);
    return it == mem_.store.end() ? uninit() : it->second;
  }

  void store(const ConcreteAddress& a, Value v, Span at) {
    bounds(a, at);
    mem_.store[a] = std::move(v);
  }

  const ConcreteAddress& as_address(const Value& v, Span at) const {
    if (const ConcreteAddress* a = v.addr()) return *a;
    if (std::holds_alternative<Value::Uninit>(v.v))
      throw RuntimeError("uninit-read", at, "dereferenced an uninitialized value");
    throw RuntimeError("not-an-address", at, "dereferenced " + v.str());
  }

  // Assignment reads through the address an expression denotes.
  Value through(const Value& v, Span at) const {
    if (const ConcreteAddress* a = v.addr()) return load(*a, at);
    return v;
  }

  void define(const SsaVar& x, Value v) {
    mem_.env[x] = std::move(v);
    definedAt_[x] = mem_.steps;
  }

  // Writes the slot of a non-dereference location. A field location
  // denotes its root region's base cell.
  void write(const LocExpr& l, Value v, Span at) {
    if (auto* x = std::get_if<LocExpr::Var>(&l.node))
      define(x->var, std::move(v));
    else
      store(base(l, at), std::move(v), at);
  }

  // ---- expressions ----

  Value location(const LocExpr& l, Span at) {
    if (auto* x = std::get_if<LocExpr::Var>(&l.node)) {
      auto it = mem_.env.find(x->var);
      if (it == mem_.env.end()) throw RuntimeError("uninit-read", at, "'" + x->var.str() + "' is not defined");
      return it->second;
    }
    if (std::holds_alternative<LocExpr::Field>(l.node)) return load(base(l, at), at);
    Value inner = location(*std::get<LocExpr::Deref>(l.node).inner, at);
    return load(as_address(inner, at), at);
  }

  static Value moved(Value v, const std::string& machine) {
    if (auto* a = std::get_if<Value::Addr>(&v.v)) a->addr.machine = machine;
    return v;
  }

  Value eval(const Expr& e, const Frame& f) {
    if (auto* l = std::get_if<Expr::Loc>(&e.node)) return location(l->loc, e.span);
    if (auto* i = std::get_if<Expr::IntLit>(&e.node)) return integer(i->value);
    if (auto* a = std::get_if<Expr::AddrOf>(&e.node)) return address(base(a->loc, e.span));
    if (auto* m = std::get_if<Expr::Malloc>(&e.node)) {
      require_machine(f.machine, e.span);
      return address(ConcreteAddress{f.machine, MallocSite{m->site}, allocations_[m->site]++, 0});
    }
    if (auto* b = std::get_if<Expr::BinOp>(&e.node)) return arith(*b, eval(*b->lhs, f), eval(*b->rhs, f));
    bool live = f.reach >= rc_.threshold;
    if (auto* r = std::get_if<Expr::Run>(&e.node)) {
      require_machine(r->machine, e.span);
      Value v = eval(*r->inner, Frame{f.reach, r->machine});
      return live ? moved(v, r->machine) : uninit();
    }
    if (auto* r = std::get_if<Expr::ReformAliasToInt>(&e.node)) {
      require_machine(r->machine, e.span);
      return live ? eval(*r->inner, f) : uninit();
    }
    const auto& r = std::get<Expr::ReformIntToInt>(e.node);
    require_machine(r.from, e.span);
    require_machine(r.to, e.span);
    return live ? moved(eval(*r.inner, f), r.to) : uninit();
  }

  static Value arith(const Expr::BinOp& b, const Value& l, const Value& r) {
    auto* li = std::get_if<Value::Int>(&l.v);
    auto* ri = std::get_if<Value::Int>(&r.v);
    auto wrap = [](std::uint64_t x) { return static_cast<std::int64_t>(x); };
    if (li && ri) {
      auto x = static_cast<std::uint64_t>(li->n), y = static_cast<std::uint64_t>(ri->n);
      switch (b.op) {
        case BinaryOp::Add: return integer(wrap(x + y));
        case BinaryOp::Sub: return integer(wrap(x - y));
        case BinaryOp::Mul: return integer(wrap(x * y));
      }
    }
    if (l.addr() && ri && b.op != BinaryOp::Mul) {
      ConcreteAddress a = *l.addr();
      a.offset += b.op == BinaryOp::Add ? ri->n : -ri->n;
      return address(a);
    }
    if (li && r.addr() && b.op == BinaryOp::Add) {
      ConcreteAddress a = *r.addr();
      a.offset += li->n;
      return address(a);
    }
    return uninit();
  }

  bool truthy(const Expr& cond, const Frame& f) {
    Value v = eval(cond, f);
    if (auto* i = std::get_if<Value::Int>(&v.v)) return i->n != 0;
    if (v.addr()) return true;
    throw RuntimeError("uninit-read", cond.span, "branch condition is uninitialized");
  }

  bool branch(double p, const Expr& cond, const Frame& f) {
    return rc_.branchMode == BranchMode::Annotated ? draw(p) : truthy(cond, f);
  }

  // ---- statements ----

  void exec(const Stmt& s, const Frame& f) {
    if (auto* q = std::get_if<Stmt::Seq>(&s.node)) {
      exec(*q->first, f);
      exec(*q->second, f);
      return;
    }
    tick(s.span);
    if (auto* a = std::get_if<Stmt::Assign>(&s.node)) return assign(*a, s.span, f);
    if (auto* r = std::get_if<Stmt::RunStmt>(&s.node)) {
      require_machine(r->machine, s.span);
      return exec(*r->body, Frame{f.reach, r->machine});
    }
    if (auto* phi = std::get_if<Stmt::Phi>(&s.node)) return join(*phi, s.span);
    if (auto* i = std::get_if<Stmt::If>(&s.node)) {
      if (branch(i->thenProb, i->cond, f))
        exec(*i->thenBranch, Frame{f.reach * i->thenProb, f.machine});
      else
        exec(*i->elseBranch, Frame{f.reach * (1.0 - i->thenProb), f.machine});
      return;
    }
    if (auto* w = std::get_if<Stmt::While>(&s.node)) {
      Frame inner{f.reach * w->bodyProb, f.machine};
      while (branch(w->bodyProb, w->cond, f)) {
        exec(*w->body, inner);
        tick(s.span);
      }
      return;
    }
    // skip, md and mu have no runtime effect
  }

  void join(const Stmt::Phi& phi, Span at) {
    auto l = definedAt_.find(phi.left);
    auto r = definedAt_.find(phi.right);
    if (l == definedAt_.end() && r == definedAt_.end())
      throw RuntimeError("uninit-read", at, "neither fi argument is defined");
    bool left = r == definedAt_.end() || (l != definedAt_.end() && l->second >= r->second);
    mem_.phiChoices.push_back({at, phi.target, left});
    define(phi.target, mem_.env.at(left ? phi.left : phi.right));
  }

  void assign(const Stmt::Assign& a, Span at, const Frame& f) {
    const LocExpr* target = nullptr;
    if (auto* d = std::get_if<LocExpr::Deref>(&a.lhs.node)) target = &*d->inner;
    switch (classify_assign(a)) {
      case AssignRule::AddrVar:
        return define(std::get<LocExpr::Var>(a.lhs.node).var, address(base(std::get<Expr::AddrOf>(a.rhs.node).loc, at)));
      case AssignRule::AddrField: {
        const auto& fld = std::get<LocExpr::Field>(a.lhs.node);
        ConcreteAddress dst = base(std::get<Expr::AddrOf>(a.rhs.node).loc, at);
        dst.offset += prog_.field_offset(fld.field).value_or(0);
        return store(base(*fld.base, at), address(dst), at);
      }
      case AssignRule::AddrDeref: {
        ConcreteAddress c = as_address(location(*target, at), at);
        return store(c, address(base(std::get<Expr::AddrOf>(a.rhs.node).loc, at)), at);
      }
      case AssignRule::CopyDeref: {
        ConcreteAddress c = as_address(location(*target, at), at);
        const auto& src = *std::get<LocExpr::Deref>(std::get<Expr::Loc>(a.rhs.node).loc.node).inner;
        Value mid = load(as_address(location(src, at), at), at);
        return store(c, through(mid, at), at);
      }
      case AssignRule::LoadDeref: {
        const auto& src = *std::get<LocExpr::Deref>(std::get<Expr::Loc>(a.rhs.node).loc.node).inner;
        return write(a.lhs, load(as_address(location(src, at), at), at), at);
      }
      case AssignRule::StoreDeref: {
        ConcreteAddress c = as_address(location(*target, at), at);
        return store(c, through(eval(a.rhs, f), at), at);
      }
      case AssignRule::Assign:
        return write(a.lhs, through(eval(a.rhs, f), at), at);
    }
  }
};

}  // namespace

ConcreteMemory interpret(const Program& p, const RunConfig& rc) { return Interpreter(p, rc).run(); }

}  // namespace paa
