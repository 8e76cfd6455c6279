#include "paa/syntax/parser.hpp"

#include <charconv>
#include <set>

#include "lexer.hpp"

namespace paa {

using detail::Tok;
using detail::Token;

ParseError::ParseError(Span at, std::string message, std::vector<std::string> expected)
    : std::runtime_error([&] {
        std::string m = std::move(message);
        if (!expected.empty()) {
          m += " (expected ";
          for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) m += i + 1 == expected.size() ? " or " : ", ";
            m += "'" + expected[i] + "'";
          }
          m += ")";
        }
        return m;
      }()),
      at_(at),
      expected_(std::move(expected)) {}

std::string ParseError::format(std::string_view file) const {
  return std::string(file) + ":" + std::to_string(at_.line) + ":" + std::to_string(at_.col) + ": " + what();
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(detail::tokenize(text)) {}

  Program program() {
    Program p;
    expect_word("machines");
    expect("{");
    p.machines = machine_tree();
    expect("}");
    std::set<std::string> seen;
    check_unique_machines(p.machines, seen);
    machines_ = &p.machines;

    while (peek_word("field") || peek_word("var")) {
      if (accept_word("field")) {
        Token name = ident("field name");
        expect("=");
        std::int64_t off = integer("field offset");
        expect(";");
        std::string key = SsaVar::parse(name.text).str();
        if (p.fieldTable.count(key)) throw ParseError(name.span, "duplicate field declaration '" + key + "'");
        p.fieldTable[key] = off;
        declaredFields_.insert(key);
      } else {
        expect_word("var");
        Token name = ident("variable name");
        SsaVar v = SsaVar::parse(name.text);
        if (v.version != 0 || v.str() != name.text)
          throw ParseError(name.span, "declarations name a root variable without an SSA version");
        expect_word("on");
        Token m = ident("machine");
        require_machine(m);
        expect("[");
        std::int64_t size = integer("region size");
        if (size <= 0) throw ParseError(prev().span, "region size must be positive");
        expect("]");
        expect(";");
        if (p.find_decl(name.text)) throw ParseError(name.span, "duplicate declaration of '" + name.text + "'");
        p.decls.push_back(VarDecl{name.text, m.text, size, name.span});
      }
    }

    expect_word("begin");
    Token entry = ident("entry machine");
    require_machine(entry);
    p.entryMachine = entry.text;
    program_ = &p;
    p.body = block();
    if (cur().kind != Tok::End) fail({"end of input"});

    std::int64_t next = 0;
    for (auto& [k, v] : p.fieldTable) next = std::max(next, v + 1);
    for (const auto& f : fieldUseOrder_)
      if (!p.fieldTable.count(f)) p.fieldTable[f] = next++;
    return p;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const MachineHierarchy* machines_ = nullptr;
  const Program* program_ = nullptr;
  int nextSite_ = 0;
  std::set<std::string> declaredFields_;
  std::vector<std::string> fieldUseOrder_;

  const Token& cur() const { return toks_[pos_]; }
  const Token& prev() const { return toks_[pos_ ? pos_ - 1 : 0]; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = cur();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.span, "syntax error: unexpected " + found, std::move(expected));
  }

  bool peek(std::string_view punct) const { return cur().kind == Tok::Punct && cur().text == punct; }
  bool peek_word(std::string_view w) const { return cur().kind == Tok::Ident && cur().text == w; }

  bool accept(std::string_view punct) {
    if (!peek(punct)) return false;
    ++pos_;
    return true;
  }
  bool accept_word(std::string_view w) {
    if (!peek_word(w)) return false;
    ++pos_;
    return true;
  }
  const Token& expect(std::string_view punct) {
    if (!peek(punct)) fail({std::string(punct)});
    return toks_[pos_++];
  }
  const Token& expect_word(std::string_view w) {
    if (!peek_word(w)) fail({std::string(w)});
    return toks_[pos_++];
  }

  Token ident(const std::string& what) {
    if (cur().kind != Tok::Ident || detail::is_keyword(cur().text)) fail({what});
    return toks_[pos_++];
  }

  std::int64_t integer(const std::string& what) {
    if (cur().kind != Tok::Number) fail({what});
    const Token& t = toks_[pos_];
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || ptr != t.text.data() + t.text.size())
      throw ParseError(t.span, "expected an integer for " + what + ", found '" + t.text + "'");
    ++pos_;
    return v;
  }

  double probability() {
    if (cur().kind != Tok::Number) fail({"probability"});
    const Token& t = toks_[pos_];
    double v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || ptr != t.text.data() + t.text.size())
      throw ParseError(t.span, "malformed probability '" + t.text + "'");
    if (!(v >= 0.0 && v <= 1.0)) throw ParseError(t.span, "probability annotation " + t.text + " outside [0,1]");
    ++pos_;
    return v;
  }

  MachineHierarchy machine_tree() {
    Token name = ident("machine name");
    MachineHierarchy h{name.text, {}};
    if (accept("(")) {
      h.children.push_back(machine_tree());
      while (!peek(")")) {
        accept(",");
        h.children.push_back(machine_tree());
      }
      expect(")");
    }
    return h;
  }

  void check_unique_machines(const MachineHierarchy& h, std::set<std::string>& seen) {
    if (!seen.insert(h.root).second) throw ParseError(cur().span, "duplicate machine '" + h.root + "'");
    for (const auto& c : h.children) check_unique_machines(c, seen);
  }

  void require_machine(const Token& t) const {
    if (!machines_->contains(t.text)) throw ParseError(t.span, "unknown machine '" + t.text + "'");
  }

  static Span join(Span a, Span b) {
    a.endLine = b.endLine;
    a.endCol = b.endCol;
    return a;
  }

  SsaVar var_ref() { return SsaVar::parse(ident("variable").text); }

  // ---- statements ----

  Stmt block() {
    expect("{");
    std::vector<Stmt> stmts;
    while (!peek("}")) {
      if (cur().kind == Tok::End) fail({"}"});
      stmts.push_back(statement());
    }
    expect("}");
    return make_seq(std::move(stmts));
  }

  Stmt statement() {
    Span start = cur().span;
    if (accept_word("run")) {
      expect("(");
      Token m = ident("machine");
      require_machine(m);
      expect(")");
      Stmt body = block();
      return Stmt{Stmt::RunStmt{std::move(body), m.text}, join(start, prev().span)};
    }
    if (accept_word("if")) {
      Expr cond = expr();
      double p = 0.5;
      if (accept("@")) p = probability();
      expect_word("then");
      Stmt t = block();
      Stmt f{Stmt::Skip{}, {}};
      if (accept_word("else")) f = block();
      return Stmt{Stmt::If{std::move(cond), p, std::move(t), std::move(f)}, join(start, prev().span)};
    }
    if (accept_word("while")) {
      Expr cond = expr();
      double p = 0.9;
      std::int64_t n = 2;
      if (accept("@")) {
        expect("(");
        p = probability();
        expect(",");
        n = integer("expected iteration count");
        if (n < 0) throw ParseError(prev().span, "expected iteration count must be non-negative");
        expect(")");
      }
      expect_word("do");
      Stmt body = block();
      return Stmt{Stmt::While{std::move(cond), p, n, std::move(body)}, join(start, prev().span)};
    }
    if (accept_word("mu")) {
      expect("(");
      SsaVar v = var_ref();
      expect(")");
      expect(";");
      return Stmt{Stmt::Mu{v}, join(start, prev().span)};
    }

    LocExpr lhs = loc();
    expect(":=");
    if (peek_word("fi") || peek_word("md")) {
      auto* target = std::get_if<LocExpr::Var>(&lhs.node);
      if (!target) throw ParseError(lhs.span, "the target of fi/md must be a variable");
      if (accept_word("fi")) {
        expect("(");
        SsaVar a = var_ref();
        expect(",");
        SsaVar b = var_ref();
        expect(")");
        expect(";");
        return Stmt{Stmt::Phi{target->var, a, b}, join(start, prev().span)};
      }
      expect_word("md");
      expect("(");
      SsaVar src = var_ref();
      expect(")");
      expect(";");
      return Stmt{Stmt::Md{target->var, src}, join(start, prev().span)};
    }
    Expr rhs = expr();
    expect(";");
    return Stmt{Stmt::Assign{std::move(lhs), std::move(rhs)}, join(start, prev().span)};
  }

  // ---- expressions ----

  Expr expr() {
    Expr lhs = term();
    while (peek("+") || peek("-")) {
      BinaryOp op = cur().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
      ++pos_;
      Expr rhs = term();
      Span sp = join(lhs.span, rhs.span);
      lhs = Expr{Expr::BinOp{op, std::move(lhs), std::move(rhs)}, sp};
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (accept("*")) {
      Expr rhs = unary();
      Span sp = join(lhs.span, rhs.span);
      lhs = Expr{Expr::BinOp{BinaryOp::Mul, std::move(lhs), std::move(rhs)}, sp};
    }
    return lhs;
  }

  Expr unary() {
    Span start = cur().span;
    if (cur().kind == Tok::Number) {
      std::int64_t v = integer("integer");
      return Expr{Expr::IntLit{v}, start};
    }
    if (accept("&")) {
      LocExpr l = loc();
      if (!program_->find_decl(l.root().name))
        throw ParseError(l.span, "address of undeclared variable '" + l.root().name + "'");
      Span sp = join(start, l.span);
      return Expr{Expr::AddrOf{std::move(l)}, sp};
    }
    if (accept_word("malloc")) {
      expect("(");
      expect(")");
      return Expr{Expr::Malloc{nextSite_++}, join(start, prev().span)};
    }
    if (accept_word("run")) {
      expect("(");
      Expr inner = expr();
      expect(",");
      Token m = ident("machine");
      require_machine(m);
      expect(")");
      return Expr{Expr::Run{std::move(inner), m.text}, join(start, prev().span)};
    }
    if (accept_word("reform")) {
      expect("(");
      if (accept_word("alis")) {
        Token m1 = ident("machine");
        require_machine(m1);
        expect(",");
        expect_word("int");
        Token m2 = ident("machine");
        require_machine(m2);
        if (m1.text != m2.text)
          throw ParseError(m2.span, "reform(alis m, int m) must name the same machine twice");
        expect(")");
        Expr inner = unary();
        Span sp = join(start, inner.span);
        return Expr{Expr::ReformAliasToInt{m1.text, std::move(inner)}, sp};
      }
      if (!peek_word("int")) fail({"alis", "int"});
      expect_word("int");
      Token from = ident("machine");
      require_machine(from);
      expect(",");
      expect_word("int");
      Token to = ident("machine");
      require_machine(to);
      expect(")");
      Expr inner = unary();
      Span sp = join(start, inner.span);
      return Expr{Expr::ReformIntToInt{from.text, to.text, std::move(inner)}, sp};
    }
    if (accept("(")) {
      Expr e = expr();
      expect(")");
      e.span = join(start, prev().span);
      return e;
    }
    if (cur().kind == Tok::Ident || peek("[")) {
      LocExpr l = loc();
      Span sp = l.span;
      return Expr{Expr::Loc{std::move(l)}, sp};
    }
    fail({"expression"});
  }

  LocExpr loc() {
    Span start = cur().span;
    LocExpr l;
    if (accept("[")) {
      LocExpr inner = loc();
      expect("]");
      l = LocExpr{LocExpr::Deref{std::move(inner)}, join(start, prev().span)};
    } else {
      if (cur().kind != Tok::Ident || detail::is_keyword(cur().text)) fail({"variable", "["});
      SsaVar v = var_ref();
      l = LocExpr{LocExpr::Var{v}, join(start, prev().span)};
    }
    while (accept("->")) {
      SsaVar f = SsaVar::parse(ident("field").text);
      std::string key = f.str();
      if (!declaredFields_.count(key)) {
        bool seen = false;
        for (const auto& k : fieldUseOrder_) seen = seen || k == key;
        if (!seen) fieldUseOrder_.push_back(key);
      }
      l = LocExpr{LocExpr::Field{std::move(l), f}, join(start, prev().span)};
    }
    return l;
  }
};

}  // namespace

Program parse(std::string_view text) { return Parser(text).program(); }

}  // namespace paa
