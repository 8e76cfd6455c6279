// AST for SSA-DisLang: locations, distributed expressions, statements and
// the declaration layer (machines, regions, field offsets).
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace paa {

// Source position of a node. Positions are metadata: they never take part in
// AST equality, so two programs that differ only in layout compare equal.
struct Span {
  std::uint32_t line = 0;
  std::uint32_t col = 0;
  std::uint32_t endLine = 0;
  std::uint32_t endCol = 0;

  friend bool operator==(const Span&, const Span&) { return true; }

  bool known() const { return line != 0; }
  std::string str() const;  // "line:col"
};

// Deep-copying owning pointer so recursive AST nodes keep value semantics.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  const T& operator*() const { return *ptr_; }
  const T* operator->() const { return ptr_.get(); }
  T& operator*() { return *ptr_; }
  T* operator->() { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a == *b; }

 private:
  std::unique_ptr<T> ptr_;
};

// SSA-indexed identifier: `x_2` is {x, 2}; a plain `x` is version 0.
struct SsaVar {
  std::string name;
  std::int64_t version = 0;

  static SsaVar parse(std::string_view text);
  std::string str() const;

  friend auto operator<=>(const SsaVar&, const SsaVar&) = default;
  friend bool operator==(const SsaVar&, const SsaVar&) = default;
};

// l ::= x | l->y | [l]
struct LocExpr {
  struct Var {
    SsaVar var;
    friend bool operator==(const Var&, const Var&) = default;
  };
  struct Field {
    Box<LocExpr> base;
    SsaVar field;
    friend bool operator==(const Field&, const Field&) = default;
  };
  struct Deref {
    Box<LocExpr> inner;
    friend bool operator==(const Deref&, const Deref&) = default;
  };

  std::variant<Var, Field, Deref> node;
  Span span;

  friend bool operator==(const LocExpr&, const LocExpr&) = default;

  // Variable at the bottom of the location (the `x` in `[x]->y`).
  const SsaVar& root() const;
};

enum class BinaryOp { Add, Sub, Mul };

const char* binary_op_symbol(BinaryOp op);

struct Expr {
  struct Loc {
    LocExpr loc;
    friend bool operator==(const Loc&, const Loc&) = default;
  };
  // Integer literal; the abstract grammar has none but address arithmetic
  // needs integer operands.
  struct IntLit {
    std::int64_t value = 0;
    friend bool operator==(const IntLit&, const IntLit&) = default;
  };
  struct BinOp {
    BinaryOp op = BinaryOp::Add;
    Box<Expr> lhs;
    Box<Expr> rhs;
    friend bool operator==(const BinOp&, const BinOp&) = default;
  };
  struct AddrOf {
    LocExpr loc;
    friend bool operator==(const AddrOf&, const AddrOf&) = default;
  };
  struct Malloc {
    int site = 0;
    friend bool operator==(const Malloc&, const Malloc&) = default;
  };
  struct Run {
    Box<Expr> inner;
    std::string machine;
    friend bool operator==(const Run&, const Run&) = default;
  };
  // reform(alis m, int m) e
  struct ReformAliasToInt {
    std::string machine;
    Box<Expr> inner;
    friend bool operator==(const ReformAliasToInt&, const ReformAliasToInt&) = default;
  };
  // reform(int mj, int mi) e
  struct ReformIntToInt {
    std::string from;
    std::string to;
    Box<Expr> inner;
    friend bool operator==(const ReformIntToInt&, const ReformIntToInt&) = default;
  };

  std::variant<Loc, IntLit, BinOp, AddrOf, Malloc, Run, ReformAliasToInt, ReformIntToInt> node;
  Span span;

  friend bool operator==(const Expr&, const Expr&) = default;
};

struct Stmt {
  struct Skip {
    friend bool operator==(const Skip&, const Skip&) = default;
  };
  struct Assign {
    LocExpr lhs;
    Expr rhs;
    friend bool operator==(const Assign&, const Assign&) = default;
  };
  struct RunStmt {
    Box<Stmt> body;
    std::string machine;
    friend bool operator==(const RunStmt&, const RunStmt&) = default;
  };
  struct Seq {
    Box<Stmt> first;
    Box<Stmt> second;
    friend bool operator==(const Seq&, const Seq&) = default;
  };
  // target := fi(left, right)
  struct Phi {
    SsaVar target;
    SsaVar left;
    SsaVar right;
    friend bool operator==(const Phi&, const Phi&) = default;
  };
  // target := md(source)
  struct Md {
    SsaVar target;
    SsaVar source;
    friend bool operator==(const Md&, const Md&) = default;
  };
  struct Mu {
    SsaVar var;
    friend bool operator==(const Mu&, const Mu&) = default;
  };
  struct If {
    Expr cond;
    double thenProb = 0.5;
    Box<Stmt> thenBranch;
    Box<Stmt> elseBranch;
    friend bool operator==(const If&, const If&) = default;
  };
  struct While {
    Expr cond;
    double bodyProb = 0.9;
    std::int64_t expectedIters = 2;
    Box<Stmt> body;
    friend bool operator==(const While&, const While&) = default;
  };

  std::variant<Skip, Assign, RunStmt, Seq, Phi, Md, Mu, If, While> node;
  Span span;

  friend bool operator==(const Stmt&, const Stmt&) = default;
};

struct MachineHierarchy {
  std::string root;
  std::vector<MachineHierarchy> children;

  friend bool operator==(const MachineHierarchy&, const MachineHierarchy&) = default;

  bool contains(std::string_view id) const;
  std::vector<std::string> all() const;  // preorder
};

struct VarDecl {
  std::string name;
  std::string machine;
  std::int64_t size = 1;
  Span span;

  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

struct Program {
  MachineHierarchy machines;
  // Keyed by the canonical field identifier (`y`, `next_1`, ...).
  std::map<std::string, std::int64_t> fieldTable;
  std::vector<VarDecl> decls;
  std::string entryMachine;
  Stmt body{Stmt::Skip{}, {}};

  friend bool operator==(const Program&, const Program&) = default;

  const VarDecl* find_decl(std::string_view rootName) const;
  std::optional<std::int64_t> field_offset(const SsaVar& field) const;
  int malloc_site_count() const;
};

// Flattens right- or left-nested Seq chains into program order.
void flatten_seq(const Stmt& s, std::vector<const Stmt*>& out);

// Rebuilds a right-nested Seq from a list; an empty list becomes Skip.
Stmt make_seq(std::vector<Stmt> stmts);

}  // namespace paa
