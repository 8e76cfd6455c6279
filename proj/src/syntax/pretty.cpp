#include <charconv>
#include <sstream>

#include "paa/syntax/parser.hpp"

namespace paa {

std::string format_probability(double p) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p);
  (void)ec;
  return std::string(buf, ptr);
}

std::string pretty(const LocExpr& l) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LocExpr::Var>) return n.var.str();
        else if constexpr (std::is_same_v<T, LocExpr::Field>) return pretty(*n.base) + "->" + n.field.str();
        else return "[" + pretty(*n.inner) + "]";
      },
      l.node);
}

namespace {

// 0 = additive, 1 = multiplicative, 2 = unary/atomic.
int precedence(const Expr& e) {
  if (auto* b = std::get_if<Expr::BinOp>(&e.node)) return b->op == BinaryOp::Mul ? 1 : 0;
  return 2;
}

std::string wrap(const Expr& e, bool parens) {
  std::string s = pretty(e);
  return parens ? "(" + s + ")" : s;
}

}  // namespace

std::string pretty(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Loc>) return pretty(n.loc);
        else if constexpr (std::is_same_v<T, Expr::IntLit>) return std::to_string(n.value);
        else if constexpr (std::is_same_v<T, Expr::BinOp>) {
          int mine = precedence(e);
          return wrap(*n.lhs, precedence(*n.lhs) < mine) + " " + binary_op_symbol(n.op) + " " +
                 wrap(*n.rhs, precedence(*n.rhs) <= mine);
        } else if constexpr (std::is_same_v<T, Expr::AddrOf>) return "&" + pretty(n.loc);
        else if constexpr (std::is_same_v<T, Expr::Malloc>) return "malloc()";
        else if constexpr (std::is_same_v<T, Expr::Run>) return "run(" + pretty(*n.inner) + ", " + n.machine + ")";
        else if constexpr (std::is_same_v<T, Expr::ReformAliasToInt>)
          return "reform(alis " + n.machine + ", int " + n.machine + ") " + wrap(*n.inner, precedence(*n.inner) < 2);
        else
          return "reform(int " + n.from + ", int " + n.to + ") " + wrap(*n.inner, precedence(*n.inner) < 2);
      },
      e.node);
}

namespace {

void machine_tree(std::ostream& os, const MachineHierarchy& h) {
  os << h.root;
  if (h.children.empty()) return;
  os << " (";
  for (std::size_t i = 0; i < h.children.size(); ++i) {
    if (i) os << ", ";
    machine_tree(os, h.children[i]);
  }
  os << ")";
}

void block(std::ostream& os, const Stmt& s, int indent);

void statement(std::ostream& os, const Stmt& s, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Stmt::Skip>) {
        } else if constexpr (std::is_same_v<T, Stmt::Seq>) {
          statement(os, *n.first, indent);
          statement(os, *n.second, indent);
        } else if constexpr (std::is_same_v<T, Stmt::Assign>) {
          os << pad << pretty(n.lhs) << " := " << pretty(n.rhs) << ";\n";
        } else if constexpr (std::is_same_v<T, Stmt::Phi>) {
          os << pad << n.target.str() << " := fi(" << n.left.str() << ", " << n.right.str() << ");\n";
        } else if constexpr (std::is_same_v<T, Stmt::Md>) {
          os << pad << n.target.str() << " := md(" << n.source.str() << ");\n";
        } else if constexpr (std::is_same_v<T, Stmt::Mu>) {
          os << pad << "mu(" << n.var.str() << ");\n";
        } else if constexpr (std::is_same_v<T, Stmt::RunStmt>) {
          os << pad << "run (" << n.machine << ") ";
          block(os, *n.body, indent);
          os << "\n";
        } else if constexpr (std::is_same_v<T, Stmt::If>) {
          os << pad << "if " << pretty(n.cond) << " @" << format_probability(n.thenProb) << " then ";
          block(os, *n.thenBranch, indent);
          os << " else ";
          block(os, *n.elseBranch, indent);
          os << "\n";
        } else if constexpr (std::is_same_v<T, Stmt::While>) {
          os << pad << "while " << pretty(n.cond) << " @(" << format_probability(n.bodyProb) << ", "
             << n.expectedIters << ") do ";
          block(os, *n.body, indent);
          os << "\n";
        }
      },
      s.node);
}

void block(std::ostream& os, const Stmt& s, int indent) {
  if (std::holds_alternative<Stmt::Skip>(s.node)) {
    os << "{ }";
    return;
  }
  os << "{\n";
  statement(os, s, indent + 1);
  os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << "}";
}

}  // namespace

std::string pretty(const Program& p) {
  std::ostringstream os;
  os << "machines { ";
  machine_tree(os, p.machines);
  os << " }\n";
  for (const auto& [name, off] : p.fieldTable) os << "field " << name << " = " << off << ";\n";
  for (const auto& d : p.decls) os << "var " << d.name << " on " << d.machine << "[" << d.size << "];\n";
  os << "begin " << p.entryMachine << " ";
  block(os, p.body, 0);
  os << "\n";
  return os.str();
}

}  // namespace paa
