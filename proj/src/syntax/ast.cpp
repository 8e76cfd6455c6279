#include "paa/syntax/ast.hpp"

#include <cctype>
#include <charconv>

namespace paa {

std::string Span::str() const { return std::to_string(line) + ":" + std::to_string(col); }

SsaVar SsaVar::parse(std::string_view text) {
  auto us = text.rfind('_');
  if (us != std::string_view::npos && us > 0 && us + 1 < text.size()) {
    std::string_view digits = text.substr(us + 1);
    bool allDigits = true;
    for (char c : digits) allDigits = allDigits && std::isdigit(static_cast<unsigned char>(c));
    // Leading zeros would not survive a print/parse round trip.
    if (allDigits && !(digits.size() > 1 && digits[0] == '0')) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec == std::errc{} && ptr == digits.data() + digits.size())
        return SsaVar{std::string(text.substr(0, us)), v};
    }
  }
  return SsaVar{std::string(text), 0};
}

std::string SsaVar::str() const {
  if (version == 0) return name;
  return name + "_" + std::to_string(version);
}

const SsaVar& LocExpr::root() const {
  const LocExpr* cur = this;
  for (;;) {
    if (auto* v = std::get_if<Var>(&cur->node)) return v->var;
    if (auto* f = std::get_if<Field>(&cur->node))
      cur = &*f->base;
    else
      cur = &*std::get<Deref>(cur->node).inner;
  }
}

const char* binary_op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
  }
  return "?";
}

bool MachineHierarchy::contains(std::string_view id) const {
  if (root == id) return true;
  for (const auto& c : children)
    if (c.contains(id)) return true;
  return false;
}

std::vector<std::string> MachineHierarchy::all() const {
  std::vector<std::string> out{root};
  for (const auto& c : children) {
    auto sub = c.all();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

const VarDecl* Program::find_decl(std::string_view rootName) const {
  for (const auto& d : decls)
    if (d.name == rootName) return &d;
  return nullptr;
}

std::optional<std::int64_t> Program::field_offset(const SsaVar& field) const {
  auto it = fieldTable.find(field.str());
  if (it == fieldTable.end()) return std::nullopt;
  return it->second;
}

namespace {

int count_sites(const Expr& e);

int count_sites_loc(const LocExpr&) { return 0; }

int count_sites(const Expr& e) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Expr::Malloc>) return 1;
        else if constexpr (std::is_same_v<T, Expr::BinOp>) return count_sites(*n.lhs) + count_sites(*n.rhs);
        else if constexpr (std::is_same_v<T, Expr::Run> || std::is_same_v<T, Expr::ReformAliasToInt> ||
                           std::is_same_v<T, Expr::ReformIntToInt>)
          return count_sites(*n.inner);
        else if constexpr (std::is_same_v<T, Expr::Loc> || std::is_same_v<T, Expr::AddrOf>)
          return count_sites_loc(n.loc);
        else return 0;
      },
      e.node);
}

int count_sites(const Stmt& s) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Stmt::Assign>) return count_sites(n.rhs);
        else if constexpr (std::is_same_v<T, Stmt::RunStmt>) return count_sites(*n.body);
        else if constexpr (std::is_same_v<T, Stmt::Seq>) return count_sites(*n.first) + count_sites(*n.second);
        else if constexpr (std::is_same_v<T, Stmt::If>)
          return count_sites(n.cond) + count_sites(*n.thenBranch) + count_sites(*n.elseBranch);
        else if constexpr (std::is_same_v<T, Stmt::While>) return count_sites(n.cond) + count_sites(*n.body);
        else return 0;
      },
      s.node);
}

}  // namespace

int Program::malloc_site_count() const { return count_sites(body); }

void flatten_seq(const Stmt& s, std::vector<const Stmt*>& out) {
  if (auto* seq = std::get_if<Stmt::Seq>(&s.node)) {
    flatten_seq(*seq->first, out);
    flatten_seq(*seq->second, out);
  } else if (!std::holds_alternative<Stmt::Skip>(s.node)) {
    out.push_back(&s);
  }
}

Stmt make_seq(std::vector<Stmt> stmts) {
  if (stmts.empty()) return Stmt{Stmt::Skip{}, {}};
  Stmt acc = std::move(stmts.back());
  for (std::size_t i = stmts.size() - 1; i-- > 0;) {
    Span sp = stmts[i].span;
    sp.endLine = acc.span.endLine;
    sp.endCol = acc.span.endCol;
    acc = Stmt{Stmt::Seq{std::move(stmts[i]), std::move(acc)}, sp};
  }
  return acc;
}

}  // namespace paa
