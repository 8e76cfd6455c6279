#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "paa/syntax/ast.hpp"

namespace paa {

class ParseError : public std::runtime_error {
 public:
  ParseError(Span at, std::string message, std::vector<std::string> expected = {});

  const Span& at() const { return at_; }
  const std::vector<std::string>& expected() const { return expected_; }

  // `file:line:col: message`
  std::string format(std::string_view file) const;

 private:
  Span at_;
  std::vector<std::string> expected_;
};

// Parses a complete `.sdl` source. Malloc sites are numbered in textual
// order; unannotated `if` gets 0.5 and unannotated `while` gets (0.9, 2).
Program parse(std::string_view text);

// Canonical source text; parse(pretty(p)) == p for well-formed programs.
std::string pretty(const Program& p);

std::string pretty(const LocExpr& l);
std::string pretty(const Expr& e);

// Shortest decimal string that reads back to exactly the same double.
std::string format_probability(double p);

}  // namespace paa
