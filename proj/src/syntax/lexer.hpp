// Tokenizer for .sdl sources. Internal to the syntax module.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "paa/syntax/ast.hpp"

namespace paa::detail {

enum class Tok {
  Ident,
  Number,  // integer or decimal literal; `text` keeps the spelling
  Punct,   // one of { } ( ) [ ] ; , := -> & + - * @ =
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Span span;
};

// Throws ParseError on characters that cannot start a token.
std::vector<Token> tokenize(std::string_view src);

bool is_keyword(std::string_view word);

}  // namespace paa::detail
