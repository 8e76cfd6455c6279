#include "lexer.hpp"

#include <array>
#include <cctype>

#include "paa/syntax/parser.hpp"

namespace paa::detail {

namespace {

constexpr std::array kKeywords = {"machines", "field", "var",   "on",   "begin", "run",    "fi",
                                  "md",       "mu",    "if",    "then", "else",  "while",  "do",
                                  "malloc",   "reform", "alis", "int"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

bool is_keyword(std::string_view word) {
  for (auto* k : kKeywords)
    if (word == k) return true;
  return false;
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::uint32_t line = 1, col = 1;
  std::size_t i = 0;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }

    Token t;
    t.span.line = line;
    t.span.col = col;
    std::size_t start = i;

    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(start, j - start));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(src.substr(start, j - start));
      advance(j - i);
    } else if (c == ':' && i + 1 < src.size() && src[i + 1] == '=') {
      t.kind = Tok::Punct;
      t.text = ":=";
      advance(2);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      t.kind = Tok::Punct;
      t.text = "->";
      advance(2);
    } else if (std::string_view("{}()[];,&+-*@=").find(c) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      advance(1);
    } else {
      Span at{line, col, line, col + 1};
      throw ParseError(at, std::string("unexpected character '") + c + "'");
    }
    t.span.endLine = line;
    t.span.endCol = col;
    out.push_back(std::move(t));
  }

  Token end;
  end.kind = Tok::End;
  end.span = Span{line, col, line, col};
  out.push_back(end);
  return out;
}

}  // namespace paa::detail
