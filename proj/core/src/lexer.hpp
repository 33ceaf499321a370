#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "shcsp/parser.hpp"

namespace shcsp::detail {

enum class TokKind { Ident, Number, Sym, End };

struct Token {
  TokKind kind;
  std::string text;
  int line;
  int col;
};

// `//` and `#` start line comments.
inline std::vector<Token> tokenize(std::string_view src) {
  static constexpr std::string_view kTwoChar[] = {":=", "->", "|>", "||", "&&", "<=", ">=", "==", "++"};
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const int tl = line;
    const int tc = col;
    if (is_alpha(c)) {
      std::size_t j = i;
      while (j < src.size() && (is_alpha(src[j]) || is_digit(src[j]))) ++j;
      out.push_back({TokKind::Ident, std::string(src.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (is_digit(c)) {
      std::size_t j = i;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j + 1 < src.size() && src[j] == '.' && is_digit(src[j + 1])) {
        ++j;
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && is_digit(src[k])) {
          while (k < src.size() && is_digit(src[k])) ++k;
          j = k;
        }
      }
      out.push_back({TokKind::Number, std::string(src.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    bool matched = false;
    if (i + 1 < src.size()) {
      for (auto two : kTwoChar) {
        if (src.substr(i, 2) == two) {
          out.push_back({TokKind::Sym, std::string(two), tl, tc});
          advance(2);
          matched = true;
          break;
        }
      }
    }
    if (matched) continue;
    static constexpr std::string_view kSingle = ";{}()[],|&!?<>=+-*/^:.";
    if (kSingle.find(c) == std::string_view::npos) {
      throw ParseError(std::string("unexpected character '") + c + "'", tl, tc);
    }
    out.push_back({TokKind::Sym, std::string(1, c), tl, tc});
    advance(1);
  }
  out.push_back({TokKind::End, "", line, col});
  return out;
}

}  // namespace shcsp::detail
