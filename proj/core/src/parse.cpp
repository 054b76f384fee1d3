#include "p3/expr.hpp"

#include <cctype>
#include <charconv>
#include <vector>

// Recursive-descent parser for the expression surface syntax.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?          right-associative
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//
// '#' starts a comment running to end of line. x1/x2/x3 are variables, the
// eight known function names are recognized at call sites, every other
// identifier is a parameter reference.

namespace p3 {

namespace {

enum class Tok { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  double value = 0;
  std::string text;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  void advance(size_t n = 1) {
    for (size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  }

  Token next() {
    for (;;) {
      while (pos < src.size() && std::isspace((unsigned char)src[pos])) advance();
      if (pos < src.size() && src[pos] == '#') {
        while (pos < src.size() && src[pos] != '\n') advance();
        continue;
      }
      break;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (pos >= src.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = src[pos];
    switch (c) {
      case '+': t.kind = Tok::Plus; advance(); return t;
      case '-': t.kind = Tok::Minus; advance(); return t;
      case '*': t.kind = Tok::Star; advance(); return t;
      case '/': t.kind = Tok::Slash; advance(); return t;
      case '^': t.kind = Tok::Caret; advance(); return t;
      case '(': t.kind = Tok::LParen; advance(); return t;
      case ')': t.kind = Tok::RParen; advance(); return t;
      default: break;
    }
    if (std::isdigit((unsigned char)c) ||
        (c == '.' && pos + 1 < src.size() && std::isdigit((unsigned char)src[pos + 1]))) {
      size_t start = pos;
      while (pos < src.size() && std::isdigit((unsigned char)src[pos])) advance();
      if (pos < src.size() && src[pos] == '.') {
        advance();
        while (pos < src.size() && std::isdigit((unsigned char)src[pos])) advance();
      }
      if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
        size_t mark = pos;
        int mline = line, mcol = col;
        advance();
        if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) advance();
        if (pos < src.size() && std::isdigit((unsigned char)src[pos])) {
          while (pos < src.size() && std::isdigit((unsigned char)src[pos])) advance();
        } else {
          // not an exponent after all ("2e" could start an identifier elsewhere,
          // but a dangling exponent marker is a lexical error here)
          pos = mark;
          line = mline;
          col = mcol;
          throw ParseError(t.line, t.col, "malformed numeric literal");
        }
      }
      t.kind = Tok::Num;
      t.text = src.substr(start, pos - start);
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
        throw ParseError(t.line, t.col, "malformed numeric literal");
      return t;
    }
    if (std::isalpha((unsigned char)c)) {
      size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum((unsigned char)src[pos]) || src[pos] == '_'))
        advance();
      t.kind = Tok::Ident;
      t.text = src.substr(start, pos - start);
      return t;
    }
    throw ParseError(t.line, t.col, std::string("unexpected character '") + c + "'");
  }
};

struct Parser {
  std::vector<Token> toks;
  size_t i = 0;

  const Token& peek() const { return toks[i]; }
  Token take() { return toks[i++]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw ParseError(t.line, t.col, msg);
  }

  Expression expr() {
    Expression e = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      Tok k = take().kind;
      e = make_binary(k == Tok::Plus ? Op::Add : Op::Sub, e, term());
    }
    return e;
  }

  Expression term() {
    Expression e = factor();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      Tok k = take().kind;
      e = make_binary(k == Tok::Star ? Op::Mul : Op::Div, e, factor());
    }
    return e;
  }

  Expression factor() {
    if (peek().kind == Tok::Minus) {
      take();
      return make_unary(Op::Neg, factor());
    }
    return power();
  }

  Expression power() {
    Expression base = atom();
    if (peek().kind == Tok::Caret) {
      take();
      return make_binary(Op::Pow, base, factor());
    }
    return base;
  }

  static Op function_op(const std::string& name) {
    if (name == "sin") return Op::Sin;
    if (name == "cos") return Op::Cos;
    if (name == "tan") return Op::Tan;
    if (name == "sec") return Op::Sec;
    if (name == "cot") return Op::Cot;
    if (name == "exp") return Op::Exp;
    if (name == "ln") return Op::Ln;
    if (name == "sqrt") return Op::Sqrt;
    return Op::Number;  // sentinel: not a function
  }

  Expression atom() {
    Token t = take();
    switch (t.kind) {
      case Tok::Num: return num(t.value);
      case Tok::LParen: {
        Expression e = expr();
        if (peek().kind != Tok::RParen) fail(peek(), "expected ')'");
        take();
        return e;
      }
      case Tok::Ident: {
        if (peek().kind == Tok::LParen) {
          Op op = function_op(t.text);
          if (op == Op::Number)
            fail(t, "unknown function '" + t.text + "'");
          take();
          Expression arg = expr();
          if (peek().kind != Tok::RParen) fail(peek(), "expected ')'");
          take();
          return make_unary(op, arg);
        }
        if (t.text.size() == 2 && t.text[0] == 'x' && t.text[1] >= '1' && t.text[1] <= '3')
          return var(t.text[1] - '0');
        return param(t.text);
      }
      case Tok::End: fail(t, "unexpected end of input");
      default: fail(t, "unexpected token");
    }
  }
};

}  // namespace

Expression parse(const std::string& text) {
  Lexer lex(text);
  Parser p;
  for (;;) {
    Token t = lex.next();
    bool end = t.kind == Tok::End;
    p.toks.push_back(std::move(t));
    if (end) break;
  }
  Expression e = p.expr();
  if (p.peek().kind != Tok::End) p.fail(p.peek(), "trailing input");
  return e;
}

}  // namespace p3
