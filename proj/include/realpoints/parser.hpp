#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "realpoints/polynomial.hpp"

namespace realpoints {

struct ParseError : std::runtime_error {
  int line, column;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error("line " + std::to_string(l) + ", column " +
                           std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

namespace detail {

enum class Tok {
  number,     // numeric literal, possibly imaginary
  ident,
  plus,
  minus,
  star,
  caret,
  lparen,
  rparen,
  colon,
  lineend,    // newline or ';'
  end
};

struct Token {
  Tok kind;
  std::string text;
  Complex value{};   // for number tokens
  bool is_int = false;
  long long int_value = 0;
  int line = 1, column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance_token(); }

  const Token& peek() const { return current_; }

  Token next() {
    Token t = current_;
    advance_token();
    return t;
  }

 private:
  void advance_token() {
    // skip spaces, tabs, CR, and # comments (to end of line)
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        step();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') step();
      } else {
        break;
      }
    }
    current_ = Token{};
    current_.line = line_;
    current_.column = col_;
    if (pos_ >= src_.size()) {
      current_.kind = Tok::end;
      return;
    }
    char c = src_[pos_];
    if (c == '\n' || c == ';') {
      current_.kind = Tok::lineend;
      current_.text = std::string(1, c);
      step();
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t b = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        step();
      current_.text = std::string(src_.substr(b, pos_ - b));
      if (current_.text == "i") {
        current_.kind = Tok::number;
        current_.value = Complex(0.0, 1.0);
      } else {
        current_.kind = Tok::ident;
      }
      return;
    }
    switch (c) {
      case '+': current_.kind = Tok::plus; break;
      case '-': current_.kind = Tok::minus; break;
      case '*': current_.kind = Tok::star; break;
      case '^': current_.kind = Tok::caret; break;
      case '(': current_.kind = Tok::lparen; break;
      case ')': current_.kind = Tok::rparen; break;
      case ':': current_.kind = Tok::colon; break;
      default:
        throw ParseError("unexpected character '" + std::string(1, c) + "'",
                         line_, col_);
    }
    current_.text = std::string(1, c);
    step();
  }

  void lex_number() {
    std::size_t b = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_])))
      step();
    bool is_int = true;
    double num = 0.0, den = 1.0;
    std::string intpart(src_.substr(b, pos_ - b));
    if (pos_ < src_.size() && src_[pos_] == '/') {
      // rational a/b: only when digits follow immediately
      std::size_t save = pos_;
      int sl = line_, sc = col_;
      step();
      if (pos_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        std::size_t db = pos_;
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          step();
        num = std::stod(intpart);
        den = std::stod(std::string(src_.substr(db, pos_ - db)));
        if (den == 0.0) throw ParseError("division by zero in rational literal", sl, sc);
        is_int = false;
      } else {
        pos_ = save;  // lone '/': not part of a literal
        line_ = sl;
        col_ = sc;
        num = std::stod(intpart);
      }
    } else {
      std::string text = intpart;
      if (pos_ < src_.size() && src_[pos_] == '.') {
        is_int = false;
        std::size_t db = pos_;
        step();
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          step();
        text += std::string(src_.substr(db, pos_ - db));
      }
      // exponent part: unambiguous because juxtaposition is not allowed,
      // so a number can never be directly followed by an identifier
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_;
        int sl = line_, sc = col_;
        step();
        std::size_t eb = pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) step();
        if (pos_ < src_.size() &&
            std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[pos_])))
            step();
          text += "e" + std::string(src_.substr(eb, pos_ - eb));
          is_int = false;
        } else {
          pos_ = save;
          line_ = sl;
          col_ = sc;
        }
      }
      num = std::stod(text);
    }
    double v = num / den;
    current_.kind = Tok::number;
    current_.value = Complex(v, 0.0);
    current_.is_int = is_int && den == 1.0;
    if (current_.is_int) current_.int_value = std::stoll(intpart);
    // immediate trailing 'i' makes the literal imaginary: 3i, 1/5i, 2.5i
    if (pos_ < src_.size() && src_[pos_] == 'i' &&
        (pos_ + 1 >= src_.size() ||
         (!std::isalnum(static_cast<unsigned char>(src_[pos_ + 1])) &&
          src_[pos_ + 1] != '_'))) {
      step();
      current_.value = Complex(0.0, v);
      current_.is_int = false;
    }
  }

  void step() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token current_;
};

/// Recursive-descent expression parser producing a Polynomial over a fixed
/// variable list. Grammar: + - * ^ ( ) over numeric literals and variables;
/// ^ takes a nonnegative integer literal; no juxtaposition.
class ExprParser {
 public:
  ExprParser(Lexer& lex, const std::vector<std::string>& vars)
      : lex_(lex), vars_(vars) {}

  Polynomial parse_expr() {
    Polynomial acc = parse_term();
    while (lex_.peek().kind == Tok::plus || lex_.peek().kind == Tok::minus) {
      Token op = lex_.next();
      Polynomial rhs = parse_term();
      acc = (op.kind == Tok::plus) ? acc + rhs : acc - rhs;
    }
    return acc;
  }

 private:
  Polynomial parse_term() {
    Polynomial acc = parse_factor();
    while (true) {
      Tok k = lex_.peek().kind;
      if (k == Tok::star) {
        lex_.next();
        acc = acc * parse_factor();
      } else if (k == Tok::number || k == Tok::ident || k == Tok::lparen) {
        const Token& t = lex_.peek();
        throw ParseError("missing '*' before '" + t.text + "'", t.line,
                         t.column);
      } else {
        break;
      }
    }
    return acc;
  }

  Polynomial parse_factor() {
    if (lex_.peek().kind == Tok::minus) {
      lex_.next();
      return -parse_factor();
    }
    if (lex_.peek().kind == Tok::plus) {
      lex_.next();
      return parse_factor();
    }
    Polynomial base = parse_atom();
    while (lex_.peek().kind == Tok::caret) {
      lex_.next();
      Token e = lex_.next();
      if (e.kind != Tok::number || !e.is_int || e.int_value < 0)
        throw ParseError("exponent must be a nonnegative integer literal",
                         e.line, e.column);
      base = base.pow(int(e.int_value));
    }
    return base;
  }

  Polynomial parse_atom() {
    Token t = lex_.next();
    switch (t.kind) {
      case Tok::number:
        return Polynomial::constant(int(vars_.size()), t.value);
      case Tok::ident: {
        for (std::size_t v = 0; v < vars_.size(); ++v)
          if (vars_[v] == t.text)
            return Polynomial::variable(int(vars_.size()), int(v));
        throw ParseError("undeclared variable '" + t.text + "'", t.line,
                         t.column);
      }
      case Tok::lparen: {
        Polynomial inner = parse_expr();
        Token close = lex_.next();
        if (close.kind != Tok::rparen)
          throw ParseError("expected ')'", close.line, close.column);
        return inner;
      }
      default:
        throw ParseError("unexpected '" + (t.text.empty() ? "end of input"
                                                          : t.text) + "'",
                         t.line, t.column);
    }
  }

  Lexer& lex_;
  const std::vector<std::string>& vars_;
};

}  // namespace detail

/// Parse a system file: a "variables:" header followed by one polynomial per
/// line. Lines end at '\n' or ';'; '#' starts a comment.
inline PolynomialSystem parse_system(std::string_view text) {
  detail::Lexer lex(text);
  using detail::Tok;

  auto skip_blank_lines = [&] {
    while (lex.peek().kind == Tok::lineend) lex.next();
  };

  skip_blank_lines();
  detail::Token head = lex.next();
  if (head.kind != Tok::ident || head.text != "variables")
    throw ParseError("expected 'variables:' header", head.line, head.column);
  detail::Token colon = lex.next();
  if (colon.kind != Tok::colon)
    throw ParseError("expected ':' after 'variables'", colon.line,
                     colon.column);
  std::vector<std::string> vars;
  while (lex.peek().kind == Tok::ident || lex.peek().kind == Tok::number) {
    detail::Token v = lex.next();
    if (v.kind != Tok::ident) {
      if (v.text == "i")
        throw ParseError("'i' is reserved for the imaginary unit", v.line,
                         v.column);
      throw ParseError("invalid variable name '" + v.text + "'", v.line,
                       v.column);
    }
    for (const auto& existing : vars)
      if (existing == v.text)
        throw ParseError("duplicate variable '" + v.text + "'", v.line,
                         v.column);
    vars.push_back(v.text);
  }
  if (vars.empty()) {
    const detail::Token& t = lex.peek();
    throw ParseError("no variables declared", t.line, t.column);
  }
  if (lex.peek().kind == Tok::lineend) lex.next();

  std::vector<Polynomial> polys;
  while (true) {
    skip_blank_lines();
    if (lex.peek().kind == Tok::end) break;
    detail::ExprParser ep(lex, vars);
    polys.push_back(ep.parse_expr());
    detail::Token tail = lex.peek();
    if (tail.kind != Tok::lineend && tail.kind != Tok::end)
      throw ParseError("unexpected '" + tail.text + "'", tail.line,
                       tail.column);
  }
  if (polys.empty()) {
    const detail::Token& t = lex.peek();
    throw ParseError("empty system: no polynomials", t.line, t.column);
  }
  return PolynomialSystem(std::move(vars), std::move(polys));
}

/// Parse one complex scalar literal, e.g. "2+3i", "1/2-1/5i", "-10/11".
inline Complex parse_complex_literal(std::string_view text) {
  detail::Lexer lex(text);
  std::vector<std::string> no_vars;
  detail::ExprParser ep(lex, no_vars);
  Polynomial p = ep.parse_expr();
  detail::Token tail = lex.next();
  if (tail.kind != detail::Tok::end)
    throw ParseError("unexpected '" + tail.text + "'", tail.line, tail.column);
  return p.eval(CVec(0));
}

/// Parse a comma-separated vector of complex literals.
inline CVec parse_complex_vector(std::string_view text) {
  std::vector<Complex> vals;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string_view piece = text.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    vals.push_back(parse_complex_literal(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  CVec v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

}  // namespace realpoints
