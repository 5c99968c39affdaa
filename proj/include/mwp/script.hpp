#pragma once

// Restricted straight-line solution scripts: assignment statements over
// numeric expressions plus a single final print. Anything with control flow,
// comparisons, user functions, floor division, modulo, strings or multi-arg
// calls is rejected up front with the matching error category.

#include <cctype>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mwp/decimal.hpp"

namespace mwp {

enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class UnOp { Negate, Trunc, Round };

enum class ScriptErrorKind {
  Syntax,
  UnsupportedConstruct,
  ComplexExpression,
  Structural,
};

class ScriptError : public std::runtime_error {
 public:
  ScriptError(ScriptErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ScriptErrorKind kind() const { return kind_; }

 private:
  ScriptErrorKind kind_;
};

struct Expr {
  enum class Kind { Literal, Ident, Binary, Unary };
  Kind kind = Kind::Literal;
  Decimal literal;
  int literal_ordinal = -1;  // occurrence order of the literal in the source
  std::string ident;
  BinOp bin_op = BinOp::Add;
  UnOp un_op = UnOp::Negate;
  std::unique_ptr<Expr> lhs, rhs;  // Unary uses lhs only
};

struct Statement {
  enum class Kind { Assign, Output };
  Kind kind = Kind::Assign;
  std::string target;  // Assign only
  Expr expr;
};

struct SolutionScript {
  std::vector<Statement> statements;
  std::string raw_source;
};

namespace script_detail {

enum class Tok { End, Newline, Ident, Number, Plus, Minus, Star, Slash, Pow, LParen, RParen, Assign, Comma };

struct Token {
  Tok kind;
  std::string text;
};

inline const std::set<std::string, std::less<>>& control_keywords() {
  static const std::set<std::string, std::less<>> kw = {
      "if", "elif", "else", "while", "for", "def", "return", "import", "from",
      "lambda", "with", "class", "try", "except", "finally", "assert", "in",
      "not", "and", "or", "is", "break", "continue", "pass", "global",
      "nonlocal", "True", "False", "None", "yield", "raise", "del", "match"};
  return kw;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_blanks();
    if (pos_ >= src_.size()) return {Tok::End, ""};
    char c = src_[pos_];
    if (c == '\n' || c == ';') {
      ++pos_;
      return {Tok::Newline, "\n"};
    }
    if (c == '#') {
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      return next();
    }
    if (std::isdigit((unsigned char)c) || (c == '.' && pos_ + 1 < src_.size() && std::isdigit((unsigned char)src_[pos_ + 1]))) {
      size_t start = pos_;
      bool dot = false;
      while (pos_ < src_.size() &&
             (std::isdigit((unsigned char)src_[pos_]) || (src_[pos_] == '.' && !dot))) {
        if (src_[pos_] == '.') {
          // a trailing lone '.' (e.g. "5.)" ) stays part of the number only
          // when followed by a digit or end-of-token context; Python allows "5."
          dot = true;
        }
        ++pos_;
      }
      return {Tok::Number, std::string(src_.substr(start, pos_ - start))};
    }
    if (std::isalpha((unsigned char)c) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
        ++pos_;
      std::string word(src_.substr(start, pos_ - start));
      if (control_keywords().count(word))
        throw ScriptError(ScriptErrorKind::UnsupportedConstruct,
                          "unsupported construct: '" + word + "'");
      return {Tok::Ident, word};
    }
    switch (c) {
      case '+':
        if (peek2('=')) throw ScriptError(ScriptErrorKind::Structural, "augmented assignment");
        ++pos_;
        return {Tok::Plus, "+"};
      case '-':
        if (peek2('=')) throw ScriptError(ScriptErrorKind::Structural, "augmented assignment");
        ++pos_;
        return {Tok::Minus, "-"};
      case '*':
        if (peek2('*')) {
          pos_ += 2;
          if (pos_ < src_.size() && src_[pos_] == '=')
            throw ScriptError(ScriptErrorKind::Structural, "augmented assignment");
          return {Tok::Pow, "**"};
        }
        if (peek2('=')) throw ScriptError(ScriptErrorKind::Structural, "augmented assignment");
        ++pos_;
        return {Tok::Star, "*"};
      case '/':
        if (peek2('/'))
          throw ScriptError(ScriptErrorKind::ComplexExpression, "floor division");
        if (peek2('=')) throw ScriptError(ScriptErrorKind::Structural, "augmented assignment");
        ++pos_;
        return {Tok::Slash, "/"};
      case '%':
        throw ScriptError(ScriptErrorKind::ComplexExpression, "modulo operator");
      case '(':
        ++pos_;
        return {Tok::LParen, "("};
      case ')':
        ++pos_;
        return {Tok::RParen, ")"};
      case ',':
        ++pos_;
        return {Tok::Comma, ","};
      case '=':
        if (peek2('='))
          throw ScriptError(ScriptErrorKind::UnsupportedConstruct, "comparison operator");
        ++pos_;
        return {Tok::Assign, "="};
      case '<':
      case '>':
      case '!':
        throw ScriptError(ScriptErrorKind::UnsupportedConstruct, "comparison operator");
      case '"':
      case '\'':
        throw ScriptError(ScriptErrorKind::ComplexExpression, "string literal");
      default:
        throw ScriptError(ScriptErrorKind::Syntax,
                          std::string("unexpected character '") + c + "'");
    }
  }

 private:
  bool peek2(char c) const { return pos_ + 1 < src_.size() && src_[pos_ + 1] == c; }
  void skip_blanks() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r'))
      ++pos_;
  }
  std::string_view src_;
  size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  SolutionScript parse() {
    SolutionScript script;
    bool saw_output = false;
    while (cur_.kind != Tok::End) {
      if (cur_.kind == Tok::Newline) {
        advance();
        continue;
      }
      if (saw_output)
        throw ScriptError(ScriptErrorKind::Structural, "statement after print");
      Statement st = parse_statement();
      if (st.kind == Statement::Kind::Output) saw_output = true;
      script.statements.push_back(std::move(st));
      if (cur_.kind != Tok::End && cur_.kind != Tok::Newline)
        throw ScriptError(ScriptErrorKind::Syntax, "trailing tokens after statement");
    }
    if (script.statements.empty())
      throw ScriptError(ScriptErrorKind::Syntax, "empty script");
    if (!saw_output)
      throw ScriptError(ScriptErrorKind::Structural, "no print statement");
    check_identifiers(script);
    return script;
  }

 private:
  Statement parse_statement() {
    if (cur_.kind != Tok::Ident)
      throw ScriptError(ScriptErrorKind::Syntax, "expected identifier or print");
    std::string name = cur_.text;
    advance();
    if (name == "print") {
      expect(Tok::LParen, "expected '(' after print");
      Statement st;
      st.kind = Statement::Kind::Output;
      st.expr = parse_expr();
      if (cur_.kind == Tok::Comma)
        throw ScriptError(ScriptErrorKind::ComplexExpression, "multi-argument print");
      expect(Tok::RParen, "expected ')' after print argument");
      return st;
    }
    if (cur_.kind == Tok::LParen)
      throw ScriptError(ScriptErrorKind::ComplexExpression,
                        "function call '" + name + "'");
    expect(Tok::Assign, "expected '=' in assignment");
    Statement st;
    st.kind = Statement::Kind::Assign;
    st.target = std::move(name);
    st.expr = parse_expr();
    return st;
  }

  Expr parse_expr() {
    Expr e = parse_term();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      BinOp op = cur_.kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      advance();
      Expr rhs = parse_term();
      e = make_binary(op, std::move(e), std::move(rhs));
    }
    return e;
  }

  Expr parse_term() {
    Expr e = parse_unary();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      BinOp op = cur_.kind == Tok::Star ? BinOp::Mul : BinOp::Div;
      advance();
      Expr rhs = parse_unary();
      e = make_binary(op, std::move(e), std::move(rhs));
    }
    return e;
  }

  Expr parse_unary() {
    if (cur_.kind == Tok::Minus) {
      advance();
      Expr operand = parse_unary();
      return make_unary(UnOp::Negate, std::move(operand));
    }
    if (cur_.kind == Tok::Plus) {  // unary plus: no-op
      advance();
      return parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (cur_.kind == Tok::Pow) {
      advance();
      Expr exp = parse_unary();  // right-associative, exponent may be signed
      return make_binary(BinOp::Pow, std::move(base), std::move(exp));
    }
    return base;
  }

  Expr parse_primary() {
    if (cur_.kind == Tok::Number) {
      Expr e;
      e.kind = Expr::Kind::Literal;
      e.literal = Decimal::parse(cur_.text);
      e.literal_ordinal = literal_counter_++;
      advance();
      return e;
    }
    if (cur_.kind == Tok::Ident) {
      std::string name = cur_.text;
      advance();
      if (cur_.kind == Tok::LParen) {
        if (name != "int" && name != "round")
          throw ScriptError(ScriptErrorKind::ComplexExpression,
                            "function call '" + name + "'");
        advance();
        Expr operand = parse_expr();
        if (cur_.kind == Tok::Comma)
          throw ScriptError(ScriptErrorKind::ComplexExpression,
                            "multi-argument call '" + name + "'");
        expect(Tok::RParen, "expected ')' in call");
        return make_unary(name == "int" ? UnOp::Trunc : UnOp::Round, std::move(operand));
      }
      Expr e;
      e.kind = Expr::Kind::Ident;
      e.ident = std::move(name);
      return e;
    }
    if (cur_.kind == Tok::LParen) {
      advance();
      Expr e = parse_expr();
      expect(Tok::RParen, "expected ')'");
      return e;
    }
    throw ScriptError(ScriptErrorKind::Syntax, "expected expression");
  }

  static Expr make_binary(BinOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Expr::Kind::Binary;
    e.bin_op = op;
    e.lhs = std::make_unique<Expr>(std::move(lhs));
    e.rhs = std::make_unique<Expr>(std::move(rhs));
    return e;
  }

  static Expr make_unary(UnOp op, Expr operand) {
    Expr e;
    e.kind = Expr::Kind::Unary;
    e.un_op = op;
    e.lhs = std::make_unique<Expr>(std::move(operand));
    return e;
  }

  static void collect_idents(const Expr& e, std::vector<std::string>& out) {
    switch (e.kind) {
      case Expr::Kind::Ident:
        out.push_back(e.ident);
        break;
      case Expr::Kind::Binary:
        collect_idents(*e.lhs, out);
        collect_idents(*e.rhs, out);
        break;
      case Expr::Kind::Unary:
        collect_idents(*e.lhs, out);
        break;
      case Expr::Kind::Literal:
        break;
    }
  }

  static void check_identifiers(const SolutionScript& script) {
    std::set<std::string> defined;
    for (const auto& st : script.statements) {
      std::vector<std::string> used;
      collect_idents(st.expr, used);
      for (const auto& id : used)
        if (!defined.count(id))
          throw ScriptError(ScriptErrorKind::Structural,
                            "identifier '" + id + "' used before assignment");
      if (st.kind == Statement::Kind::Assign) {
        if (defined.count(st.target))
          throw ScriptError(ScriptErrorKind::Structural,
                            "identifier '" + st.target + "' reassigned");
        defined.insert(st.target);
      }
    }
  }

  void expect(Tok kind, const char* msg) {
    if (cur_.kind != kind) throw ScriptError(ScriptErrorKind::Syntax, msg);
    advance();
  }

  void advance() { cur_ = lexer_.next(); }

  Lexer lexer_;
  Token cur_;
  int literal_counter_ = 0;
};

inline void render_expr(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      out += e.literal.to_string();
      break;
    case Expr::Kind::Ident:
      out += e.ident;
      break;
    case Expr::Kind::Unary:
      if (e.un_op == UnOp::Negate) {
        out += "-(";
        render_expr(*e.lhs, out);
        out += ")";
      } else {
        out += e.un_op == UnOp::Trunc ? "int(" : "round(";
        render_expr(*e.lhs, out);
        out += ")";
      }
      break;
    case Expr::Kind::Binary: {
      out += "(";
      render_expr(*e.lhs, out);
      switch (e.bin_op) {
        case BinOp::Add: out += " + "; break;
        case BinOp::Sub: out += " - "; break;
        case BinOp::Mul: out += " * "; break;
        case BinOp::Div: out += " / "; break;
        case BinOp::Pow: out += " ** "; break;
      }
      render_expr(*e.rhs, out);
      out += ")";
      break;
    }
  }
}

}  // namespace script_detail

inline SolutionScript parse_script(std::string_view source) {
  script_detail::Parser parser(source);
  SolutionScript script = parser.parse();
  script.raw_source = std::string(source);
  return script;
}

// Canonical source form; reparsing yields a structurally identical script.
inline std::string render_script(const SolutionScript& script) {
  std::string out;
  for (const auto& st : script.statements) {
    if (st.kind == Statement::Kind::Assign) {
      out += st.target;
      out += " = ";
      script_detail::render_expr(st.expr, out);
    } else {
      out += "print(";
      script_detail::render_expr(st.expr, out);
      out += ")";
    }
    out += "\n";
  }
  return out;
}

inline bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Literal: return a.literal == b.literal;
    case Expr::Kind::Ident: return a.ident == b.ident;
    case Expr::Kind::Unary: return a.un_op == b.un_op && expr_equal(*a.lhs, *b.lhs);
    case Expr::Kind::Binary:
      return a.bin_op == b.bin_op && expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
  }
  return false;
}

inline bool script_equal(const SolutionScript& a, const SolutionScript& b) {
  if (a.statements.size() != b.statements.size()) return false;
  for (size_t i = 0; i < a.statements.size(); ++i) {
    const auto& sa = a.statements[i];
    const auto& sb = b.statements[i];
    if (sa.kind != sb.kind || sa.target != sb.target) return false;
    if (!expr_equal(sa.expr, sb.expr)) return false;
  }
  return true;
}

}  // namespace mwp
