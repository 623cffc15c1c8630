#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tnl/formula.hpp"

namespace tnl {

namespace {

enum class TokKind {
  Ident,
  Integer,
  Not,
  And,
  Or,
  Implies,
  Iff,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Colon,
  End,
};

struct Token {
  TokKind kind;
  std::string_view text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view input) : input_(input) {}

  Token next() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ >= input_.size()) return {TokKind::End, {}, start};
    const char c = input_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_ + 1;
      while (end < input_.size() &&
             (std::isalnum(static_cast<unsigned char>(input_[end])) || input_[end] == '_')) {
        ++end;
      }
      Token t{TokKind::Ident, input_.substr(pos_, end - pos_), start};
      pos_ = end;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t end = pos_ + 1;
      while (end < input_.size() && std::isdigit(static_cast<unsigned char>(input_[end]))) ++end;
      Token t{TokKind::Integer, input_.substr(pos_, end - pos_), start};
      pos_ = end;
      return t;
    }
    switch (c) {
      case '~': ++pos_; return {TokKind::Not, "~", start};
      case '&': ++pos_; return {TokKind::And, "&", start};
      case '|': ++pos_; return {TokKind::Or, "|", start};
      case '(': ++pos_; return {TokKind::LParen, "(", start};
      case ')': ++pos_; return {TokKind::RParen, ")", start};
      case '{': ++pos_; return {TokKind::LBrace, "{", start};
      case '}': ++pos_; return {TokKind::RBrace, "}", start};
      case ',': ++pos_; return {TokKind::Comma, ",", start};
      case ':': ++pos_; return {TokKind::Colon, ":", start};
      case '-':
        if (pos_ + 1 < input_.size() && input_[pos_ + 1] == '>') {
          pos_ += 2;
          return {TokKind::Implies, "->", start};
        }
        throw ParseError(start, "unknown token '-'");
      case '<':
        if (pos_ + 2 < input_.size() && input_[pos_ + 1] == '-' && input_[pos_ + 2] == '>') {
          pos_ += 3;
          return {TokKind::Iff, "<->", start};
        }
        throw ParseError(start, "unknown token '<'");
      default:
        throw ParseError(start, std::string("unknown token '") + c + "'");
    }
  }

 private:
  void skip_ws() {
    while (pos_ < input_.size() && std::isspace(static_cast<unsigned char>(input_[pos_]))) ++pos_;
  }

  std::string_view input_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view input) : lexer_(input), input_size_(input.size()) {
    advance();
  }

  Formula parse() {
    if (cur_.kind == TokKind::End) throw ParseError(0, "empty input");
    Formula f = parse_iff();
    if (cur_.kind != TokKind::End) {
      throw ParseError(cur_.pos, "unexpected token '" + std::string(cur_.text) + "'");
    }
    return f;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  bool accept(TokKind k) {
    if (cur_.kind != k) return false;
    advance();
    return true;
  }

  void expect(TokKind k, const char* what) {
    if (cur_.kind != k) throw ParseError(cur_.pos, std::string("expected ") + what);
    advance();
  }

  [[noreturn]] void fail_here(const std::string& message) {
    throw ParseError(cur_.kind == TokKind::End ? input_size_ : cur_.pos, message);
  }

  Formula parse_iff() {
    Formula lhs = parse_impl();
    while (accept(TokKind::Iff)) {
      Formula rhs = parse_impl();
      lhs = Formula::biconditional(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula parse_impl() {
    Formula lhs = parse_or();
    if (accept(TokKind::Implies)) {
      Formula rhs = parse_impl();  // right associative
      return Formula::implication(std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Formula parse_or() {
    Formula first = parse_and();
    if (cur_.kind != TokKind::Or) return first;
    std::vector<Formula> kids;
    kids.push_back(std::move(first));
    while (accept(TokKind::Or)) kids.push_back(parse_and());
    return Formula::disjunction(std::move(kids));
  }

  Formula parse_and() {
    Formula first = parse_not();
    if (cur_.kind != TokKind::And) return first;
    std::vector<Formula> kids;
    kids.push_back(std::move(first));
    while (accept(TokKind::And)) kids.push_back(parse_not());
    return Formula::conjunction(std::move(kids));
  }

  Formula parse_not() {
    if (accept(TokKind::Not)) return Formula::negation(parse_not());
    if (accept(TokKind::LParen)) {
      Formula inner = parse_iff();
      expect(TokKind::RParen, "')'");
      return inner;
    }
    if (cur_.kind == TokKind::Ident) {
      if (cur_.text == "forall") {
        advance();
        return parse_forall();
      }
      return parse_atom();
    }
    fail_here("expected a formula");
  }

  Formula parse_forall() {
    if (cur_.kind != TokKind::Ident || cur_.text == "forall" || cur_.text == "in") {
      fail_here("expected a quantifier variable");
    }
    std::string var(cur_.text);
    advance();
    if (cur_.kind != TokKind::Ident || cur_.text != "in") fail_here("expected 'in'");
    advance();
    expect(TokKind::LBrace, "'{'");
    std::vector<Term> domain;
    domain.push_back(parse_term());
    while (accept(TokKind::Comma)) domain.push_back(parse_term());
    expect(TokKind::RBrace, "'}'");
    expect(TokKind::Colon, "':'");
    Formula body = parse_iff();
    return Formula::forall(std::move(var), std::move(domain), std::move(body));
  }

  Formula parse_atom() {
    std::string name(cur_.text);
    advance();
    std::vector<Term> args;
    if (accept(TokKind::LParen)) {
      args.push_back(parse_term());
      while (accept(TokKind::Comma)) args.push_back(parse_term());
      expect(TokKind::RParen, "')'");
    }
    return Formula::atom(std::move(name), std::move(args));
  }

  Term parse_term() {
    if (cur_.kind == TokKind::Ident) {
      Term t{std::string(cur_.text)};
      advance();
      return t;
    }
    if (cur_.kind == TokKind::Integer) {
      Term t{static_cast<std::int64_t>(std::stoll(std::string(cur_.text)))};
      advance();
      return t;
    }
    fail_here("expected a term");
  }

  Lexer lexer_;
  std::size_t input_size_;
  Token cur_{TokKind::End, {}, 0};
};

// Printing: emit the fewest parentheses that still reparse to the identical
// tree. Same-operator nesting of the n-ary connectives must be bracketed
// (`(A & B) & C` is distinct from `A & B & C`), a quantifier child swallows
// everything to its right unless bracketed, and associativity fixes which
// side of `->` and `<->` may stay bare.
enum class Ctx { Top, IffLhs, IffRhs, ImplLhs, ImplRhs, OrChild, AndChild, NotChild };

bool needs_parens(const Formula& f, Ctx ctx) {
  switch (f.kind()) {
    case FormulaKind::Atom:
      return false;
    case FormulaKind::Not:
      return false;
    case FormulaKind::ForAll:
      return ctx != Ctx::Top;
    case FormulaKind::And:
      return ctx == Ctx::AndChild || ctx == Ctx::NotChild;
    case FormulaKind::Or:
      return ctx == Ctx::OrChild || ctx == Ctx::AndChild || ctx == Ctx::NotChild;
    case FormulaKind::Implies:
      return ctx != Ctx::Top && ctx != Ctx::ImplRhs && ctx != Ctx::IffLhs && ctx != Ctx::IffRhs;
    case FormulaKind::Iff:
      return ctx != Ctx::Top && ctx != Ctx::IffLhs;
  }
  return true;
}

void print_node(const Formula& f, Ctx ctx, std::string& out) {
  const bool parens = needs_parens(f, ctx);
  if (parens) out += '(';
  switch (f.kind()) {
    case FormulaKind::Atom:
      out += f.atom_ref().to_string();
      break;
    case FormulaKind::Not:
      out += '~';
      print_node(f.operands()[0], Ctx::NotChild, out);
      break;
    case FormulaKind::And:
      for (std::size_t i = 0; i < f.operands().size(); ++i) {
        if (i) out += " & ";
        print_node(f.operands()[i], Ctx::AndChild, out);
      }
      break;
    case FormulaKind::Or:
      for (std::size_t i = 0; i < f.operands().size(); ++i) {
        if (i) out += " | ";
        print_node(f.operands()[i], Ctx::OrChild, out);
      }
      break;
    case FormulaKind::Implies:
      print_node(f.antecedent(), Ctx::ImplLhs, out);
      out += " -> ";
      print_node(f.consequent(), Ctx::ImplRhs, out);
      break;
    case FormulaKind::Iff:
      print_node(f.operands()[0], Ctx::IffLhs, out);
      out += " <-> ";
      print_node(f.operands()[1], Ctx::IffRhs, out);
      break;
    case FormulaKind::ForAll: {
      out += "forall ";
      out += f.variable();
      out += " in {";
      for (std::size_t i = 0; i < f.domain().size(); ++i) {
        if (i) out += ", ";
        out += term_to_string(f.domain()[i]);
      }
      out += "}: ";
      print_node(f.body(), Ctx::Top, out);
      break;
    }
  }
  if (parens) out += ')';
}

}  // namespace

Formula parse_formula(std::string_view text) { return Parser(text).parse(); }

std::string to_text(const Formula& f) {
  std::string out;
  print_node(f, Ctx::Top, out);
  return out;
}

}  // namespace tnl
