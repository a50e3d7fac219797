// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/logic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dfl/error.hpp"

namespace dfl {

struct Formula::Node {
  Kind kind;
  std::vector<std::string> names;
  std::string predicate;
  Formula lhs{nullptr};
  Formula rhs{nullptr};
};

Formula Formula::forall(std::vector<std::string> vars, Formula body) {
  if (vars.empty()) throw SemanticError("forall needs at least one variable");
  return Formula(std::make_shared<const Node>(
      Node{Kind::kForAll, std::move(vars), {}, std::move(body), Formula(nullptr)}));
}
Formula Formula::implies(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::kImplies, {}, {}, std::move(lhs), std::move(rhs)}));
}
Formula Formula::conj(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::kAnd, {}, {}, std::move(lhs), std::move(rhs)}));
}
Formula Formula::disj(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::kOr, {}, {}, std::move(lhs), std::move(rhs)}));
}
Formula Formula::negate(Formula child) {
  return Formula(
      std::make_shared<const Node>(Node{Kind::kNot, {}, {}, std::move(child), Formula(nullptr)}));
}
Formula Formula::atom(std::string predicate, std::vector<std::string> terms) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::kAtom, std::move(terms), std::move(predicate), Formula(nullptr), Formula(nullptr)}));
}

Formula::Kind Formula::kind() const { return node_->kind; }
const std::vector<std::string>& Formula::names() const { return node_->names; }
const std::string& Formula::predicate() const { return node_->predicate; }
const Formula& Formula::lhs() const { return node_->lhs; }
const Formula& Formula::rhs() const { return node_->rhs; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.names == y.names && x.predicate == y.predicate && x.lhs == y.lhs &&
         x.rhs == y.rhs;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::kForAll: return 0;
    case Formula::Kind::kImplies: return 1;
    case Formula::Kind::kOr: return 2;
    case Formula::Kind::kAnd: return 3;
    case Formula::Kind::kNot:
    case Formula::Kind::kAtom: return 4;
  }
  return 4;
}

void print(const Formula& f, std::string& out);

void print_operand(const Formula& f, bool parenthesize, std::string& out) {
  if (parenthesize) out += '(';
  print(f, out);
  if (parenthesize) out += ')';
}

void print(const Formula& f, std::string& out) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::kForAll: {
      out += "forall ";
      for (std::size_t i = 0; i < f.names().size(); ++i) {
        if (i) out += ", ";
        out += f.names()[i];
      }
      out += ": ";
      print(f.body(), out);
      return;
    }
    case K::kAtom: {
      out += f.predicate();
      if (f.names().empty()) return;
      out += '(';
      for (std::size_t i = 0; i < f.names().size(); ++i) {
        if (i) out += ", ";
        out += f.names()[i];
      }
      out += ')';
      return;
    }
    case K::kNot:
      out += '~';
      print_operand(f.child(), precedence(f.child().kind()) < 4, out);
      return;
    case K::kImplies:
    case K::kOr:
    case K::kAnd: {
      const int mine = precedence(f.kind());
      const char* op = f.kind() == K::kImplies ? " -> " : f.kind() == K::kOr ? " | " : " & ";
      // & and | associate left, -> associates right.
      const bool right_assoc = f.kind() == K::kImplies;
      const int lp = precedence(f.lhs().kind());
      const int rp = precedence(f.rhs().kind());
      print_operand(f.lhs(), right_assoc ? lp <= mine : lp < mine, out);
      out += op;
      print_operand(f.rhs(), right_assoc ? rp < mine : rp <= mine, out);
      return;
    }
  }
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { kIdent, kForAll, kExists, kLParen, kRParen, kComma, kColon, kAnd, kOr, kNot, kArrow, kEnd };

struct Token {
  Tok kind;
  std::string text;
  int column;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::kIdent: return "identifier";
    case Tok::kForAll: return "'forall'";
    case Tok::kExists: return "'exists'";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kComma: return "','";
    case Tok::kColon: return "':'";
    case Tok::kAnd: return "'&'";
    case Tok::kOr: return "'|'";
    case Tok::kNot: return "'~'";
    case Tok::kArrow: return "'->'";
    case Tok::kEnd: return "end of input";
  }
  return "?";
}

std::vector<Token> lex(std::string_view text, int line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char ch = text[i];
    const int col = static_cast<int>(i) + 1;
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      std::string word(text.substr(i, j - i));
      Tok kind = word == "forall" ? Tok::kForAll : word == "exists" ? Tok::kExists : Tok::kIdent;
      out.push_back({kind, std::move(word), col});
      i = j;
      continue;
    }
    switch (ch) {
      case '(': out.push_back({Tok::kLParen, "(", col}); break;
      case ')': out.push_back({Tok::kRParen, ")", col}); break;
      case ',': out.push_back({Tok::kComma, ",", col}); break;
      case ':': out.push_back({Tok::kColon, ":", col}); break;
      case '&': out.push_back({Tok::kAnd, "&", col}); break;
      case '|': out.push_back({Tok::kOr, "|", col}); break;
      case '~': out.push_back({Tok::kNot, "~", col}); break;
      case '-':
        if (i + 1 < text.size() && text[i + 1] == '>') {
          out.push_back({Tok::kArrow, "->", col});
          ++i;
          break;
        }
        [[fallthrough]];
      default:
        throw ParseError(std::string("unexpected character '") + ch + "'", line, col);
    }
    ++i;
  }
  out.push_back({Tok::kEnd, "", static_cast<int>(text.size()) + 1});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, int line) : tokens_(lex(text, line)), line_(line) {}

  Formula parse() {
    std::vector<std::vector<std::string>> blocks;
    while (peek().kind == Tok::kForAll) {
      next();
      std::vector<std::string> vars;
      do {
        const Token& v = expect(Tok::kIdent, "variable name");
        if (std::find(bound_.begin(), bound_.end(), v.text) != bound_.end()) {
          fail("variable '" + v.text + "' is quantified twice", v);
        }
        bound_.push_back(v.text);
        vars.push_back(v.text);
      } while (accept(Tok::kComma));
      expect(Tok::kColon, "':' after quantified variables");
      blocks.push_back(std::move(vars));
    }
    Formula body = expr();
    if (peek().kind != Tok::kEnd) fail(std::string("unexpected ") + describe(peek().kind), peek());
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
      body = Formula::forall(std::move(*it), std::move(body));
    }
    return body;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool accept(Tok t) {
    if (peek().kind != t) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok t, const std::string& what) {
    if (peek().kind != t) {
      fail("expected " + what + ", found " + describe(peek().kind), peek());
    }
    return next();
  }
  [[noreturn]] void fail(const std::string& message, const Token& at) const {
    throw ParseError(message, line_, at.column);
  }

  Formula expr() {
    Formula lhs = disjunction();
    if (accept(Tok::kArrow)) return Formula::implies(std::move(lhs), expr());
    return lhs;
  }

  Formula disjunction() {
    Formula lhs = conjunction();
    while (accept(Tok::kOr)) lhs = Formula::disj(std::move(lhs), conjunction());
    return lhs;
  }

  Formula conjunction() {
    Formula lhs = unary();
    while (accept(Tok::kAnd)) lhs = Formula::conj(std::move(lhs), unary());
    return lhs;
  }

  Formula unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kNot:
        next();
        return Formula::negate(unary());
      case Tok::kLParen: {
        next();
        Formula inner = expr();
        expect(Tok::kRParen, "')'");
        return inner;
      }
      case Tok::kIdent:
        return atom();
      case Tok::kForAll:
        fail("quantifiers must form a prefix of the formula (prenex form)", t);
      case Tok::kExists:
        fail("existential quantification is not supported; 'exists' is reserved", t);
      default:
        fail(std::string("expected an atom, '~' or '(', found ") + describe(t.kind), t);
    }
  }

  Formula atom() {
    const Token& name = next();
    std::vector<std::string> terms;
    if (accept(Tok::kLParen)) {
      if (!accept(Tok::kRParen)) {
        do {
          const Token& v = expect(Tok::kIdent, "variable");
          if (std::find(bound_.begin(), bound_.end(), v.text) == bound_.end()) {
            fail("variable '" + v.text + "' is not bound by a quantifier", v);
          }
          terms.push_back(v.text);
        } while (accept(Tok::kComma));
        expect(Tok::kRParen, "')' or ','");
      }
    }
    const auto [it, inserted] = arity_.emplace(name.text, terms.size());
    if (!inserted && it->second != terms.size()) {
      fail("predicate '" + name.text + "' used with arity " + std::to_string(terms.size()) +
               " but earlier with arity " + std::to_string(it->second),
           name);
    }
    return Formula::atom(name.text, std::move(terms));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int line_;
  std::vector<std::string> bound_;
  std::map<std::string, std::size_t> arity_;
};

void collect_atoms(const Formula& f, std::vector<Formula>& out) {
  switch (f.kind()) {
    case Formula::Kind::kAtom: out.push_back(f); return;
    case Formula::Kind::kNot:
    case Formula::Kind::kForAll: collect_atoms(f.child(), out); return;
    default:
      collect_atoms(f.lhs(), out);
      collect_atoms(f.rhs(), out);
  }
}

}  // namespace

Formula parse_formula(std::string_view text, int line) { return Parser(text, line).parse(); }

FormulaStructure free_and_bound(const Formula& f) {
  FormulaStructure out;
  const Formula* cur = &f;
  while (cur->kind() == Formula::Kind::kForAll) {
    out.bound.insert(out.bound.end(), cur->names().begin(), cur->names().end());
    cur = &cur->body();
  }
  collect_atoms(*cur, out.atoms);
  return out;
}

std::size_t quantifier_rank(const Formula& f) {
  std::size_t rank = 0;
  for (const Formula* cur = &f; cur->kind() == Formula::Kind::kForAll; cur = &cur->body()) {
    rank += cur->names().size();
  }
  return rank;
}

const Formula& matrix(const Formula& f) {
  const Formula* cur = &f;
  while (cur->kind() == Formula::Kind::kForAll) cur = &cur->body();
  return *cur;
}

// ---------------------------------------------------------------------------
// Knowledge bases

void KnowledgeBase::add(Formula formula, double weight, int line) {
  if (!(std::isfinite(weight) && weight > 0.0)) {
    throw SemanticError((line ? "line " + std::to_string(line) + ": " : std::string()) +
                        "formula weight must be positive and finite");
  }
  Signature merged = signature_;
  for (const Formula& atom : free_and_bound(formula).atoms) {
    const auto [it, inserted] = merged.emplace(atom.predicate(), atom.names().size());
    if (!inserted && it->second != atom.names().size()) {
      throw ParseError("predicate '" + atom.predicate() + "' used with arity " +
                           std::to_string(atom.names().size()) + " but elsewhere with arity " +
                           std::to_string(it->second),
                       line, 1);
    }
  }
  signature_ = std::move(merged);
  formulas_.push_back(WeightedFormula{std::move(formula), weight, line});
}

KnowledgeBase parse_kb(std::string_view text) {
  KnowledgeBase kb;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size()) continue;

    double weight = 1.0;
    const char c = line[i];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+') {
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      const std::string number(line.substr(i, j - i));
      char* stop = nullptr;
      weight = std::strtod(number.c_str(), &stop);
      if (stop != number.c_str() + number.size()) {
        throw ParseError("malformed weight '" + number + "'", line_no, static_cast<int>(i) + 1);
      }
      if (!(std::isfinite(weight) && weight > 0.0)) {
        throw ParseError("weight must be positive, got '" + number + "'", line_no,
                         static_cast<int>(i) + 1);
      }
      i = j;
    }
    // Parse the remainder while keeping columns relative to the full line.
    std::string padded(i, ' ');
    padded.append(line.substr(i));
    kb.add(parse_formula(padded, line_no), weight, line_no);
    if (end == text.size()) break;
  }
  return kb;
}

KnowledgeBase load_kb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open knowledge base '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kb(buf.str());
}

}  // namespace dfl
