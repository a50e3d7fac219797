// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Function-free prenex first-order formulas and weighted knowledge bases.
//
// Surface syntax (one formula per KB line, `#` starts a comment):
//
//   formula := ("forall" ident ("," ident)* ":")* expr
//   expr    := or ("->" expr)?
//   or      := and ("|" and)*
//   and     := unary ("&" unary)*
//   unary   := "~" unary | atom | "(" expr ")"
//   atom    := ident ("(" (ident ("," ident)*)? ")")?
//
// Quantifier-free formulas over nullary atoms (`p`, `p()`) are accepted for
// propositional knowledge bases. `exists` is reserved and rejected.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace dfl {

class Formula {
 public:
  enum class Kind { kForAll, kImplies, kAnd, kOr, kNot, kAtom };

  static Formula forall(std::vector<std::string> vars, Formula body);
  static Formula implies(Formula lhs, Formula rhs);
  static Formula conj(Formula lhs, Formula rhs);
  static Formula disj(Formula lhs, Formula rhs);
  static Formula negate(Formula child);
  static Formula atom(std::string predicate, std::vector<std::string> terms = {});

  Kind kind() const;
  /// Quantified variables (kForAll) or argument variables (kAtom).
  const std::vector<std::string>& names() const;
  const std::string& predicate() const;
  /// Left operand, sole child of kNot, or body of kForAll.
  const Formula& lhs() const;
  const Formula& rhs() const;
  const Formula& child() const { return lhs(); }
  const Formula& body() const { return lhs(); }

  bool is_binary() const {
    const Kind k = kind();
    return k == Kind::kImplies || k == Kind::kAnd || k == Kind::kOr;
  }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Canonical text: minimal parentheses, `, ` between arguments.
std::string to_string(const Formula& f);

/// Parses one formula. Throws ParseError (an InputError) with 1-based
/// line/column on syntax errors, non-prenex quantifiers, `exists`, unbound
/// variables and arity conflicts. `line` is reported in diagnostics.
Formula parse_formula(std::string_view text, int line = 1);

/// Quantified variables in declaration order and atoms in left-to-right order.
struct FormulaStructure {
  std::vector<std::string> bound;
  std::vector<Formula> atoms;
};
FormulaStructure free_and_bound(const Formula& f);

/// Number of quantified variables.
std::size_t quantifier_rank(const Formula& f);

/// The quantifier-free body under the prenex chain.
const Formula& matrix(const Formula& f);

using Signature = std::map<std::string, std::size_t>;

struct WeightedFormula {
  Formula formula;
  double weight = 1.0;
  int line = 0;  // source line, 0 when built programmatically
};

class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  /// Throws SemanticError on a non-positive/non-finite weight and ParseError
  /// on an arity conflict with earlier formulas.
  void add(Formula formula, double weight = 1.0, int line = 0);

  const std::vector<WeightedFormula>& formulas() const { return formulas_; }
  const Signature& signature() const { return signature_; }
  std::size_t size() const { return formulas_.size(); }
  bool empty() const { return formulas_.empty(); }

 private:
  std::vector<WeightedFormula> formulas_;
  Signature signature_;
};

/// Parses a `.dfl` knowledge base: `[weight] formula` per line.
KnowledgeBase parse_kb(std::string_view text);
KnowledgeBase load_kb(const std::string& path);

}  // namespace dfl
