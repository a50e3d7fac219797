// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/logic.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "dfl/error.hpp"
#include "dfl/random.hpp"

namespace dfl {
namespace {

constexpr const char* kChair = "forall x, y: chair(x) & partOf(y, x) -> cushion(y) | armRest(y)";

TEST(Parse, ChairFormulaStructure) {
  const Formula f = parse_formula(kChair);
  ASSERT_EQ(f.kind(), Formula::Kind::kForAll);
  EXPECT_EQ(f.names(), (std::vector<std::string>{"x", "y"}));
  const Formula& m = f.body();
  ASSERT_EQ(m.kind(), Formula::Kind::kImplies);
  EXPECT_EQ(m.lhs().kind(), Formula::Kind::kAnd);
  EXPECT_EQ(m.rhs().kind(), Formula::Kind::kOr);
  EXPECT_EQ(m.lhs().rhs().predicate(), "partOf");
  EXPECT_EQ(m.lhs().rhs().names(), (std::vector<std::string>{"y", "x"}));
}

TEST(Parse, FreeAndBound) {
  const FormulaStructure s = free_and_bound(parse_formula(kChair));
  EXPECT_EQ(s.bound, (std::vector<std::string>{"x", "y"}));
  std::vector<std::string> atoms;
  for (const auto& a : s.atoms) atoms.push_back(to_string(a));
  EXPECT_EQ(atoms, (std::vector<std::string>{"chair(x)", "partOf(y, x)", "cushion(y)", "armRest(y)"}));
}

TEST(Parse, QuantifierRank) {
  EXPECT_EQ(quantifier_rank(parse_formula(kChair)), 2u);
  EXPECT_EQ(quantifier_rank(parse_formula("forall x: forall y, z: p(x, y, z)")), 3u);
  EXPECT_EQ(quantifier_rank(parse_formula("p & q")), 0u);
}

TEST(Parse, Precedence) {
  EXPECT_EQ(to_string(parse_formula("forall x: p(x) | q(x) & r(x)")), "forall x: p(x) | q(x) & r(x)");
  const Formula f = parse_formula("forall x: p(x) | q(x) & r(x)");
  EXPECT_EQ(f.body().kind(), Formula::Kind::kOr);
  EXPECT_EQ(f.body().rhs().kind(), Formula::Kind::kAnd);
  const Formula g = parse_formula("forall x: ~p(x) & q(x)");
  EXPECT_EQ(g.body().kind(), Formula::Kind::kAnd);
  EXPECT_EQ(g.body().lhs().kind(), Formula::Kind::kNot);
}

TEST(Parse, ImplicationIsRightAssociative) {
  const Formula f = parse_formula("a -> b -> c");
  ASSERT_EQ(f.kind(), Formula::Kind::kImplies);
  EXPECT_EQ(f.rhs().kind(), Formula::Kind::kImplies);
  EXPECT_EQ(to_string(parse_formula("(a -> b) -> c")), "(a -> b) -> c");
  EXPECT_EQ(to_string(f), "a -> b -> c");
}

TEST(Parse, NullaryAtoms) {
  EXPECT_EQ(parse_formula("p()"), parse_formula("p"));
  EXPECT_EQ(to_string(parse_formula("p & ~(p & q)")), "p & ~(p & q)");
}

struct Rejection {
  const char* text;
  const char* fragment;
};

class Rejects : public ::testing::TestWithParam<Rejection> {};

TEST_P(Rejects, WithDiagnostic) {
  try {
    parse_formula(GetParam().text, 7);
    FAIL() << "accepted: " << GetParam().text;
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(GetParam().fragment), std::string::npos) << e.what();
    EXPECT_EQ(e.line(), 7);
    EXPECT_GE(e.column(), 1);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Formulas, Rejects,
    ::testing::Values(Rejection{"forall x: p(x) & forall y: q(y)", "prefix"},
                      Rejection{"exists x: p(x)", "exists"},
                      Rejection{"forall x: p(y)", "not bound"},
                      Rejection{"forall x: p(x) & p(x, x)", "arity"},
                      Rejection{"forall x: p(x) &", "expected"},
                      Rejection{"forall x: (p(x)", "')'"},
                      Rejection{"forall x: p(x) $ q(x)", "unexpected character"},
                      Rejection{"forall x p(x)", "expected"},
                      Rejection{"", "expected"}));

TEST(Parse, ErrorColumnPointsAtOffender) {
  try {
    parse_formula("forall x: p(x) -> q(z)");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 21);
  }
}

// Random ASTs over bound variables with a fixed arity per predicate.
Formula random_formula(Rng& rng, int depth, const std::vector<std::string>& vars) {
  static const char* const kPreds[] = {"p", "q", "r", "s"};
  if (depth == 0 || rng.below(4) == 0) {
    const std::size_t which = rng.below(4);
    static const char* const kProps[] = {"a", "b", "c", "d"};
    if (vars.empty()) return Formula::atom(kProps[which]);
    std::vector<std::string> terms;
    for (std::size_t k = 0; k < which % 3; ++k) terms.push_back(vars[rng.below(vars.size())]);
    return Formula::atom(kPreds[which], terms);
  }
  switch (rng.below(4)) {
    case 0: return Formula::negate(random_formula(rng, depth - 1, vars));
    case 1: return Formula::conj(random_formula(rng, depth - 1, vars), random_formula(rng, depth - 1, vars));
    case 2: return Formula::disj(random_formula(rng, depth - 1, vars), random_formula(rng, depth - 1, vars));
    default:
      return Formula::implies(random_formula(rng, depth - 1, vars), random_formula(rng, depth - 1, vars));
  }
}

TEST(RoundTrip, ThousandRandomFormulas) {
  Rng rng(20260101);
  const std::vector<std::string> vars{"x", "y", "z"};
  for (int i = 0; i < 1000; ++i) {
    Formula body = random_formula(rng, 5, i % 3 == 0 ? std::vector<std::string>{} : vars);
    Formula f = i % 3 == 0 ? body
                : i % 3 == 1 ? Formula::forall(vars, body)
                             : Formula::forall({"x"}, Formula::forall({"y", "z"}, body));
    const std::string text = to_string(f);
    const Formula back = parse_formula(text);
    ASSERT_EQ(back, f) << text;
    ASSERT_EQ(to_string(back), text);
  }
}

TEST(KnowledgeBase, WeightsCommentsAndBlankLines) {
  const KnowledgeBase kb = parse_kb(
      "# header\n"
      "\n"
      "2.5 forall x: raven(x) -> black(x)  # trailing\n"
      "forall x, y: partOf(x, y) -> ~partOf(y, x)\n");
  ASSERT_EQ(kb.size(), 2u);
  EXPECT_DOUBLE_EQ(kb.formulas()[0].weight, 2.5);
  EXPECT_DOUBLE_EQ(kb.formulas()[1].weight, 1.0);
  EXPECT_EQ(kb.formulas()[0].line, 3);
  EXPECT_EQ(kb.signature().at("partOf"), 2u);
  EXPECT_EQ(kb.signature().at("raven"), 1u);
}

TEST(KnowledgeBase, RejectsCrossFormulaArityConflict) {
  try {
    parse_kb("forall x: p(x)\nforall x, y: p(x, y)\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(KnowledgeBase, RejectsNonPositiveWeight) {
  EXPECT_THROW(parse_kb("0 forall x: p(x)"), ParseError);
  EXPECT_THROW(parse_kb("-1 forall x: p(x)"), ParseError);
  EXPECT_THROW(KnowledgeBase().add(parse_formula("p"), 0.0), SemanticError);
}

TEST(KnowledgeBase, MissingFileIsInputError) {
  EXPECT_THROW(load_kb("/nonexistent/file.dfl"), InputError);
}

// Every single-character deletion or insertion of a grammar token into
// corpus lines either parses or fails with a ParseError; nothing else.
TEST(KnowledgeBase, MutationsFailCleanly) {
  std::ifstream in(std::string(DFL_DATA_DIR) + "/chair.dfl");
  ASSERT_TRUE(in);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string inserts = "()&|~,:-># xq";
  int rejected = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    std::vector<std::string> variants{text.substr(0, i) + text.substr(i + 1)};
    for (char c : inserts) variants.push_back(text.substr(0, i) + c + text.substr(i));
    for (const auto& v : variants) {
      try {
        parse_kb(v);
      } catch (const ParseError& e) {
        EXPECT_GE(e.line(), 1);
        ++rejected;
      }
    }
  }
  EXPECT_GT(rejected, 100);
}

}  // namespace
}  // namespace dfl
