// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/oracle.hpp"

#include <cmath>
#include <limits>

#include "dfl/autodiff.hpp"
#include "dfl/error.hpp"
#include "dfl/operators.hpp"

namespace dfl {
namespace {

// Postfix program of one ground formula instance over grounding slots.
struct Instruction {
  Formula::Kind kind;
  std::size_t slot = 0;
};
using Program = std::vector<Instruction>;

void compile(const Formula& f, const GroundingTable& g, const VariableAssignment& mu, Program& out) {
  switch (f.kind()) {
    case Formula::Kind::kAtom: {
      std::vector<std::size_t> positions;
      for (const auto& v : f.names()) positions.push_back(g.position_of(mu.at(v)));
      out.push_back({Formula::Kind::kAtom, g.slot(g.predicate_id(f.predicate()), positions)});
      return;
    }
    case Formula::Kind::kNot:
      compile(f.child(), g, mu, out);
      out.push_back({Formula::Kind::kNot});
      return;
    case Formula::Kind::kForAll: throw SemanticError("quantifier inside a formula body");
    default:
      compile(f.lhs(), g, mu, out);
      compile(f.rhs(), g, mu, out);
      out.push_back({f.kind()});
  }
}

// Calls `fn` for every assignment of the prenex variables, lexicographically.
void for_each_instance(const Formula& f, const std::vector<std::size_t>& batch,
                       const std::function<void(const Formula&, const VariableAssignment&)>& fn) {
  std::vector<std::string> vars;
  const Formula* body = &f;
  while (body->kind() == Formula::Kind::kForAll) {
    vars.insert(vars.end(), body->names().begin(), body->names().end());
    body = &body->body();
  }
  VariableAssignment mu;
  std::function<void(std::size_t)> rec = [&](std::size_t level) {
    if (level == vars.size()) {
      fn(*body, mu);
      return;
    }
    for (std::size_t o : batch) {
      mu[vars[level]] = o;
      rec(level + 1);
    }
  };
  rec(0);
}

bool run(const Program& program, std::uint32_t bits, std::vector<char>& stack) {
  stack.clear();
  for (const Instruction& ins : program) {
    if (ins.kind == Formula::Kind::kAtom) {
      stack.push_back(static_cast<char>((bits >> ins.slot) & 1u));
      continue;
    }
    if (ins.kind == Formula::Kind::kNot) {
      stack.back() = !stack.back();
      continue;
    }
    const bool b = stack.back();
    stack.pop_back();
    const bool a = stack.back();
    switch (ins.kind) {
      case Formula::Kind::kAnd: stack.back() = a && b; break;
      case Formula::Kind::kOr: stack.back() = a || b; break;
      default: stack.back() = !a || b; break;
    }
  }
  return stack.back() != 0;
}

}  // namespace

Enumeration enumerate_worlds(const KnowledgeBase& kb, const Interpretation& probabilities,
                             const std::vector<std::size_t>& batch, const WorldVisitor& visitor) {
  const GroundingTable g(kb.signature(), batch);
  if (g.size() > kWorldCap) {
    throw CapacityError("world enumeration over " + std::to_string(g.size()) +
                        " ground atoms exceeds the cap of " + std::to_string(kWorldCap));
  }
  Enumeration out;
  std::vector<double> p;
  for (std::size_t s = 0; s < g.size(); ++s) {
    out.atoms.push_back(g.atom(s));
    const double v = probabilities(out.atoms.back().predicate, out.atoms.back().objects);
    if (!(v >= 0.0 && v <= 1.0)) {
      throw NumericError("probability of " + to_string(out.atoms.back()) + " is outside [0, 1]");
    }
    p.push_back(v);
  }
  std::vector<Program> programs;
  for (const auto& wf : kb.formulas()) {
    for_each_instance(wf.formula, g.batch(), [&](const Formula& m, const VariableAssignment& mu) {
      programs.emplace_back();
      compile(m, g, mu, programs.back());
    });
  }
  const std::uint32_t count = 1u << g.size();
  std::vector<char> stack;
  double sum = 0.0, compensation = 0.0;
  for (std::uint32_t bits = 0; bits < count; ++bits) {
    bool sat = true;
    for (const Program& prog : programs) {
      if (!run(prog, bits, stack)) {
        sat = false;
        break;
      }
    }
    if (!sat && !visitor) continue;
    double weight = 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) weight *= (bits >> i) & 1u ? p[i] : 1.0 - p[i];
    if (visitor) visitor(World{&out.atoms, bits}, weight, sat);
    if (!sat) continue;
    ++out.satisfying;
    const double y = weight - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
  }
  out.worlds = count;
  out.probability = sum;
  return out;
}

double semantic_loss(const KnowledgeBase& kb, const Interpretation& probabilities,
                     const std::vector<std::size_t>& batch) {
  const double prob = enumerate_worlds(kb, probabilities, batch).probability;
  return prob > 0.0 ? -std::log(prob) : std::numeric_limits<double>::infinity();
}

double dpfl_valuation(const KnowledgeBase& kb, const Interpretation& probabilities,
                      const std::vector<std::size_t>& batch) {
  Tape tape;
  const GroundingTable g = build_grounding(tape, probabilities, kb.signature(), batch);
  const OperatorConfig ops = OperatorConfig::product_logic();
  double total = 1.0;
  for (const auto& wf : kb.formulas()) {
    const double v = tape.value(valuate(tape, wf.formula, g, ops));
    total *= wf.formula.kind() == Formula::Kind::kForAll ? std::exp(v) : v;
  }
  return total;
}

OccurrenceCensus occurrence_census(const KnowledgeBase& kb, const std::vector<std::size_t>& batch) {
  const GroundingTable g(kb.signature(), batch);
  OccurrenceCensus out;
  std::vector<std::size_t> counts(g.size(), 0);
  for (const auto& wf : kb.formulas()) {
    for_each_instance(wf.formula, g.batch(), [&](const Formula& m, const VariableAssignment& mu) {
      Program prog;
      compile(m, g, mu, prog);
      for (const Instruction& ins : prog) {
        if (ins.kind == Formula::Kind::kAtom) ++counts[ins.slot];
      }
    });
  }
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] == 0) continue;
    out.counts[g.atom(s)] = counts[s];
    if (counts[s] > 1) out.single_occurrence = false;
  }
  return out;
}

EquivalenceReport equivalence_report(const KnowledgeBase& kb, const Interpretation& probabilities,
                                     const std::vector<std::size_t>& batch) {
  const Enumeration e = enumerate_worlds(kb, probabilities, batch);
  EquivalenceReport r;
  r.exact = e.probability;
  r.dpfl = dpfl_valuation(kb, probabilities, batch);
  r.gap = std::abs(r.exact - r.dpfl);
  r.single_occurrence = occurrence_census(kb, batch).single_occurrence;
  r.atoms = e.atoms.size();
  r.worlds = e.worlds;
  return r;
}

}  // namespace dfl
