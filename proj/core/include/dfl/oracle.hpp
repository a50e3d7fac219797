// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact reference computations over enumerated worlds.
//
// The grounded knowledge base is the conjunction of every formula instance
// over the batch (weights are ignored). A world is a 0/1 assignment to every
// entry of the grounding table; its probability is prod p^w (1-p)^(1-w).
// Semantic loss is -log of the total probability of satisfying worlds. The
// product-logic valuation (T_P, S_P, I_RC, log-product aggregation) coincides
// with that probability when every ground atom occurs at most once.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "dfl/logic.hpp"
#include "dfl/valuation.hpp"

namespace dfl {

/// Largest number of ground atoms the enumerator accepts (2^20 worlds).
inline constexpr std::size_t kWorldCap = 20;

/// One total assignment. Bit i is the truth of `atoms[i]`.
struct World {
  const std::vector<GroundAtom>* atoms = nullptr;
  std::uint32_t bits = 0;

  bool value(std::size_t i) const { return (bits >> i) & 1u; }
};

using WorldVisitor = std::function<void(const World& world, double probability, bool satisfied)>;

struct Enumeration {
  double probability = 0.0;  // Kahan-summed mass of satisfying worlds
  std::size_t worlds = 0;
  std::size_t satisfying = 0;
  std::vector<GroundAtom> atoms;
};

/// Enumerates all 2^n worlds over the grounding's atoms. Throws
/// CapacityError when n exceeds kWorldCap.
Enumeration enumerate_worlds(const KnowledgeBase& kb, const Interpretation& probabilities,
                             const std::vector<std::size_t>& batch,
                             const WorldVisitor& visitor = {});

/// -log of the satisfying probability; +inf when no world satisfies the KB.
double semantic_loss(const KnowledgeBase& kb, const Interpretation& probabilities,
                     const std::vector<std::size_t>& batch);

/// Product of the formulas' product-logic valuations, each brought back to
/// probability space (exp of the log-product aggregate).
double dpfl_valuation(const KnowledgeBase& kb, const Interpretation& probabilities,
                      const std::vector<std::size_t>& batch);

struct OccurrenceCensus {
  std::map<GroundAtom, std::size_t> counts;  // only atoms that occur
  bool single_occurrence = true;
};

/// Occurrences of each ground atom across all formula instances.
OccurrenceCensus occurrence_census(const KnowledgeBase& kb, const std::vector<std::size_t>& batch);

struct EquivalenceReport {
  double exact = 0.0;
  double dpfl = 0.0;
  double gap = 0.0;
  bool single_occurrence = true;
  std::size_t atoms = 0;
  std::size_t worlds = 0;
};

EquivalenceReport equivalence_report(const KnowledgeBase& kb, const Interpretation& probabilities,
                                     const std::vector<std::size_t>& batch);

}  // namespace dfl
