// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Grounding and valuation of knowledge bases on a Tape.
//
// A GroundingTable holds one tape node per ground atom over a batch of
// objects. `evaluate_kb` walks each formula: atoms are looked up, connectives
// apply the configured kernels, and a prenex quantifier block aggregates its
// instances innermost-first in lexicographic order over the batch. The loss
// is L = -sum_phi w_phi * e(phi).

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfl/autodiff.hpp"
#include "dfl/logic.hpp"
#include "dfl/operators.hpp"

namespace dfl {

/// Clamp applied to model outputs before they enter fuzzy kernels.
inline constexpr double kModelEpsilon = 1e-7;

/// Named objects, optionally with embeddings of a common dimension.
class Domain {
 public:
  Domain() = default;
  explicit Domain(std::vector<std::string> names);
  Domain(std::vector<std::string> names, std::vector<std::vector<double>> embeddings);

  /// Index of `name`, adding it if absent.
  std::size_t intern(std::string_view name);
  /// Throws SemanticError for an unknown name.
  std::size_t index_of(std::string_view name) const;
  const std::string& name(std::size_t index) const { return names_.at(index); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::vector<double>>& embeddings() const { return embeddings_; }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> embeddings_;
};

/// `b` distinct object indices drawn uniformly without replacement, sorted.
std::vector<std::size_t> sample_batch(std::size_t domain_size, std::size_t b, std::uint64_t seed);

struct GroundAtom {
  std::string predicate;
  std::vector<std::size_t> objects;

  friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
};

std::string to_string(const GroundAtom& atom, const Domain* domain = nullptr);

/// Truth value of P(o_1..o_k) for object indices; supplied by a lookup table
/// or a model.
using Interpretation =
    std::function<double(const std::string& predicate, std::span<const std::size_t> objects)>;

/// Tape nodes for every ground atom of a signature over a batch.
class GroundingTable {
 public:
  GroundingTable(Signature signature, std::vector<std::size_t> batch);

  const Signature& signature() const { return signature_; }
  const std::vector<std::size_t>& batch() const { return batch_; }
  /// Total entries: sum over predicates of b^arity.
  std::size_t size() const { return nodes_.size(); }

  /// Predicate id in signature order; throws SemanticError if unknown.
  std::size_t predicate_id(std::string_view predicate) const;
  std::size_t arity(std::size_t predicate_id) const { return arity_[predicate_id]; }
  /// Slot of a predicate applied to batch *positions* (not object indices).
  std::size_t slot(std::size_t predicate_id, std::span<const std::size_t> positions) const;
  /// Position of an object index within the batch; throws if absent.
  std::size_t position_of(std::size_t object) const;

  NodeId node(std::size_t slot) const { return nodes_[slot]; }
  void set(std::size_t slot, NodeId node) { nodes_[slot] = node; }
  GroundAtom atom(std::size_t slot) const;
  /// Lookup by predicate name and object indices.
  NodeId at(std::string_view predicate, std::span<const std::size_t> objects) const;

 private:
  Signature signature_;
  std::vector<std::string> predicate_names_;
  std::vector<std::size_t> arity_;
  std::vector<std::size_t> offset_;
  std::vector<std::size_t> batch_;
  std::map<std::size_t, std::size_t> position_;
  std::vector<NodeId> nodes_;
};

/// Creates one leaf per ground atom, in slot order. Values within 1e-6 of
/// [0, 1] are pulled into it; further outside is a NumericError. With
/// `clamp_epsilon` > 0 values are clamped to [eps, 1 - eps].
GroundingTable build_grounding(Tape& tape, const Interpretation& interpretation,
                               const Signature& signature, std::vector<std::size_t> batch,
                               double clamp_epsilon = 0.0);

/// A table of atom truth values, read from `pred(o1,o2)=0.95` lines.
class LookupTable {
 public:
  void set(const GroundAtom& atom, double value);
  double get(const std::string& predicate, std::span<const std::size_t> objects) const;
  bool contains(const GroundAtom& atom) const { return values_.count(atom) != 0; }

  Domain& domain() { return domain_; }
  const Domain& domain() const { return domain_; }
  const std::map<GroundAtom, double>& values() const { return values_; }
  Interpretation interpretation() const;
  /// All object indices in declaration order.
  std::vector<std::size_t> all_objects() const;

 private:
  Domain domain_;
  std::map<GroundAtom, double> values_;
};

LookupTable parse_grounding(std::string_view text);
LookupTable load_grounding(const std::string& path);

/// Variable -> object index.
using VariableAssignment = std::map<std::string, std::size_t>;

/// One instance of a top-level implication, with identity nodes standing for
/// this occurrence of its antecedent and consequent.
struct ImplicationInstance {
  std::size_t formula = 0;
  NodeId antecedent;
  NodeId consequent;
  std::vector<std::size_t> objects;  // per bound variable, declaration order
};

struct KbEvaluation {
  NodeId loss;
  std::vector<NodeId> formula_values;
  std::vector<ImplicationInstance> implications;  // only when traced
  std::size_t matrix_evaluations = 0;
};

/// Valuation of one formula under `mu` (which must bind its free variables).
NodeId valuate(Tape& tape, const Formula& f, const GroundingTable& g, const OperatorConfig& ops,
               const VariableAssignment& mu = {});

/// Builds every formula's valuation and the loss node. Throws SemanticError
/// when log_product would feed a connective or an outer quantifier.
KbEvaluation evaluate_kb(Tape& tape, const KnowledgeBase& kb, const GroundingTable& g,
                         const OperatorConfig& ops, bool trace_implications = false);

NodeId dfl_loss(Tape& tape, const KnowledgeBase& kb, const GroundingTable& g,
                const OperatorConfig& ops);

struct AtomGradient {
  GroundAtom atom;
  double value;
  double d_loss;       // dL/datom
  double d_valuation;  // d(sum_phi w_phi e(phi))/datom = -dL/datom
};

/// Gradients of the loss with respect to every grounding entry, slot order.
std::vector<AtomGradient> atom_gradients(Tape& tape, const KnowledgeBase& kb,
                                         const GroundingTable& g, const OperatorConfig& ops);

}  // namespace dfl
