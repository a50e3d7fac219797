// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/valuation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dfl/error.hpp"
#include "dfl/random.hpp"

namespace dfl {

// ---------------------------------------------------------------------------
// Domain and sampling

Domain::Domain(std::vector<std::string> names) : names_(std::move(names)) {}

Domain::Domain(std::vector<std::string> names, std::vector<std::vector<double>> embeddings)
    : names_(std::move(names)), embeddings_(std::move(embeddings)) {
  if (embeddings_.size() != names_.size()) {
    throw SemanticError("domain: one embedding per object required");
  }
  for (const auto& e : embeddings_) {
    if (e.size() != embeddings_.front().size()) {
      throw SemanticError("domain: embeddings must share one dimension");
    }
  }
}

std::size_t Domain::intern(std::string_view name) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  names_.emplace_back(name);
  return names_.size() - 1;
}

std::size_t Domain::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw SemanticError("unknown object '" + std::string(name) + "'");
}

std::vector<std::size_t> sample_batch(std::size_t domain_size, std::size_t b, std::uint64_t seed) {
  if (b < 1 || b > domain_size) {
    throw SemanticError("batch size " + std::to_string(b) + " outside [1, " +
                        std::to_string(domain_size) + "]");
  }
  // Partial Fisher-Yates: the first b slots are a uniform sample.
  std::vector<std::size_t> idx(domain_size);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < b; ++i) {
    std::swap(idx[i], idx[i + rng.below(domain_size - i)]);
  }
  idx.resize(b);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string to_string(const GroundAtom& atom, const Domain* domain) {
  std::string out = atom.predicate;
  if (atom.objects.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < atom.objects.size(); ++i) {
    if (i) out += ',';
    out += domain ? domain->name(atom.objects[i]) : "o" + std::to_string(atom.objects[i]);
  }
  out += ')';
  return out;
}

// ---------------------------------------------------------------------------
// Grounding tables

GroundingTable::GroundingTable(Signature signature, std::vector<std::size_t> batch)
    : signature_(std::move(signature)), batch_(std::move(batch)) {
  std::sort(batch_.begin(), batch_.end());
  if (std::adjacent_find(batch_.begin(), batch_.end()) != batch_.end()) {
    throw SemanticError("batch contains duplicate objects");
  }
  for (std::size_t i = 0; i < batch_.size(); ++i) position_[batch_[i]] = i;
  std::size_t total = 0;
  for (const auto& [name, arity] : signature_) {
    if (arity > 0 && batch_.empty()) throw SemanticError("grounding needs a non-empty batch");
    predicate_names_.push_back(name);
    arity_.push_back(arity);
    offset_.push_back(total);
    std::size_t count = 1;
    for (std::size_t k = 0; k < arity; ++k) count *= batch_.size();
    total += count;
  }
  nodes_.assign(total, NodeId{});
}

std::size_t GroundingTable::predicate_id(std::string_view predicate) const {
  for (std::size_t i = 0; i < predicate_names_.size(); ++i) {
    if (predicate_names_[i] == predicate) return i;
  }
  throw SemanticError("predicate '" + std::string(predicate) + "' is not in the grounding");
}

std::size_t GroundingTable::slot(std::size_t predicate_id, std::span<const std::size_t> positions) const {
  std::size_t s = 0;
  for (std::size_t p : positions) s = s * batch_.size() + p;
  return offset_[predicate_id] + s;
}

std::size_t GroundingTable::position_of(std::size_t object) const {
  const auto it = position_.find(object);
  if (it == position_.end()) {
    throw SemanticError("object " + std::to_string(object) + " is not in the batch");
  }
  return it->second;
}

GroundAtom GroundingTable::atom(std::size_t slot) const {
  const auto it = std::upper_bound(offset_.begin(), offset_.end(), slot);
  const std::size_t pred = static_cast<std::size_t>(it - offset_.begin()) - 1;
  std::size_t rest = slot - offset_[pred];
  GroundAtom out{predicate_names_[pred], std::vector<std::size_t>(arity_[pred])};
  for (std::size_t k = arity_[pred]; k-- > 0;) {
    out.objects[k] = batch_[rest % batch_.size()];
    rest /= batch_.size();
  }
  return out;
}

NodeId GroundingTable::at(std::string_view predicate, std::span<const std::size_t> objects) const {
  const std::size_t id = predicate_id(predicate);
  if (objects.size() != arity_[id]) throw SemanticError("arity mismatch for " + std::string(predicate));
  std::vector<std::size_t> pos;
  for (std::size_t o : objects) pos.push_back(position_of(o));
  return nodes_[slot(id, pos)];
}

GroundingTable build_grounding(Tape& tape, const Interpretation& interpretation,
                               const Signature& signature, std::vector<std::size_t> batch,
                               double clamp_epsilon) {
  GroundingTable g(signature, std::move(batch));
  for (std::size_t s = 0; s < g.size(); ++s) {
    const GroundAtom atom = g.atom(s);
    double v = interpretation(atom.predicate, atom.objects);
    if (!(v >= -1e-6 && v <= 1.0 + 1e-6)) {
      throw NumericError("interpretation of " + to_string(atom) + " is outside [0, 1]: " +
                         std::to_string(v));
    }
    v = std::clamp(v, clamp_epsilon, 1.0 - clamp_epsilon);
    g.set(s, tape.leaf(v, "atom"));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Lookup tables

void LookupTable::set(const GroundAtom& atom, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw SemanticError("truth value of " + to_string(atom, &domain_) + " is outside [0, 1]");
  }
  values_[atom] = value;
}

double LookupTable::get(const std::string& predicate, std::span<const std::size_t> objects) const {
  GroundAtom key{predicate, std::vector<std::size_t>(objects.begin(), objects.end())};
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw SemanticError("no truth value for " + to_string(key, &domain_));
  }
  return it->second;
}

Interpretation LookupTable::interpretation() const {
  return [this](const std::string& p, std::span<const std::size_t> o) { return get(p, o); };
}

std::vector<std::size_t> LookupTable::all_objects() const {
  std::vector<std::size_t> out(domain_.size());
  std::iota(out.begin(), out.end(), 0);
  return out;
}

LookupTable parse_grounding(std::string_view text) {
  LookupTable table;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    std::string compact;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
    }
    if (compact.empty()) continue;
    const auto eq = compact.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'atom=value'", line_no, 1);
    const std::string lhs = compact.substr(0, eq);
    const std::string rhs = compact.substr(eq + 1);
    char* stop = nullptr;
    const double value = std::strtod(rhs.c_str(), &stop);
    if (rhs.empty() || stop != rhs.c_str() + rhs.size()) {
      throw ParseError("malformed truth value '" + rhs + "'", line_no, static_cast<int>(eq) + 2);
    }
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ParseError("truth value " + rhs + " is outside [0, 1]", line_no, static_cast<int>(eq) + 2);
    }
    GroundAtom atom;
    const auto open = lhs.find('(');
    atom.predicate = lhs.substr(0, open);
    auto valid_ident = [](const std::string& s) {
      if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
      return std::all_of(s.begin(), s.end(),
                         [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
    };
    if (!valid_ident(atom.predicate)) throw ParseError("malformed predicate name", line_no, 1);
    if (open != std::string::npos) {
      if (lhs.back() != ')') throw ParseError("expected ')'", line_no, static_cast<int>(lhs.size()));
      const std::string inner = lhs.substr(open + 1, lhs.size() - open - 2);
      std::size_t start = 0;
      while (!inner.empty()) {
        const auto comma = inner.find(',', start);
        const std::string name = inner.substr(start, comma - start);
        if (!valid_ident(name)) throw ParseError("malformed object name '" + name + "'", line_no, 1);
        atom.objects.push_back(table.domain().intern(name));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    if (table.contains(atom)) {
      throw ParseError("duplicate entry for " + to_string(atom, &table.domain()), line_no, 1);
    }
    table.set(atom, value);
  }
  return table;
}

LookupTable load_grounding(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open grounding '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_grounding(buf.str());
}

// ---------------------------------------------------------------------------
// Valuation

namespace {

// A formula flattened into an array with variables resolved to slots of a
// position vector, so instance enumeration does no string work.
struct Compiled {
  struct Op {
    Formula::Kind kind;
    int lhs = -1;
    int rhs = -1;
    std::size_t predicate = 0;
    std::vector<std::size_t> vars;
  };
  std::vector<Op> ops;
  int root = -1;
  std::vector<std::size_t> block_vars;  // quantified variable slots, outermost first
  std::size_t blocks = 0;
};

class Compiler {
 public:
  Compiler(const GroundingTable& g, std::vector<std::string>& names) : g_(g), names_(names) {}

  int compile(const Formula& f, Compiled& out) {
    Compiled::Op op;
    op.kind = f.kind();
    switch (f.kind()) {
      case Formula::Kind::kAtom:
        op.predicate = g_.predicate_id(f.predicate());
        if (f.names().size() != g_.arity(op.predicate)) {
          throw SemanticError("atom " + to_string(f) + " does not match the grounding's arity");
        }
        for (const auto& v : f.names()) op.vars.push_back(slot_of(v));
        break;
      case Formula::Kind::kNot:
        op.lhs = compile(f.child(), out);
        break;
      case Formula::Kind::kForAll:
        throw SemanticError("quantifier inside a formula body is not supported");
      default:
        op.lhs = compile(f.lhs(), out);
        op.rhs = compile(f.rhs(), out);
    }
    out.ops.push_back(std::move(op));
    return static_cast<int>(out.ops.size()) - 1;
  }

  std::size_t slot_of(const std::string& var) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == var) return i;
    }
    throw SemanticError("variable '" + var + "' is free and unassigned");
  }

 private:
  const GroundingTable& g_;
  std::vector<std::string>& names_;
};

class Evaluator {
 public:
  Evaluator(Tape& tape, const GroundingTable& g, const OperatorConfig& ops)
      : tape_(tape),
        g_(g),
        ops_(ops),
        t_label_("T:" + ops.tnorm.descriptor().spec()),
        s_label_("S:" + ops.tconorm.descriptor().spec()),
        i_label_("I:" + ops.implication.descriptor().spec()),
        a_label_("A:" + ops.aggregator.descriptor().spec()) {}

  // Evaluates `f` with the given free-variable positions. When `trace` is
  // non-null and the matrix is an implication, each instance's antecedent
  // and consequent are routed through identity nodes and recorded.
  NodeId run(const Formula& f, const VariableAssignment& mu, std::size_t formula_index,
             std::vector<ImplicationInstance>* trace, std::size_t& evaluations) {
    std::vector<std::string> names;
    std::vector<std::size_t> positions;
    for (const auto& [var, object] : mu) {
      names.push_back(var);
      positions.push_back(g_.position_of(object));
    }
    Compiled c;
    const Formula* cur = &f;
    while (cur->kind() == Formula::Kind::kForAll) {
      for (const auto& v : cur->names()) {
        names.push_back(v);
        positions.push_back(0);
        c.block_vars.push_back(names.size() - 1);
      }
      ++c.blocks;
      cur = &cur->body();
    }
    if (ops_.aggregator.is_log_domain() && c.blocks > 1) {
      throw SemanticError(
          "log_product: the value of an inner quantifier would be consumed by an outer one; "
          "merge the quantifiers into a single 'forall x, y:' block");
    }
    Compiler compiler(g_, names);
    c.root = compiler.compile(*cur, c);
    compiled_ = &c;
    positions_ = &positions;
    trace_ = trace;
    formula_index_ = formula_index;
    evaluations_ = &evaluations;
    return quantify(0);
  }

 private:
  NodeId quantify(std::size_t level) {
    const Compiled& c = *compiled_;
    if (level == c.block_vars.size()) {
      ++*evaluations_;
      return matrix_instance();
    }
    const std::size_t b = g_.batch().size();
    std::vector<NodeId> children;
    std::vector<double> values;
    children.reserve(b);
    values.reserve(b);
    for (std::size_t p = 0; p < b; ++p) {
      (*positions_)[c.block_vars[level]] = p;
      children.push_back(quantify(level + 1));
      values.push_back(tape_.value(children.back()));
    }
    const bool innermost = level + 1 == c.block_vars.size();
    if (ops_.aggregator.is_log_domain() && !innermost) {
      // Inner levels already returned log-values: the log of a product of
      // products is the sum of the inner logs.
      const double total = std::accumulate(values.begin(), values.end(), 0.0);
      return tape_.record("A:log_sum", children, total, std::vector<double>(b, 1.0));
    }
    const AggregateEval r = ops_.aggregator(values);
    return tape_.record(a_label_, children, r.value, r.partials);
  }

  NodeId matrix_instance() {
    const Compiled& c = *compiled_;
    const auto& root = c.ops[static_cast<std::size_t>(c.root)];
    if (trace_ && root.kind == Formula::Kind::kImplies) {
      const NodeId a = eval(root.lhs);
      const NodeId cq = eval(root.rhs);
      const NodeId a_occ = tape_.record("occ", {a}, tape_.value(a), {1.0});
      const NodeId c_occ = tape_.record("occ", {cq}, tape_.value(cq), {1.0});
      ImplicationInstance inst{formula_index_, a_occ, c_occ, {}};
      for (std::size_t v : c.block_vars) inst.objects.push_back(g_.batch()[(*positions_)[v]]);
      trace_->push_back(std::move(inst));
      return binary(ops_.implication, i_label_, a_occ, c_occ);
    }
    return eval(c.root);
  }

  NodeId binary(const BinaryOperator& op, const std::string& label, NodeId x, NodeId y) {
    const BinaryEval r = op(tape_.value(x), tape_.value(y));
    return tape_.record(label, {x, y}, r.value, {r.d_first, r.d_second});
  }

  NodeId eval(int index) {
    const auto& op = compiled_->ops[static_cast<std::size_t>(index)];
    switch (op.kind) {
      case Formula::Kind::kAtom: {
        std::size_t pos[8];
        std::vector<std::size_t> big;
        std::span<const std::size_t> args;
        if (op.vars.size() <= 8) {
          for (std::size_t k = 0; k < op.vars.size(); ++k) pos[k] = (*positions_)[op.vars[k]];
          args = std::span<const std::size_t>(pos, op.vars.size());
        } else {
          for (std::size_t v : op.vars) big.push_back((*positions_)[v]);
          args = big;
        }
        return g_.node(g_.slot(op.predicate, args));
      }
      case Formula::Kind::kNot: {
        const NodeId x = eval(op.lhs);
        return tape_.record("N", {x}, 1.0 - tape_.value(x), {-1.0});
      }
      case Formula::Kind::kAnd: return binary(ops_.tnorm, t_label_, eval(op.lhs), eval(op.rhs));
      case Formula::Kind::kOr: return binary(ops_.tconorm, s_label_, eval(op.lhs), eval(op.rhs));
      case Formula::Kind::kImplies:
        return binary(ops_.implication, i_label_, eval(op.lhs), eval(op.rhs));
      case Formula::Kind::kForAll: break;
    }
    throw SemanticError("unexpected quantifier");
  }

  Tape& tape_;
  const GroundingTable& g_;
  const OperatorConfig& ops_;
  std::string t_label_, s_label_, i_label_, a_label_;
  const Compiled* compiled_ = nullptr;
  std::vector<std::size_t>* positions_ = nullptr;
  std::vector<ImplicationInstance>* trace_ = nullptr;
  std::size_t formula_index_ = 0;
  std::size_t* evaluations_ = nullptr;
};

}  // namespace

NodeId valuate(Tape& tape, const Formula& f, const GroundingTable& g, const OperatorConfig& ops,
               const VariableAssignment& mu) {
  std::size_t evaluations = 0;
  return Evaluator(tape, g, ops).run(f, mu, 0, nullptr, evaluations);
}

KbEvaluation evaluate_kb(Tape& tape, const KnowledgeBase& kb, const GroundingTable& g,
                         const OperatorConfig& ops, bool trace_implications) {
  KbEvaluation out;
  Evaluator evaluator(tape, g, ops);
  std::vector<double> partials;
  double loss = 0.0;
  for (std::size_t i = 0; i < kb.size(); ++i) {
    const auto& wf = kb.formulas()[i];
    const NodeId v = evaluator.run(wf.formula, {}, i, trace_implications ? &out.implications : nullptr,
                                   out.matrix_evaluations);
    out.formula_values.push_back(v);
    partials.push_back(-wf.weight);
    loss -= wf.weight * tape.value(v);
  }
  out.loss = tape.record("loss", out.formula_values, loss, partials);
  return out;
}

NodeId dfl_loss(Tape& tape, const KnowledgeBase& kb, const GroundingTable& g,
                const OperatorConfig& ops) {
  return evaluate_kb(tape, kb, g, ops).loss;
}

std::vector<AtomGradient> atom_gradients(Tape& tape, const KnowledgeBase& kb,
                                         const GroundingTable& g, const OperatorConfig& ops) {
  const NodeId loss = dfl_loss(tape, kb, g, ops);
  const GradientMap grad = tape.backward(loss);
  std::vector<AtomGradient> out;
  out.reserve(g.size());
  for (std::size_t s = 0; s < g.size(); ++s) {
    const NodeId n = g.node(s);
    out.push_back(AtomGradient{g.atom(s), tape.value(n), grad[n], -grad[n]});
  }
  return out;
}

}  // namespace dfl
