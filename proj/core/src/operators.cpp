// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "dfl/error.hpp"
#include "dfl/random.hpp"

namespace dfl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit(double x, std::string_view who) {
  if (!(x >= 0.0 && x <= 1.0)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    throw NumericError(std::string(who) + ": argument " + buf + " is outside [0, 1]");
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // Prefer the shortest representation that round-trips.
  for (int precision = 1; precision < 17; ++precision) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", precision, x);
    if (std::strtod(shorter, nullptr) == x) return shorter;
  }
  return buf;
}

double require_p(const OperatorParams& params, std::string_view who, double minimum,
                 bool inclusive) {
  if (!params.p) throw SemanticError(std::string(who) + " requires parameter p");
  const double p = *params.p;
  const bool ok = std::isfinite(p) && (inclusive ? p >= minimum : p > minimum);
  if (!ok) {
    throw SemanticError(std::string(who) + ": p must be " + (inclusive ? ">= " : "> ") +
                        format_number(minimum) + ", got " + format_number(p));
  }
  return p;
}

void forbid_params(const OperatorParams& params, std::string_view who) {
  if (params.p || params.s || params.b0 || !params.base.empty()) {
    throw SemanticError(std::string(who) + " takes no parameters");
  }
}

using P = Property;

const std::vector<Property> kTNormLaws = {P::kCommutative, P::kAssociative, P::kNeutral,
                                          P::kMonotone, P::kBoundary};
const std::vector<Property> kSImplicationLaws = {P::kLeftNeutral, P::kExchange,
                                                 P::kContrapositive, P::kLeftContrapositive,
                                                 P::kRightContrapositive};

std::vector<Property> with(std::vector<Property> base, std::initializer_list<Property> extra) {
  base.insert(base.end(), extra.begin(), extra.end());
  return base;
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kNegation: return "negation";
    case Family::kTNorm: return "tnorm";
    case Family::kTConorm: return "tconorm";
    case Family::kAggregator: return "aggregator";
    case Family::kImplication: return "implication";
  }
  return "?";
}

std::string_view to_string(Property property) {
  switch (property) {
    case P::kCommutative: return "commutative";
    case P::kAssociative: return "associative";
    case P::kNeutral: return "neutral";
    case P::kMonotone: return "monotone";
    case P::kIdempotent: return "idempotent";
    case P::kContinuous: return "continuous";
    case P::kLeftContinuous: return "left-continuous";
    case P::kRightContinuous: return "right-continuous";
    case P::kStrict: return "strict";
    case P::kLeftNeutral: return "LN";
    case P::kExchange: return "EP";
    case P::kIdentity: return "IP";
    case P::kContrapositive: return "CP";
    case P::kLeftContrapositive: return "L-CP";
    case P::kRightContrapositive: return "R-CP";
    case P::kSinglePassing: return "single-passing";
    case P::kBoundary: return "boundary";
  }
  return "?";
}

bool OperatorDescriptor::declares(Property property) const {
  return std::find(declared.begin(), declared.end(), property) != declared.end();
}

std::string OperatorDescriptor::spec() const {
  std::string out = name;
  std::vector<std::string> parts;
  if (!params.base.empty()) parts.push_back("base=" + params.base);
  if (params.p) parts.push_back("p=" + format_number(*params.p));
  if (params.s) parts.push_back("s=" + format_number(*params.s));
  if (params.b0) parts.push_back("b0=" + format_number(*params.b0));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out += (i == 0 ? ":" : ",") + parts[i];
  }
  return out;
}

double negation(double a) {
  check_unit(a, "negation");
  return 1.0 - a;
}

// ---------------------------------------------------------------------------
// Binary kernels

enum class BinaryOperator::Kind {
  kTGodel,
  kTProduct,
  kTLukasiewicz,
  kTDrastic,
  kTNilpotent,
  kTYager,
  kSGodel,
  kSProduct,
  kSLukasiewicz,
  kSDrastic,
  kSNilpotent,
  kSYager,
  kIKleeneDienes,
  kIReichenbach,
  kILukasiewicz,
  kIDuboisPrade,
  kIFodor,
  kIGodel,
  kIGoguen,
  kIWeber,
  kIYagerS,
  kIYagerR,
  kISigmoidal,
};

BinaryOperator BinaryOperator::tnorm(std::string_view name, const OperatorParams& params) {
  BinaryOperator op;
  auto& d = op.descriptor_;
  d.family = Family::kTNorm;
  d.name = std::string(name);
  if (name == "godel") {
    op.kind_ = Kind::kTGodel;
    d.nondifferentiable_locus = "a = b";
    d.declared = with(kTNormLaws, {P::kIdempotent, P::kContinuous});
  } else if (name == "product") {
    op.kind_ = Kind::kTProduct;
    d.nondifferentiable_locus = "none";
    d.declared = with(kTNormLaws, {P::kStrict, P::kContinuous});
  } else if (name == "lukasiewicz") {
    op.kind_ = Kind::kTLukasiewicz;
    d.nondifferentiable_locus = "a + b = 1";
    d.declared = with(kTNormLaws, {P::kContinuous});
  } else if (name == "drastic") {
    op.kind_ = Kind::kTDrastic;
    d.nondifferentiable_locus = "a = 1 or b = 1";
    d.declared = kTNormLaws;
  } else if (name == "nilpotent") {
    op.kind_ = Kind::kTNilpotent;
    d.nondifferentiable_locus = "a + b = 1 or a = b";
    d.declared = with(kTNormLaws, {P::kLeftContinuous});
  } else if (name == "yager") {
    op.kind_ = Kind::kTYager;
    op.p_ = require_p(params, "yager t-norm", 1.0, true);
    d.params.p = op.p_;
    d.nondifferentiable_locus = "(1-a)^p + (1-b)^p = 1";
    d.declared = with(kTNormLaws, {P::kContinuous});
    return op;
  } else {
    throw SemanticError("unknown t-norm '" + std::string(name) + "'");
  }
  forbid_params(params, name);
  return op;
}

BinaryOperator BinaryOperator::tconorm(std::string_view name, const OperatorParams& params) {
  BinaryOperator op;
  try {
    op = tnorm(name, params);
  } catch (const SemanticError& e) {
    if (std::string_view(e.what()).starts_with("unknown")) {
      throw SemanticError("unknown t-conorm '" + std::string(name) + "'");
    }
    throw;
  }
  auto& d = op.descriptor_;
  d.family = Family::kTConorm;
  switch (op.kind_) {
    case Kind::kTGodel: op.kind_ = Kind::kSGodel; break;
    case Kind::kTProduct: op.kind_ = Kind::kSProduct; break;
    case Kind::kTLukasiewicz: op.kind_ = Kind::kSLukasiewicz; break;
    case Kind::kTDrastic:
      op.kind_ = Kind::kSDrastic;
      d.nondifferentiable_locus = "a = 0 or b = 0";
      break;
    case Kind::kTNilpotent:
      op.kind_ = Kind::kSNilpotent;
      d.declared = with(kTNormLaws, {P::kRightContinuous});
      break;
    case Kind::kTYager:
      op.kind_ = Kind::kSYager;
      d.nondifferentiable_locus = "a^p + b^p = 1";
      break;
    default: break;
  }
  return op;
}

BinaryOperator BinaryOperator::implication(std::string_view name, const OperatorParams& params) {
  BinaryOperator op;
  auto& d = op.descriptor_;
  d.family = Family::kImplication;
  d.name = std::string(name);
  const std::vector<Property> r_laws = {P::kLeftNeutral, P::kExchange, P::kIdentity};
  const std::vector<Property> all_laws = with(kSImplicationLaws, {P::kIdentity});
  if (name == "kleene_dienes") {
    op.kind_ = Kind::kIKleeneDienes;
    d.nondifferentiable_locus = "1 - a = c";
    d.declared = kSImplicationLaws;
  } else if (name == "reichenbach") {
    op.kind_ = Kind::kIReichenbach;
    d.nondifferentiable_locus = "none";
    d.declared = kSImplicationLaws;
  } else if (name == "lukasiewicz") {
    op.kind_ = Kind::kILukasiewicz;
    d.nondifferentiable_locus = "a = c";
    d.declared = all_laws;
  } else if (name == "dubois_prade") {
    op.kind_ = Kind::kIDuboisPrade;
    d.nondifferentiable_locus = "a = 1 or c = 0";
    d.declared = all_laws;
  } else if (name == "fodor") {
    op.kind_ = Kind::kIFodor;
    d.nondifferentiable_locus = "a = c or 1 - a = c";
    d.declared = all_laws;
  } else if (name == "godel") {
    op.kind_ = Kind::kIGodel;
    d.nondifferentiable_locus = "a = c";
    d.declared = r_laws;
  } else if (name == "goguen") {
    op.kind_ = Kind::kIGoguen;
    d.nondifferentiable_locus = "a = c; singular at (0, 0)";
    d.declared = r_laws;
  } else if (name == "weber") {
    op.kind_ = Kind::kIWeber;
    d.nondifferentiable_locus = "a = 1";
    d.declared = r_laws;
  } else if (name == "yager_s") {
    op.kind_ = Kind::kIYagerS;
    op.p_ = require_p(params, "yager_s implication", 1.0, true);
    d.params.p = op.p_;
    d.nondifferentiable_locus = "(1-a)^p + c^p = 1";
    d.declared = with(op.p_ == 1.0 ? all_laws : kSImplicationLaws, {P::kMonotone, P::kBoundary});
    return op;
  } else if (name == "yager_r") {
    op.kind_ = Kind::kIYagerR;
    op.p_ = require_p(params, "yager_r implication", 1.0, true);
    d.params.p = op.p_;
    d.nondifferentiable_locus = "a = c (singular for p > 1)";
    d.declared = with(op.p_ == 1.0 ? all_laws : r_laws, {P::kMonotone, P::kBoundary});
    return op;
  } else if (name == "sigmoidal") {
    if (params.base.empty()) throw SemanticError("sigmoidal implication requires base=");
    if (params.base == "sigmoidal") throw SemanticError("sigmoidal base cannot be sigmoidal");
    if (!params.s) throw SemanticError("sigmoidal implication requires s=");
    if (!(std::isfinite(*params.s) && *params.s > 0.0)) {
      throw SemanticError("sigmoidal implication: s must be > 0, got " + format_number(*params.s));
    }
    if (params.p && params.base != "yager_s" && params.base != "yager_r") {
      throw SemanticError("sigmoidal implication: p is only valid for a Yager base");
    }
    OperatorParams base_params;
    base_params.p = params.p;
    op.base_ = std::make_shared<const BinaryOperator>(implication(params.base, base_params));
    op.kind_ = Kind::kISigmoidal;
    op.s_ = *params.s;
    op.b0_ = params.b0.value_or(-0.5);
    if (!std::isfinite(op.b0_)) throw SemanticError("sigmoidal implication: b0 must be finite");
    d.params = params;
    d.params.b0 = op.b0_;
    d.nondifferentiable_locus = op.base_->descriptor().nondifferentiable_locus;
    const auto& inherited = op.base_->descriptor();
    // The transform is strictly increasing and fixes 0 and 1, so symmetry and
    // identity properties of the base carry over; left-neutrality does not.
    for (Property prop : {P::kIdentity, P::kContrapositive, P::kLeftContrapositive,
                          P::kRightContrapositive}) {
      if (inherited.declares(prop)) d.declared.push_back(prop);
    }
    d.declared.push_back(P::kMonotone);
    d.declared.push_back(P::kBoundary);
    return op;
  } else {
    throw SemanticError("unknown implication '" + std::string(name) + "'");
  }
  d.declared.push_back(P::kMonotone);
  d.declared.push_back(P::kBoundary);
  forbid_params(params, name);
  return op;
}

BinaryOperator BinaryOperator::make(Family family, std::string_view name,
                                    const OperatorParams& params) {
  switch (family) {
    case Family::kTNorm: return tnorm(name, params);
    case Family::kTConorm: return tconorm(name, params);
    case Family::kImplication: return implication(name, params);
    default: throw SemanticError(std::string(to_string(family)) + " is not a binary family");
  }
}

BinaryOperator sigmoidal_implication(std::string_view base, double s, double b0) {
  OperatorParams params;
  params.base = std::string(base);
  params.s = s;
  params.b0 = b0;
  return BinaryOperator::implication("sigmoidal", params);
}

double sigmoidal_transform(double i, double s, double b0) {
  if (i == 0.0) return 0.0;
  if (i == 1.0) return 1.0;
  const double scale = (1.0 + std::exp(-s * (1.0 + b0))) / (std::exp(-b0 * s) - std::exp(-s * (1.0 + b0)));
  const double shift = 1.0 + std::exp(-b0 * s);
  return scale * (shift * sigmoid(s * (i + b0)) - 1.0);
}

double sigmoidal_half_offset(double i, double s) {
  if (i == 0.0) return 0.0;
  if (i == 1.0) return 1.0;
  const double e = std::exp(0.5 * s);
  return ((1.0 + e) * sigmoid(s * (i - 0.5)) - 1.0) / (e - 1.0);
}

namespace {

// Yager-style p-norm pieces, sharing the (1, 0) convention at the origin.
BinaryEval yager_norm_tail(double u, double v, double p) {
  // value r = (u^p + v^p)^(1/p) with partials dr/du, dr/dv, capped at 1.
  const double sum = std::pow(u, p) + std::pow(v, p);
  if (sum >= 1.0) return {1.0, 0.0, 0.0};
  if (sum == 0.0) return {0.0, 1.0, p == 1.0 ? 1.0 : 0.0};
  const double outer = std::pow(sum, 1.0 / p - 1.0);
  return {std::pow(sum, 1.0 / p), outer * std::pow(u, p - 1.0), outer * std::pow(v, p - 1.0)};
}

}  // namespace

BinaryEval BinaryOperator::operator()(double a, double b) const {
  check_unit(a, descriptor_.name);
  check_unit(b, descriptor_.name);
  BinaryEval r = eval(a, b);
  // Pin neutrality exactly; the arithmetic forms can be off by an ulp.
  if (descriptor_.family == Family::kTNorm) {
    if (b == 1.0) r.value = a;
    else if (a == 1.0) r.value = b;
  } else if (descriptor_.family == Family::kTConorm) {
    if (b == 0.0) r.value = a;
    else if (a == 0.0) r.value = b;
  }
  return r;
}

BinaryEval BinaryOperator::eval(double a, double b) const {
  switch (kind_) {
    case Kind::kTGodel:
      return a <= b ? BinaryEval{a, 1.0, 0.0} : BinaryEval{b, 0.0, 1.0};
    case Kind::kTProduct:
      return {a * b, b, a};
    case Kind::kTLukasiewicz:
      return a + b > 1.0 ? BinaryEval{a + b - 1.0, 1.0, 1.0} : BinaryEval{0.0, 0.0, 0.0};
    case Kind::kTDrastic:
      if (b == 1.0) return {a, 1.0, 0.0};
      if (a == 1.0) return {b, 0.0, 1.0};
      return {0.0, 0.0, 0.0};
    case Kind::kTNilpotent:
      if (a + b <= 1.0) return {0.0, 0.0, 0.0};
      return a <= b ? BinaryEval{a, 1.0, 0.0} : BinaryEval{b, 0.0, 1.0};
    case Kind::kTYager: {
      const BinaryEval r = yager_norm_tail(1.0 - a, 1.0 - b, p_);
      return {1.0 - r.value, r.d_first, r.d_second};
    }
    case Kind::kSGodel:
      return a >= b ? BinaryEval{a, 1.0, 0.0} : BinaryEval{b, 0.0, 1.0};
    case Kind::kSProduct:
      return {a + b - a * b, 1.0 - b, 1.0 - a};
    case Kind::kSLukasiewicz:
      return a + b < 1.0 ? BinaryEval{a + b, 1.0, 1.0} : BinaryEval{1.0, 0.0, 0.0};
    case Kind::kSDrastic:
      if (b == 0.0) return {a, 1.0, 0.0};
      if (a == 0.0) return {b, 0.0, 1.0};
      return {1.0, 0.0, 0.0};
    case Kind::kSNilpotent:
      if (a + b >= 1.0) return {1.0, 0.0, 0.0};
      return a >= b ? BinaryEval{a, 1.0, 0.0} : BinaryEval{b, 0.0, 1.0};
    case Kind::kSYager:
      return yager_norm_tail(a, b, p_);

    // Implications: arguments are (a, c); partials are d/da and d/dc.
    case Kind::kIKleeneDienes:
      return 1.0 - a >= b ? BinaryEval{1.0 - a, -1.0, 0.0} : BinaryEval{b, 0.0, 1.0};
    case Kind::kIReichenbach:
      return {1.0 - a + a * b, b - 1.0, a};
    case Kind::kILukasiewicz:
      return a > b ? BinaryEval{1.0 - a + b, -1.0, 1.0} : BinaryEval{1.0, 0.0, 0.0};
    case Kind::kIDuboisPrade:
      if (a == 1.0) return {b, 0.0, 1.0};
      if (b == 0.0) return {1.0 - a, -1.0, 0.0};
      return {1.0, 0.0, 0.0};
    case Kind::kIFodor:
      if (a <= b) return {1.0, 0.0, 0.0};
      return 1.0 - a >= b ? BinaryEval{1.0 - a, -1.0, 0.0} : BinaryEval{b, 0.0, 1.0};
    case Kind::kIGodel:
      return a <= b ? BinaryEval{1.0, 0.0, 0.0} : BinaryEval{b, 0.0, 1.0};
    case Kind::kIGoguen:
      if (a <= b) return {1.0, 0.0, 0.0};
      return {b / a, -b / (a * a), 1.0 / a};
    case Kind::kIWeber:
      return a < 1.0 ? BinaryEval{1.0, 0.0, 0.0} : BinaryEval{b, 0.0, 1.0};
    case Kind::kIYagerS: {
      // S_Y(1 - a, c); the chain through N_C flips the first partial.
      const BinaryEval r = yager_norm_tail(1.0 - a, b, p_);
      return {r.value, -r.d_first, r.d_second};
    }
    case Kind::kIYagerR: {
      if (a <= b) return {1.0, 0.0, 0.0};
      const double nc = std::pow(1.0 - b, p_);
      const double na = std::pow(1.0 - a, p_);
      const double diff = nc - na;
      const double outer = std::pow(diff, 1.0 / p_ - 1.0);
      return {1.0 - std::pow(diff, 1.0 / p_), -outer * std::pow(1.0 - a, p_ - 1.0),
              outer * std::pow(1.0 - b, p_ - 1.0)};
    }
    case Kind::kISigmoidal: {
      const BinaryEval base = base_->eval(a, b);
      const double i = base.value;
      const double value =
          b0_ == -0.5 ? sigmoidal_half_offset(i, s_) : sigmoidal_transform(i, s_, b0_);
      const double scale =
          (1.0 + std::exp(-s_ * (1.0 + b0_))) / (std::exp(-b0_ * s_) - std::exp(-s_ * (1.0 + b0_)));
      const double shift = 1.0 + std::exp(-b0_ * s_);
      const double sig = sigmoid(s_ * (i + b0_));
      const double slope = scale * shift * s_ * sig * (1.0 - sig);
      return {value, slope * base.d_first, slope * base.d_second};
    }
  }
  return {0.0, 0.0, 0.0};
}

double BinaryOperator::locus_distance(double a, double b) const {
  switch (kind_) {
    case Kind::kTGodel:
    case Kind::kSGodel:
      return std::abs(a - b);
    case Kind::kTProduct:
    case Kind::kSProduct:
    case Kind::kIReichenbach:
      return kInf;
    case Kind::kTLukasiewicz:
    case Kind::kSLukasiewicz:
      return std::abs(a + b - 1.0);
    case Kind::kTDrastic:
      return std::min(1.0 - a, 1.0 - b);
    case Kind::kSDrastic:
      return std::min(a, b);
    case Kind::kTNilpotent:
    case Kind::kSNilpotent:
      return std::min(std::abs(a + b - 1.0), std::abs(a - b));
    case Kind::kTYager:
      return std::abs(std::pow(1.0 - a, p_) + std::pow(1.0 - b, p_) - 1.0);
    case Kind::kSYager:
      return std::abs(std::pow(a, p_) + std::pow(b, p_) - 1.0);
    case Kind::kIKleeneDienes:
      return std::abs(1.0 - a - b);
    case Kind::kILukasiewicz:
    case Kind::kIGodel:
    case Kind::kIYagerR:
      return std::abs(a - b);
    case Kind::kIDuboisPrade:
      return std::min(1.0 - a, b);
    case Kind::kIFodor:
      return std::min(std::abs(a - b), std::abs(1.0 - a - b));
    case Kind::kIGoguen:
      return std::min(std::abs(a - b), std::hypot(a, b));
    case Kind::kIWeber:
      return 1.0 - a;
    case Kind::kIYagerS:
      return std::abs(std::pow(1.0 - a, p_) + std::pow(b, p_) - 1.0);
    case Kind::kISigmoidal:
      return base_->locus_distance(a, b);
  }
  return kInf;
}

double consequent_derivative(const BinaryOperator& implication, double a, double c) {
  return implication(a, c).d_second;
}

double negated_antecedent_derivative(const BinaryOperator& implication, double a, double c) {
  return -implication(a, c).d_first;
}

// ---------------------------------------------------------------------------
// Aggregators

Aggregator Aggregator::make(std::string_view name, const OperatorParams& params) {
  Aggregator agg;
  auto& d = agg.descriptor_;
  d.family = Family::kAggregator;
  d.name = std::string(name);
  d.declared = {P::kCommutative, P::kMonotone, P::kBoundary};
  bool parametric = false;
  if (name == "min") {
    agg.kind_ = Kind::kMin;
    d.nondifferentiable_locus = "ties for the minimum";
    d.declared.push_back(P::kIdempotent);
    d.declared.push_back(P::kSinglePassing);
  } else if (name == "max") {
    agg.kind_ = Kind::kMax;
    d.nondifferentiable_locus = "ties for the maximum";
    d.declared.push_back(P::kIdempotent);
    d.declared.push_back(P::kSinglePassing);
  } else if (name == "product") {
    agg.kind_ = Kind::kProduct;
    d.nondifferentiable_locus = "none";
  } else if (name == "log_product") {
    agg.kind_ = Kind::kLogProduct;
    d.nondifferentiable_locus = "singular at x_i = 0";
  } else if (name == "lukasiewicz") {
    agg.kind_ = Kind::kLukasiewicz;
    d.nondifferentiable_locus = "sum x_i = n - 1";
  } else if (name == "bounded_sum") {
    agg.kind_ = Kind::kBoundedSum;
    d.nondifferentiable_locus = "sum x_i = 1";
  } else if (name == "prob_sum") {
    agg.kind_ = Kind::kProbSum;
    d.nondifferentiable_locus = "none";
  } else if (name == "nilpotent") {
    agg.kind_ = Kind::kNilpotent;
    d.nondifferentiable_locus = "two lowest inputs sum to 1, or tie for the minimum";
  } else if (name == "yager") {
    agg.kind_ = Kind::kYager;
    agg.p_ = require_p(params, "yager aggregator", 1.0, true);
    d.nondifferentiable_locus = "sum (1 - x_i)^p = 1";
    parametric = true;
  } else if (name == "pme" || name == "mae" || name == "rmse") {
    agg.kind_ = Kind::kMeanError;
    if (name == "pme") {
      agg.p_ = require_p(params, "pme aggregator", 0.0, false);
      parametric = true;
    } else {
      agg.p_ = name == "mae" ? 1.0 : 2.0;
    }
    d.nondifferentiable_locus = agg.p_ < 1.0 ? "singular at x_i = 1" : "all x_i = 1";
    d.declared.push_back(P::kIdempotent);
  } else if (name == "pmean") {
    agg.kind_ = Kind::kMean;
    agg.p_ = require_p(params, "pmean aggregator", 0.0, false);
    d.nondifferentiable_locus = agg.p_ < 1.0 ? "singular at x_i = 0" : "all x_i = 0";
    d.declared.push_back(P::kIdempotent);
    parametric = true;
  } else {
    throw SemanticError("unknown aggregator '" + std::string(name) + "'");
  }
  if (parametric) {
    OperatorParams rest = params;
    rest.p.reset();
    forbid_params(rest, name);
    d.params.p = agg.p_;
  } else {
    forbid_params(params, name);
  }
  return agg;
}

double Aggregator::value(std::span<const double> xs) const { return (*this)(xs).value; }

AggregateEval Aggregator::operator()(std::span<const double> xs) const {
  if (xs.empty()) throw NumericError(descriptor_.name + ": empty input");
  for (double x : xs) check_unit(x, descriptor_.name);
  const std::size_t n = xs.size();
  const double nd = static_cast<double>(n);
  AggregateEval out{0.0, std::vector<double>(n, 0.0)};
  switch (kind_) {
    case Kind::kMin: {
      const auto it = std::min_element(xs.begin(), xs.end());
      out.value = *it;
      out.partials[static_cast<std::size_t>(it - xs.begin())] = 1.0;
      break;
    }
    case Kind::kMax: {
      const auto it = std::max_element(xs.begin(), xs.end());
      out.value = *it;
      out.partials[static_cast<std::size_t>(it - xs.begin())] = 1.0;
      break;
    }
    case Kind::kProduct:
    case Kind::kProbSum: {
      // Prefix/suffix products give exact leave-one-out products even with zeros.
      const bool sum = kind_ == Kind::kProbSum;
      std::vector<double> suffix(n + 1, 1.0);
      for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] * (sum ? 1.0 - xs[i] : xs[i]);
      double prefix = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        out.partials[i] = prefix * suffix[i + 1];
        prefix *= sum ? 1.0 - xs[i] : xs[i];
      }
      out.value = sum ? 1.0 - suffix[0] : suffix[0];
      break;
    }
    case Kind::kLogProduct: {
      for (std::size_t i = 0; i < n; ++i) {
        if (xs[i] == 0.0) throw NumericError("log_product: input " + std::to_string(i) + " is 0");
        out.value += std::log(xs[i]);
        out.partials[i] = 1.0 / xs[i];
      }
      break;
    }
    case Kind::kLukasiewicz: {
      const double total = std::accumulate(xs.begin(), xs.end(), 0.0);
      if (total > nd - 1.0) {
        out.value = total - (nd - 1.0);
        std::fill(out.partials.begin(), out.partials.end(), 1.0);
      }
      break;
    }
    case Kind::kBoundedSum: {
      const double total = std::accumulate(xs.begin(), xs.end(), 0.0);
      if (total < 1.0) {
        out.value = total;
        std::fill(out.partials.begin(), out.partials.end(), 1.0);
      } else {
        out.value = 1.0;
      }
      break;
    }
    case Kind::kYager: {
      double total = 0.0;
      for (double x : xs) total += std::pow(1.0 - x, p_);
      if (total >= 1.0) break;
      if (total == 0.0) {
        out.value = 1.0;
        if (p_ == 1.0) {
          std::fill(out.partials.begin(), out.partials.end(), 1.0);
        } else {
          out.partials[0] = 1.0;
        }
        break;
      }
      out.value = 1.0 - std::pow(total, 1.0 / p_);
      const double outer = std::pow(total, 1.0 / p_ - 1.0);
      for (std::size_t i = 0; i < n; ++i) out.partials[i] = outer * std::pow(1.0 - xs[i], p_ - 1.0);
      break;
    }
    case Kind::kNilpotent: {
      if (n == 1) {
        out.value = xs[0];
        out.partials[0] = 1.0;
        break;
      }
      // The recursive extension of T_nM is min(xs) when the two smallest
      // inputs sum to more than 1, and 0 otherwise.
      std::size_t lo = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (xs[i] < xs[lo]) lo = i;
      }
      double second = kInf;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != lo) second = std::min(second, xs[i]);
      }
      if (xs[lo] + second > 1.0) {
        out.value = xs[lo];
        out.partials[lo] = 1.0;
      }
      break;
    }
    case Kind::kMeanError: {
      double total = 0.0;
      for (double x : xs) total += std::pow(1.0 - x, p_);
      const double mean = total / nd;
      out.value = 1.0 - std::pow(mean, 1.0 / p_);
      if (total == 0.0) {
        const double g = p_ == 1.0 ? 1.0 / nd : std::pow(1.0 / nd, 1.0 / p_);
        std::fill(out.partials.begin(), out.partials.end(), p_ <= 1.0 ? 1.0 / nd : g);
        break;
      }
      const double outer = std::pow(1.0 / nd, 1.0 / p_) * std::pow(total, 1.0 / p_ - 1.0);
      for (std::size_t i = 0; i < n; ++i) out.partials[i] = outer * std::pow(1.0 - xs[i], p_ - 1.0);
      break;
    }
    case Kind::kMean: {
      double total = 0.0;
      for (double x : xs) total += std::pow(x, p_);
      const double mean = total / nd;
      out.value = std::pow(mean, 1.0 / p_);
      if (total == 0.0) {
        std::fill(out.partials.begin(), out.partials.end(),
                  p_ <= 1.0 ? 1.0 / nd : std::pow(1.0 / nd, 1.0 / p_));
        break;
      }
      const double outer = std::pow(1.0 / nd, 1.0 / p_) * std::pow(total, 1.0 / p_ - 1.0);
      for (std::size_t i = 0; i < n; ++i) out.partials[i] = outer * std::pow(xs[i], p_ - 1.0);
      break;
    }
  }
  return out;
}

double Aggregator::locus_distance(std::span<const double> xs) const {
  if (xs.empty()) return kInf;
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double nd = static_cast<double>(xs.size());
  const double total = std::accumulate(xs.begin(), xs.end(), 0.0);
  const double gap_low = sorted.size() > 1 ? sorted[1] - sorted[0] : kInf;
  const double gap_high = sorted.size() > 1 ? sorted.back() - sorted[sorted.size() - 2] : kInf;
  switch (kind_) {
    case Kind::kMin: return gap_low;
    case Kind::kMax: return gap_high;
    case Kind::kProduct:
    case Kind::kProbSum: return kInf;
    case Kind::kLogProduct: return sorted[0];
    case Kind::kLukasiewicz: return std::abs(total - (nd - 1.0));
    case Kind::kBoundedSum: return std::abs(total - 1.0);
    case Kind::kYager: {
      double t = 0.0;
      for (double x : xs) t += std::pow(1.0 - x, p_);
      return std::abs(t - 1.0);
    }
    case Kind::kNilpotent:
      if (sorted.size() < 2) return kInf;
      return std::min(std::abs(sorted[0] + sorted[1] - 1.0), gap_low);
    case Kind::kMeanError:
      // Singular where an input hits 1 (p < 1) or at the all-ones corner.
      return p_ < 1.0 ? 1.0 - sorted.back() : 1.0 - sorted[0];
    case Kind::kMean:
      return p_ < 1.0 ? sorted[0] : sorted.back();
  }
  return kInf;
}

// ---------------------------------------------------------------------------
// Config grammar

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view key, std::string_view text) {
  const std::string buf(trim(text));
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v)) {
    throw InputError("parameter " + std::string(key) + ": '" + buf + "' is not a number");
  }
  return v;
}

}  // namespace

OperatorSpec parse_operator_spec(Family family, std::string_view text) {
  text = trim(text);
  OperatorSpec spec;
  const auto colon = text.find(':');
  spec.name = std::string(trim(text.substr(0, colon)));
  if (spec.name.empty()) throw InputError("empty operator name in '" + std::string(text) + "'");
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw InputError("expected key=value, got '" + std::string(item) + "'");
      }
      const std::string_view key = trim(item.substr(0, eq));
      const std::string_view val = trim(item.substr(eq + 1));
      if (key == "p") {
        spec.params.p = parse_number(key, val);
      } else if (key == "s") {
        spec.params.s = parse_number(key, val);
      } else if (key == "b0") {
        spec.params.b0 = parse_number(key, val);
      } else if (key == "base") {
        spec.params.base = std::string(val);
      } else {
        throw SemanticError("unknown operator parameter '" + std::string(key) + "'");
      }
    }
  }
  // Constructing the operator validates name and parameter set.
  if (family == Family::kAggregator) {
    Aggregator::make(spec.name, spec.params);
  } else {
    BinaryOperator::make(family, spec.name, spec.params);
  }
  return spec;
}

void OperatorConfig::apply(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw InputError("expected key=operator, got '" + std::string(assignment) + "'");
  }
  const std::string_view key = trim(assignment.substr(0, eq));
  const std::string_view value = assignment.substr(eq + 1);
  if (key == "tnorm") {
    const auto s = parse_operator_spec(Family::kTNorm, value);
    tnorm = BinaryOperator::tnorm(s.name, s.params);
  } else if (key == "tconorm") {
    const auto s = parse_operator_spec(Family::kTConorm, value);
    tconorm = BinaryOperator::tconorm(s.name, s.params);
  } else if (key == "implication") {
    const auto s = parse_operator_spec(Family::kImplication, value);
    implication = BinaryOperator::implication(s.name, s.params);
  } else if (key == "aggregator") {
    const auto s = parse_operator_spec(Family::kAggregator, value);
    aggregator = Aggregator::make(s.name, s.params);
  } else {
    throw SemanticError("unknown operator key '" + std::string(key) + "'");
  }
}

OperatorConfig OperatorConfig::parse(std::span<const std::string> assignments) {
  OperatorConfig config;
  for (const auto& a : assignments) config.apply(a);
  return config;
}

OperatorConfig OperatorConfig::symmetric(std::string_view tnorm_name, const OperatorParams& params) {
  static constexpr std::pair<std::string_view, std::string_view> kImplication[] = {
      {"godel", "kleene_dienes"}, {"product", "reichenbach"}, {"lukasiewicz", "lukasiewicz"},
      {"drastic", "dubois_prade"}, {"nilpotent", "fodor"},     {"yager", "yager_s"}};
  static constexpr std::pair<std::string_view, std::string_view> kAggregator[] = {
      {"godel", "min"},         {"product", "product"}, {"lukasiewicz", "lukasiewicz"},
      {"nilpotent", "nilpotent"}, {"yager", "yager"}};
  OperatorConfig config;
  config.tnorm = BinaryOperator::tnorm(tnorm_name, params);
  config.tconorm = BinaryOperator::tconorm(tnorm_name, params);
  for (const auto& [t, i] : kImplication) {
    if (t == tnorm_name) config.implication = BinaryOperator::implication(i, params);
  }
  bool found = false;
  for (const auto& [t, a] : kAggregator) {
    if (t == tnorm_name) {
      config.aggregator = Aggregator::make(a, params);
      found = true;
    }
  }
  if (!found) {
    throw SemanticError("no aggregator extends the '" + std::string(tnorm_name) + "' t-norm");
  }
  return config;
}

OperatorConfig OperatorConfig::product_logic() {
  OperatorConfig config;
  config.aggregator = Aggregator::make("log_product");
  return config;
}

std::string OperatorConfig::describe() const {
  return "tnorm=" + tnorm.descriptor().spec() + " tconorm=" + tconorm.descriptor().spec() +
         " implication=" + implication.descriptor().spec() +
         " aggregator=" + aggregator.descriptor().spec();
}

// ---------------------------------------------------------------------------
// Catalog and audits

std::vector<OperatorDescriptor> catalog() {
  OperatorParams p2;
  p2.p = 2.0;
  std::vector<OperatorDescriptor> out;
  for (const char* name : {"godel", "product", "lukasiewicz", "drastic", "nilpotent"}) {
    out.push_back(BinaryOperator::tnorm(name).descriptor());
  }
  out.push_back(BinaryOperator::tnorm("yager", p2).descriptor());
  for (const char* name : {"godel", "product", "lukasiewicz", "drastic", "nilpotent"}) {
    out.push_back(BinaryOperator::tconorm(name).descriptor());
  }
  out.push_back(BinaryOperator::tconorm("yager", p2).descriptor());
  for (const char* name : {"min", "max", "product", "log_product", "lukasiewicz", "bounded_sum",
                           "prob_sum", "nilpotent", "mae", "rmse"}) {
    out.push_back(Aggregator::make(name).descriptor());
  }
  for (const char* name : {"yager", "pme", "pmean"}) {
    out.push_back(Aggregator::make(name, p2).descriptor());
  }
  for (const char* name : {"kleene_dienes", "reichenbach", "lukasiewicz", "dubois_prade", "fodor",
                           "godel", "goguen", "weber"}) {
    out.push_back(BinaryOperator::implication(name).descriptor());
  }
  out.push_back(BinaryOperator::implication("yager_s", p2).descriptor());
  out.push_back(BinaryOperator::implication("yager_r", p2).descriptor());
  out.push_back(sigmoidal_implication("reichenbach", 9.0, -0.5).descriptor());
  return out;
}

double tnorm_duality_check(std::string_view name, const OperatorParams& params,
                           std::size_t samples, std::uint64_t seed) {
  const BinaryOperator t = BinaryOperator::tnorm(name, params);
  const BinaryOperator s = BinaryOperator::tconorm(name, params);
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    if (t.locus_distance(1.0 - a, 1.0 - b) < 1e-9) continue;
    const BinaryEval sv = s(a, b);
    const BinaryEval tv = t(1.0 - a, 1.0 - b);
    worst = std::max(worst, std::abs(sv.value - (1.0 - tv.value)));
    worst = std::max(worst, std::abs(sv.d_first - tv.d_first));
    worst = std::max(worst, std::abs(sv.d_second - tv.d_second));
  }
  return worst;
}

namespace {

constexpr double kAuditTolerance = 1e-9;

struct Audit {
  PropertyCheck check;
  void observe(double violation, std::vector<double> args) {
    if (!(violation <= kAuditTolerance)) {  // NaN counts as a violation
      if (check.passed) check.witness = std::move(args);
      check.passed = false;
    }
    if (std::isnan(violation) || violation > check.discrepancy) check.discrepancy = violation;
  }
};

// Evaluation points: a boundary grid first, then uniform samples.
std::vector<double> grid_values() { return {0.0, 0.25, 0.5, 0.75, 1.0}; }

}  // namespace

std::vector<PropertyCheck> property_audit(const OperatorDescriptor& descriptor,
                                          std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> triples;
  for (double a : grid_values())
    for (double b : grid_values())
      for (double c : grid_values()) triples.push_back({a, b, c});
  for (std::size_t k = 0; k < samples; ++k) {
    triples.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
  }

  std::vector<Audit> audits;
  audits.reserve(32);  // references handed out below must stay valid
  auto audit = [&](Property prop) -> Audit& {
    for (auto& a : audits)
      if (a.check.property == prop) return a;
    audits.push_back(Audit{PropertyCheck{prop, descriptor.declares(prop), true, {}, 0.0}});
    return audits.back();
  };

  if (descriptor.family == Family::kAggregator) {
    const Aggregator agg = Aggregator::make(descriptor.name, descriptor.params);
    const bool log = agg.is_log_domain();
    auto& comm = audit(P::kCommutative);
    auto& mono = audit(P::kMonotone);
    auto& idem = audit(P::kIdempotent);
    auto& bound = audit(P::kBoundary);
    for (const auto& t : triples) {
      if (log && (t[0] == 0.0 || t[1] == 0.0 || t[2] == 0.0)) continue;
      const double v = agg.value(t);
      const std::vector<double> rotated = {t[2], t[0], t[1]};
      const std::vector<double> swapped = {t[1], t[0], t[2]};
      comm.observe(std::max(std::abs(v - agg.value(rotated)), std::abs(v - agg.value(swapped))), t);
      std::vector<double> raised = t;
      raised[0] = t[0] + (1.0 - t[0]) * 0.5;
      mono.observe(v - agg.value(raised), t);
      const std::vector<double> same = {t[0], t[0], t[0]};
      idem.observe(std::abs(agg.value(same) - t[0]), {t[0]});
    }
    const std::vector<double> ones = {1.0, 1.0, 1.0};
    bound.observe(std::abs(agg.value(ones) - (log ? 0.0 : 1.0)), ones);
    if (!log) {
      const std::vector<double> zeros = {0.0, 0.0, 0.0};
      bound.observe(std::abs(agg.value(zeros)), zeros);
    }
  } else if (descriptor.family == Family::kImplication) {
    const BinaryOperator imp = BinaryOperator::implication(descriptor.name, descriptor.params);
    auto& ln = audit(P::kLeftNeutral);
    auto& ep = audit(P::kExchange);
    auto& ip = audit(P::kIdentity);
    auto& cp = audit(P::kContrapositive);
    auto& lcp = audit(P::kLeftContrapositive);
    auto& rcp = audit(P::kRightContrapositive);
    auto& mono = audit(P::kMonotone);
    auto& bound = audit(P::kBoundary);
    for (const auto& t : triples) {
      const double a = t[0], b = t[1], c = t[2];
      const double i = imp.value(a, c);
      ln.observe(std::abs(imp.value(1.0, c) - c), {c});
      ep.observe(std::abs(imp.value(a, imp.value(b, c)) - imp.value(b, imp.value(a, c))), t);
      ip.observe(std::abs(imp.value(a, a) - 1.0), {a});
      cp.observe(std::abs(i - imp.value(1.0 - c, 1.0 - a)), {a, c});
      lcp.observe(std::abs(imp.value(1.0 - a, c) - imp.value(1.0 - c, a)), {a, c});
      rcp.observe(std::abs(imp.value(a, 1.0 - c) - imp.value(c, 1.0 - a)), {a, c});
      const double a_hi = a + (1.0 - a) * b;
      const double c_hi = c + (1.0 - c) * b;
      mono.observe(std::max(imp.value(a_hi, c) - i, i - imp.value(a, c_hi)), t);
    }
    bound.observe(std::abs(imp.value(0.0, 0.0) - 1.0), {0.0, 0.0});
    bound.observe(std::abs(imp.value(1.0, 1.0) - 1.0), {1.0, 1.0});
    bound.observe(std::abs(imp.value(0.0, 1.0) - 1.0), {0.0, 1.0});
    bound.observe(std::abs(imp.value(1.0, 0.0)), {1.0, 0.0});
  } else if (descriptor.family == Family::kTNorm || descriptor.family == Family::kTConorm) {
    const BinaryOperator op = BinaryOperator::make(descriptor.family, descriptor.name, descriptor.params);
    const double unit = descriptor.family == Family::kTNorm ? 1.0 : 0.0;
    auto& comm = audit(P::kCommutative);
    auto& assoc = audit(P::kAssociative);
    auto& neutral = audit(P::kNeutral);
    auto& mono = audit(P::kMonotone);
    auto& idem = audit(P::kIdempotent);
    auto& bound = audit(P::kBoundary);
    for (const auto& t : triples) {
      const double a = t[0], b = t[1], c = t[2];
      const double v = op.value(a, b);
      comm.observe(std::abs(v - op.value(b, a)), {a, b});
      assoc.observe(std::abs(op.value(op.value(a, b), c) - op.value(a, op.value(b, c))), t);
      neutral.observe(std::max(std::abs(op.value(a, unit) - a), std::abs(op.value(unit, a) - a)),
                      {a});
      mono.observe(v - op.value(a, b + (1.0 - b) * c), t);
      idem.observe(std::abs(op.value(a, a) - a), {a});
    }
    bound.observe(std::abs(op.value(1.0 - unit, 1.0 - unit) - (1.0 - unit)), {1 - unit, 1 - unit});
    bound.observe(std::abs(op.value(unit, unit) - unit), {unit, unit});
  }

  std::vector<PropertyCheck> out;
  out.reserve(audits.size());
  for (auto& a : audits) out.push_back(std::move(a.check));
  return out;
}

}  // namespace dfl
