// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fuzzy operator kernels. Every kernel returns its value together with the
// analytic partial derivatives with respect to each argument, so callers can
// record it on a Tape without differentiating numerically.
//
// Conventions at nondifferentiable points:
//   * min/max ties give the whole partial to the first argument;
//   * threshold kernels (Lukasiewicz, nilpotent, Yager, ...) use the partials
//     of the branch that produced the value;
//   * the point where a Yager-style norm is zero uses the limit along the
//     second argument's neutral edge, i.e. partials (1, 0).
// Singular partials (Goguen near a = 0, Yager R-implication as a -> c) are
// returned as computed, without clamping.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dfl {

enum class Family { kNegation, kTNorm, kTConorm, kAggregator, kImplication };

std::string_view to_string(Family family);

enum class Property {
  kCommutative,
  kAssociative,
  kNeutral,
  kMonotone,
  kIdempotent,
  kContinuous,
  kLeftContinuous,
  kRightContinuous,
  kStrict,
  kLeftNeutral,
  kExchange,
  kIdentity,
  kContrapositive,
  kLeftContrapositive,
  kRightContrapositive,
  kSinglePassing,
  kBoundary,  // boundary conditions of the family's definition
};

std::string_view to_string(Property property);

struct OperatorParams {
  std::optional<double> p;
  std::optional<double> s;
  std::optional<double> b0;
  std::string base;

  friend bool operator==(const OperatorParams&, const OperatorParams&) = default;
};

struct OperatorDescriptor {
  Family family = Family::kTNorm;
  std::string name;
  OperatorParams params;
  std::string nondifferentiable_locus;
  std::vector<Property> declared;

  bool declares(Property property) const;
  /// Canonical grammar form, e.g. `yager:p=2` or
  /// `sigmoidal:base=reichenbach,s=9,b0=-0.5`.
  std::string spec() const;
};

/// Value and partials of a two-argument kernel. For implications the
/// arguments are (antecedent, consequent) and `d_first` is d/da, not d/d(not a).
struct BinaryEval {
  double value;
  double d_first;
  double d_second;
};

struct AggregateEval {
  double value;
  std::vector<double> partials;
};

/// Classical negation N_C(a) = 1 - a; its derivative is -1 everywhere.
double negation(double a);

/// t-norm, t-conorm or implication kernel.
class BinaryOperator {
 public:
  /// godel, product, lukasiewicz, drastic, nilpotent, yager (p >= 1).
  static BinaryOperator tnorm(std::string_view name, const OperatorParams& params = {});
  /// Same names as `tnorm`; each is the N_C-dual of the t-norm of that name.
  static BinaryOperator tconorm(std::string_view name, const OperatorParams& params = {});
  /// kleene_dienes, reichenbach, lukasiewicz, dubois_prade, fodor, godel,
  /// goguen, weber, yager_s (p), yager_r (p), sigmoidal (base, s, b0).
  static BinaryOperator implication(std::string_view name, const OperatorParams& params = {});
  static BinaryOperator make(Family family, std::string_view name,
                             const OperatorParams& params = {});

  /// Throws NumericError when an argument is outside [0, 1].
  BinaryEval operator()(double a, double b) const;
  double value(double a, double b) const { return (*this)(a, b).value; }

  const OperatorDescriptor& descriptor() const { return descriptor_; }
  Family family() const { return descriptor_.family; }
  const std::string& name() const { return descriptor_.name; }

  /// Gap to the declared nondifferentiable (or singular) locus;
  /// +infinity for smooth kernels.
  double locus_distance(double a, double b) const;

 private:
  enum class Kind;
  BinaryOperator() = default;

  BinaryEval eval(double a, double b) const;

  Kind kind_{};
  double p_ = 1.0;
  double s_ = 1.0;
  double b0_ = -0.5;
  std::shared_ptr<const BinaryOperator> base_;
  OperatorDescriptor descriptor_;
};

/// d_Ic(a, c) = dI/dc.
double consequent_derivative(const BinaryOperator& implication, double a, double c);
/// d_I(not a)(a, c) = -dI/da.
double negated_antecedent_derivative(const BinaryOperator& implication, double a, double c);

/// The I-sigmoidal implication of `base` with spread `s` > 0 and offset `b0`.
BinaryOperator sigmoidal_implication(std::string_view base, double s, double b0 = -0.5);

/// The sigmoidal rescaling of a base truth value `i`, general offset form.
double sigmoidal_transform(double i, double s, double b0);
/// Closed form of the same transform for b0 = -1/2. Used as the fast path.
double sigmoidal_half_offset(double i, double s);

/// n-ary aggregation operator.
class Aggregator {
 public:
  /// min, max, product, log_product, lukasiewicz, bounded_sum, prob_sum,
  /// yager (p >= 1), nilpotent, pme (p > 0), pmean (p > 0), mae, rmse.
  static Aggregator make(std::string_view name, const OperatorParams& params = {});

  /// Throws on an empty input, on values outside [0, 1], and on an exact 0
  /// passed to log_product.
  AggregateEval operator()(std::span<const double> xs) const;
  double value(std::span<const double> xs) const;

  const OperatorDescriptor& descriptor() const { return descriptor_; }
  const std::string& name() const { return descriptor_.name; }
  /// log_product's codomain is (-inf, 0] rather than [0, 1].
  bool is_log_domain() const { return kind_ == Kind::kLogProduct; }

  double locus_distance(std::span<const double> xs) const;

 private:
  enum class Kind {
    kMin,
    kMax,
    kProduct,
    kLogProduct,
    kLukasiewicz,
    kBoundedSum,
    kProbSum,
    kYager,
    kNilpotent,
    kMeanError,
    kMean,
  };
  Aggregator() = default;

  Kind kind_ = Kind::kMin;
  double p_ = 1.0;
  OperatorDescriptor descriptor_;
};

/// Parses `name[:key=value,...]` into a name and parameters. Keys are
/// validated against the operator named.
struct OperatorSpec {
  std::string name;
  OperatorParams params;
};
OperatorSpec parse_operator_spec(Family family, std::string_view text);

/// The (T, S, I, A) selection used by the valuation engine. Negation is
/// always N_C.
struct OperatorConfig {
  BinaryOperator tnorm = BinaryOperator::tnorm("product");
  BinaryOperator tconorm = BinaryOperator::tconorm("product");
  BinaryOperator implication = BinaryOperator::implication("reichenbach");
  Aggregator aggregator = Aggregator::make("product");

  /// Applies one `key=spec` line, key in {tnorm, tconorm, implication,
  /// aggregator}. Unknown keys are SemanticErrors.
  void apply(std::string_view assignment);
  static OperatorConfig parse(std::span<const std::string> assignments);

  /// T, its dual S, the S-implication of S and the extended t-norm A_T.
  static OperatorConfig symmetric(std::string_view tnorm_name, const OperatorParams& params = {});
  /// T_P, S_P, I_RC, A_log T_P.
  static OperatorConfig product_logic();

  std::string describe() const;
};

/// Every catalog entry with its canonical parameters (Yager p = 2,
/// pme p = 2, pmean p = 2, sigmoidal Reichenbach s = 9, b0 = -1/2).
std::vector<OperatorDescriptor> catalog();

/// Maximum error of S(a,b) = 1 - T(1-a,1-b) and d_S(a,b) = d_T(1-a,1-b) over
/// uniform samples, skipping points within 1e-9 of T's nondifferentiable locus.
double tnorm_duality_check(std::string_view name, const OperatorParams& params,
                           std::size_t samples, std::uint64_t seed = 1);

struct PropertyCheck {
  Property property;
  bool declared;
  bool passed;
  std::vector<double> witness;  // arguments of the first counterexample
  double discrepancy;           // largest violation seen
};

/// Tests every property that applies to the descriptor's family on uniform
/// random samples plus a boundary grid. Violations above 1e-9 fail.
std::vector<PropertyCheck> property_audit(const OperatorDescriptor& descriptor,
                                          std::size_t samples, std::uint64_t seed = 1);

}  // namespace dfl
