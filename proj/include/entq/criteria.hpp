#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "entq/moments.hpp"
#include "entq/operators.hpp"

namespace entq {

/// An operator role in a criterion: a real linear combination of moment
/// components (J_x, J_y, J_z, or the six bipartite components) together with
/// the spectral interval of the resulting operator.
struct Observable {
  Eigen::VectorXd coeffs;
  SpectralBounds bounds;

  Observable scaled(double factor) const { return {factor * coeffs, bounds.scaled(factor)}; }
  static Observable zero(Index components) { return {Eigen::VectorXd::Zero(components), {0.0, 0.0, true}}; }
  static Observable unit(Index components, Index which, SpectralBounds b) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(components);
    c(which) = 1.0;
    return {c, b};
  }
};

/// A number that enters a criterion in place of a variance (the N in xi^2).
struct ConstantVariance {
  double value = 0.0;
};

using VarianceRole = std::variant<Observable, ConstantVariance>;

/// How per-term variance caps v_k are derived from spectral bounds.
enum class VarianceCap {
  Sharp,       ///< ((lambda_max - lambda_min)/2)^2, valid for any spectrum
  MaxSquared,  ///< max |lambda|^2
};

/// S = sum_k Var(O_k) + sum constants - <B> >= 0 on separable states.
struct SumCriterion {
  std::vector<Observable> variance_terms;
  Observable offset;
  std::vector<double> constant_variances;

  /// Checks coefficient sizes, finite bounds and nonnegative constants.
  void validate(Index components) const;
};

/// U^2 = Var(O1) Var(O2) / <B>^2 >= 1 on separable states.
struct ProductCriterion {
  VarianceRole o1;
  VarianceRole o2;
  Observable b;

  void validate(Index components) const;
};

/// Shifts s_k (one per observable variance term) and, for product criteria,
/// the tangent parameter t.
struct WitnessParams {
  std::vector<double> s;
  std::optional<double> t;
};

struct SpectralConstants {
  double n = 0.0;
  double m = 0.0;
  std::optional<double> m_t;
};

double sum_value(const SumCriterion& c, const FlatMoments& m);

struct ProductTerms {
  double var1 = 0.0;
  double var2 = 0.0;
  double mean_b = 0.0;
};
ProductTerms product_terms(const ProductCriterion& c, const FlatMoments& m);

/// U^2. Throws DegenerateCriterion when <B> = 0.
double product_value(const ProductCriterion& c, const FlatMoments& m);

/// The t-tangent of a product criterion written as a sum criterion:
/// O2 -> 2t O2, B -> 4|t| B, constant roles scaled to match.
SumCriterion tangent_criterion(const ProductCriterion& c, double t);

/// Same criterion with B replaced by -B (valid since U^2 only sees <B>^2).
ProductCriterion with_flipped_offset(ProductCriterion c);

/// s_k = <O_k> clamped to the spectral interval of O_k. When <O_k> is
/// unmeasured the bound does not depend on it and s_k is the spectral center.
WitnessParams optimal_shifts(const SumCriterion& c, const FlatMoments& m);
WitnessParams optimal_shifts(const ProductCriterion& c, const FlatMoments& m, double t);

/// <W(s)> computed from moments: sum_k [Var(O_k) + (<O_k> - s_k)^2] + constants - <B>.
double witness_expectation(const SumCriterion& c, const FlatMoments& m, std::span<const double> s);

SpectralConstants constants(const SumCriterion& c, VarianceCap cap = VarianceCap::Sharp);
SpectralConstants constants(const ProductCriterion& c, std::optional<double> t = std::nullopt,
                            VarianceCap cap = VarianceCap::Sharp);

/// Explicit matrices of the moment components in one representation, e.g.
/// the Dicke basis or the full qubit tensor space.
using ComponentOperators = std::vector<HermitianOperator>;

HermitianOperator materialize(const Observable& o, const ComponentOperators& ops);

/// W(s) = sum_k (O_k - s_k)^2 + (sum constants) 1 - B
HermitianOperator witness_sum(const SumCriterion& c, const WitnessParams& p, const ComponentOperators& ops);
/// W(s,t) = (O1 - s1)^2 + 4t^2 (O2 - s2)^2 - 4|t| B; constant roles become multiples of 1.
HermitianOperator witness_product(const ProductCriterion& c, const WitnessParams& p, const ComponentOperators& ops);

// Shipped criteria ------------------------------------------------------------

/// xi^2 = N Var(J_z) / <J_x>^2 >= 1: O1 = J_z, O2 = constant N, B = J_x.
ProductCriterion wineland_criterion(double n_particles);

/// Giovannetti product criterion for two collective spins with gains (g_z, g_y).
/// The signs of <J_x^A>, <J_x^B> are folded into B so that <B> >= 0.
ProductCriterion giovannetti_criterion(double n_a, double n_b, double g_z, double g_y, double sign_a = 1.0,
                                       double sign_b = 1.0);
ProductCriterion giovannetti_criterion(const BipartiteMomentData& m, double g_z, double g_y);

ComponentOperators dicke_components(int n_particles);
/// J_x, J_y, J_z on n qubits in the 2^n tensor space.
ComponentOperators qubit_components(int n_qubits);
/// (J_x^A, J_y^A, J_z^A, J_x^B, J_y^B, J_z^B) with A = first n_a qubits.
ComponentOperators bipartite_qubit_components(int n_a, int n_b);

// Criterion configuration files -----------------------------------------------

struct CriterionConfig {
  enum class Kind { Wineland, Giovannetti, Custom };
  Kind kind = Kind::Wineland;
  std::optional<double> n_particles;
  std::optional<double> g_z;
  std::optional<double> g_y;
  std::variant<std::monostate, SumCriterion, ProductCriterion> custom;
};

using AnyCriterion = std::variant<SumCriterion, ProductCriterion>;

CriterionConfig parse_criterion_config(const nlohmann::json& doc);
nlohmann::json criterion_config_to_json(const CriterionConfig& config);
/// Builds the concrete criterion for a data set (N and signs come from the data).
AnyCriterion resolve_criterion(const CriterionConfig& config, const AnyMoments& data);

}  // namespace entq
