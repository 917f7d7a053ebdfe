#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "entq/criteria.hpp"
#include "entq/moments.hpp"
#include "entq/operators.hpp"

namespace entq {

/// Validated mixed state: Hermitian and unit trace to 1e-12, eigenvalues
/// no lower than -1e-10.
class DensityMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kTraceTolerance = 1e-12;
  static constexpr double kEigenvalueTolerance = 1e-10;

  explicit DensityMatrix(Eigen::MatrixXcd entries);

  /// |psi><psi| / <psi|psi>.
  static DensityMatrix pure(const Eigen::VectorXcd& psi);
  static DensityMatrix maximally_mixed(Index dim);

  Index dim() const { return entries_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return entries_; }
  double expectation(const HermitianOperator& op) const { return op.expectation_in(entries_); }

 private:
  Eigen::MatrixXcd entries_;
};

/// Pure product state: one normalized local vector per site.
struct ProductStateSample {
  std::vector<Eigen::VectorXcd> locals;

  Eigen::VectorXcd vector() const;
  /// Bloch polar angle theta in [0, pi] and azimuth phi in [0, 2 pi) of a qubit site.
  std::pair<double, double> bloch_angles(std::size_t site) const;
  /// Uniformly (Haar) random local states.
  static ProductStateSample random(std::span<const Index> dims, std::uint64_t seed);
};

struct ProductMinimum {
  double value = 0.0;
  ProductStateSample state;
  int starts = 0;
};

/// Minimum of <W> over pure product states on sites of the given dimensions:
/// random starts, each refined by exact single-site minimization (smallest
/// eigenvector of the effective local operator) until a sweep improves by
/// less than 1e-12. Throws SizeError when prod(dims) > kMaxTensorDim.
ProductMinimum min_over_product_states(const HermitianOperator& w, std::span<const Index> dims, int n_starts,
                                       std::uint64_t seed);

enum class MembershipSign { Plus, Minus };

/// Smallest eigenvalue of K ± W/c.
double membership_margin(const HermitianOperator& w, double c, const HermitianOperator& k, MembershipSign sign);
/// True iff K ± W/c is positive semidefinite to within -1e-9.
bool membership_check(const HermitianOperator& w, double c, const HermitianOperator& k, MembershipSign sign);
bool membership_check(const HermitianOperator& w, double c, MembershipSign sign);

struct PptRobustness {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct PptOptions {
  double tolerance = 1e-9;
  int max_iterations = 100000;
  double penalty = 1.0;
};

/// Smallest trace of X >= 0 such that rho + X has positive partial transpose.
/// Solved by alternating projections onto the PSD cone (for X) and the PSD
/// cone in the partially transposed frame, with a scaled dual correction.
/// Equals the generalized robustness for 2x2 and 2x3. Throws
/// ConvergenceError (with the residual) after max_iterations.
PptRobustness gr_ppt(const DensityMatrix& rho, Index dim_a, Index dim_b, const PptOptions& opts = {});

/// Same quantity by bisection on s: decides whether {X >= 0, tr X = s} meets
/// {X : (rho + X)^T_B >= 0} by plain alternating projections. Slow.
double gr_ppt_bisection(const DensityMatrix& rho, Index dim_a, Index dim_b, double tolerance = 1e-7);

struct BsaSearchOptions {
  int random_starts = 4;
  int max_iterations = 3000;
};

/// Upper bound 1 - lambda on the best separable approximation weight, where
/// lambda is the largest value with rho - lambda sigma >= 0 found over
/// mixtures sigma of n_products pure product states (n_products <= 16).
double bsa_upper(const DensityMatrix& rho, std::span<const Index> dims, int n_products, std::uint64_t seed,
                 const BsaSearchOptions& opts = {});

/// Partial trace keeping one site.
Eigen::MatrixXcd reduced_state(const Eigen::MatrixXcd& rho, std::span<const Index> dims, std::size_t site);

/// Means and covariance of the given component operators in rho.
FlatMoments density_moments(const DensityMatrix& rho, const ComponentOperators& components);
MomentData single_moments(const DensityMatrix& rho, const ComponentOperators& components, double n_particles);
BipartiteMomentData bipartite_moments(const DensityMatrix& rho, const ComponentOperators& components, double n_a,
                                      double n_b);

}  // namespace entq
