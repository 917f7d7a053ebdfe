#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "entq/moments.hpp"
#include "entq/operators.hpp"

namespace entq {

/// Pure state of N spin-1/2 particles in the symmetric subspace, stored as
/// Dicke amplitudes in descending-J_z order (see DickeBasis).
class SpinEnsembleState {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// Throws InvalidInput unless amplitudes has N+1 entries and unit norm.
  SpinEnsembleState(int n_particles, Eigen::VectorXcd amplitudes);

  int n_particles() const { return n_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  DickeBasis basis() const { return DickeBasis(n_); }

 private:
  int n_;
  Eigen::VectorXcd amplitudes_;
};

/// Coherent spin state along +x: <J_x> = N/2, Var(J_y) = Var(J_z) = N/4.
SpinEnsembleState css_x(int n_particles);

/// One-axis twisting exp(-i mu J_z^2).
SpinEnsembleState oat_evolve(const SpinEnsembleState& state, double mu);

/// exp(-i theta J_x).
SpinEnsembleState rotate_x(const SpinEnsembleState& state, double theta);

/// Angle in [0, pi) whose x-rotation minimizes Var(J_z).
double optimal_squeezing_rotation(const SpinEnsembleState& state);

/// Means and full symmetrized covariance of (J_x, J_y, J_z).
MomentData exact_moments(const SpinEnsembleState& state);

struct SplitConfig {
  /// Probability that an atom lands in region A; 0 < p < 1.
  double p = 0.5;
};

/// Propagates the moments of a symmetric N-particle state through an
/// independent Bernoulli(p) assignment of atoms to regions A and B.
BipartiteMomentData split_moments(const MomentData& parent, int n_particles, SplitConfig cfg);

/// Which axes to measure; n_shots shots are taken per listed axis.
struct SettingsPlan {
  std::vector<Axis> axes{Axis::X, Axis::Y, Axis::Z};
};

/// Exact projective sampling of J_axis from the state, with optional additive
/// Gaussian noise (std detection_sigma) on each count, rounded and clipped at 0.
std::vector<ShotRecord> sample_shots(const SpinEnsembleState& state, const SettingsPlan& plan, int n_shots,
                                     std::uint64_t seed, double detection_sigma = 0.0);

/// Gaussian approximation from moments (region ALL); counts use N = round(n_particles).
std::vector<ShotRecord> sample_shots(const MomentData& moments, const SettingsPlan& plan, int n_shots,
                                     std::uint64_t seed, double detection_sigma = 0.0);

/// Gaussian approximation to the bipartite moments: for each shot the same
/// axis is drawn jointly in A and B from the 2x2 block of the covariance.
/// Approximate by construction.
std::vector<ShotRecord> sample_shots(const BipartiteMomentData& moments, const SettingsPlan& plan, int n_shots,
                                     std::uint64_t seed, double detection_sigma = 0.0);

}  // namespace entq
