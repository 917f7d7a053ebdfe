#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entq/bounds.hpp"
#include "entq/criteria.hpp"
#include "entq/oracle.hpp"
#include "entq/simulator.hpp"

namespace entq::verify {

// Brute-force references in the full 2^N qubit space --------------------------

/// Embeds Dicke amplitudes into the 2^N tensor space (qubit 0 most significant,
/// |1> = spin down).
Eigen::VectorXcd dicke_to_qubits(const SpinEnsembleState& state);

/// Moments computed from the explicit qubit vector.
MomentData full_tensor_moments(const SpinEnsembleState& state);

/// Moments of (J^A, J^B) averaged over all 2^N explicit assignments of qubits
/// to A (probability p each) and B.
BipartiteMomentData full_tensor_split(const SpinEnsembleState& state, double p);

/// css_x -> one-axis twisting -> rotation minimizing Var(J_z).
SpinEnsembleState squeezed_state(int n_particles, double mu);

// Witness instances ---------------------------------------------------------------

/// A materialized witness together with the constants that place it in
/// M_BSA (as W / (4|t|) with n) and M_GR (as W with m_t).
struct WitnessInstance {
  std::string label;
  HermitianOperator w;
  std::vector<Index> dims;
  WitnessParams params;
  double n = 0.0;
  double m_t = 0.0;
};

/// Wineland tangent witness on n qubits at the GR-optimal (s, t) for `data`.
WitnessInstance wineland_witness(int n_qubits, const MomentData& data);
/// Giovannetti tangent witness on n_a + n_b qubits (sites A and B) at the
/// GR-optimal (s, t) for `data` and the given gains.
WitnessInstance giovannetti_witness(int n_a, int n_b, const BipartiteMomentData& data, double g_z, double g_y);

/// The shipped witnesses at oracle scale: Wineland at N = 2, 4, 6 and
/// Giovannetti on 1+1 and 2+2 qubits, each at squeezed-state parameters.
std::vector<WitnessInstance> shipped_witnesses();

// Random two-qubit families -----------------------------------------------------

/// rank-`rank` Ginibre mixed state of dimension dim.
DensityMatrix random_mixed_state(Index dim, int rank, std::uint64_t seed);
/// Two-qubit symmetric squeezed pure state mixed with white noise of weight `noise`.
DensityMatrix noisy_squeezed_pair(double mu, double noise);

struct SandwichRow {
  std::string family;
  double bsa_bound = 0.0;
  double bsa_upper = 0.0;
  double gr_bound = 0.0;
  double gr_ppt = 0.0;
};

/// Largest lemma bounds (Wineland on both qubits, Giovannetti with one qubit
/// per site) for a two-qubit state next to the two oracles.
SandwichRow sandwich(const std::string& family, const DensityMatrix& rho, std::uint64_t seed);

// Suite ------------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteOptions {
  std::uint64_t seed = 12345;
  int product_starts = 500;
  int sandwich_states = 8;
};

std::vector<CheckResult> run_suite(const SuiteOptions& opts = {});

}  // namespace entq::verify
