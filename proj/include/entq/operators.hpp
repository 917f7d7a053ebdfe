#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "entq/linalg.hpp"

namespace entq {

using Complex = std::complex<double>;
using Index = Eigen::Index;

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Parses "x"/"y"/"z" (case-insensitive). Throws InvalidInput otherwise.
Axis parse_axis(std::string_view label);
char axis_label(Axis axis);

/// Dense Hermitian matrix. Construction from raw entries rejects anything more
/// than 1e-12 (absolute, per entry) away from its adjoint; results of the
/// arithmetic below are re-Hermitized instead, so rounding never trips the check.
class HermitianOperator {
 public:
  static constexpr double kTolerance = 1e-12;

  HermitianOperator() = default;
  explicit HermitianOperator(Eigen::MatrixXcd entries);

  static HermitianOperator identity(Index dim);
  static HermitianOperator zero(Index dim);
  /// Takes (m + m†)/2 without validation; for internal results only.
  static HermitianOperator hermitized(const Eigen::MatrixXcd& m);

  Index dim() const { return entries_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return entries_; }

  /// <psi|A|psi> for a (not necessarily normalized) vector.
  double expectation(const Eigen::VectorXcd& psi) const;
  /// Re Tr[rho A].
  double expectation_in(const Eigen::MatrixXcd& rho) const;

  HermitianOperator squared() const;

  HermitianOperator& operator+=(const HermitianOperator& other);
  HermitianOperator& operator-=(const HermitianOperator& other);
  HermitianOperator& operator*=(double factor);

 private:
  Eigen::MatrixXcd entries_;
};

HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b);
HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b);
HermitianOperator operator*(double factor, HermitianOperator a);
HermitianOperator operator*(HermitianOperator a, double factor);

/// (AB + BA)/2
HermitianOperator anticommutator_half(const HermitianOperator& a, const HermitianOperator& b);
/// [A, B] = AB - BA (anti-Hermitian, so returned as a plain matrix).
Eigen::MatrixXcd commutator(const HermitianOperator& a, const HermitianOperator& b);

struct SpectralBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool exact = false;

  SpectralBounds() = default;
  SpectralBounds(double lo, double hi, bool is_exact = false);

  /// Sharp cap on any state variance: ((max - min)/2)^2.
  double variance_cap() const;
  /// Cap on the variance as max |lambda|^2, the looser textbook form.
  double square_cap() const;
  double clamp(double value) const;
  SpectralBounds scaled(double factor) const;
};

/// Symmetric (J = N/2) sector of N spin-1/2 particles. Basis vectors are
/// ordered by descending J_z eigenvalue: index k holds m = N/2 - k.
class DickeBasis {
 public:
  explicit DickeBasis(int n_particles);

  int n_particles() const { return n_; }
  Index dim() const { return n_ + 1; }
  double total_spin() const { return 0.5 * n_; }
  double m(Index k) const { return total_spin() - static_cast<double>(k); }

 private:
  int n_;
};

/// Ladder coefficient <m+1|J_+|m> = sqrt(J(J+1) - m(m+1)) for the pair (k-1, k).
double ladder_coefficient(const DickeBasis& basis, Index k);

/// J_axis in the Dicke basis as a dense matrix over std::complex<Scalar>.
template <typename Scalar = double>
linalg::Matrix<std::complex<Scalar>> collective_spin_matrix(const DickeBasis& basis, Axis axis) {
  using C = std::complex<Scalar>;
  const Index dim = basis.dim();
  linalg::Matrix<C> out = linalg::Matrix<C>::Zero(dim, dim);
  if (axis == Axis::Z) {
    for (Index k = 0; k < dim; ++k) out(k, k) = C(static_cast<Scalar>(basis.m(k)), 0);
    return out;
  }
  for (Index k = 1; k < dim; ++k) {
    // J_+ raises m, i.e. maps index k to k-1.
    const auto a = static_cast<Scalar>(ladder_coefficient(basis, k));
    if (axis == Axis::X) {
      out(k - 1, k) = C(a / 2, 0);
      out(k, k - 1) = C(a / 2, 0);
    } else {
      out(k - 1, k) = C(0, -a / 2);
      out(k, k - 1) = C(0, a / 2);
    }
  }
  return out;
}

HermitianOperator collective_spin(const DickeBasis& basis, Axis axis);

/// Extreme eigenvalues by dense symmetric eigensolve (exact = false).
SpectralBounds eigen_bounds(const HermitianOperator& op);
/// Analytic (-N/2, N/2) for any collective spin component (exact = true).
SpectralBounds collective_spectral_bounds(int n_particles, Axis axis);

Eigen::VectorXd eigenvalues(const HermitianOperator& op);

struct SiteOperator {
  Index site;
  HermitianOperator op;
};

inline constexpr Index kMaxTensorDim = 4096;

/// Kronecker embedding of site operators with identities elsewhere.
/// Throws SizeError when prod(dims) exceeds kMaxTensorDim.
HermitianOperator tensor_embed(std::span<const SiteOperator> ops, std::span<const Index> dims);

/// sum_i sigma_axis^(i)/2 on n qubits in the full 2^n space.
HermitianOperator qubit_collective_spin(int n_qubits, Axis axis);

HermitianOperator pauli(Axis axis);

HermitianOperator partial_transpose(const HermitianOperator& op, Index dim_a, Index dim_b);

}  // namespace entq
