#include "entq/operators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "entq/error.hpp"

namespace entq {

Axis parse_axis(std::string_view label) {
  if (label.size() == 1) {
    switch (std::tolower(static_cast<unsigned char>(label[0]))) {
      case 'x': return Axis::X;
      case 'y': return Axis::Y;
      case 'z': return Axis::Z;
      default: break;
    }
  }
  throw InvalidInput("unknown axis '" + std::string(label) + "' (expected x, y or z)");
}

char axis_label(Axis axis) {
  switch (axis) {
    case Axis::X: return 'x';
    case Axis::Y: return 'y';
    case Axis::Z: return 'z';
  }
  return '?';
}

HermitianOperator::HermitianOperator(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.rows() != entries_.cols()) {
    throw InvalidInput("Hermitian operator must be a non-empty square matrix");
  }
  const double defect = linalg::hermiticity_defect(entries_);
  if (!(defect <= kTolerance)) {
    throw InvalidInput("matrix is not Hermitian (max |A - A^H| = " + std::to_string(defect) + ")");
  }
}

HermitianOperator HermitianOperator::identity(Index dim) {
  return HermitianOperator(Eigen::MatrixXcd::Identity(dim, dim));
}

HermitianOperator HermitianOperator::zero(Index dim) {
  return HermitianOperator(Eigen::MatrixXcd::Zero(dim, dim));
}

HermitianOperator HermitianOperator::hermitized(const Eigen::MatrixXcd& m) {
  HermitianOperator out;
  out.entries_ = (m + m.adjoint()) / 2.0;
  return out;
}

double HermitianOperator::expectation(const Eigen::VectorXcd& psi) const {
  return psi.dot(entries_ * psi).real();
}

double HermitianOperator::expectation_in(const Eigen::MatrixXcd& rho) const {
  return (rho.cwiseProduct(entries_.transpose())).sum().real();
}

HermitianOperator HermitianOperator::squared() const { return hermitized(entries_ * entries_); }

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& other) {
  if (other.dim() != dim()) throw InvalidInput("operator dimension mismatch in sum");
  entries_ += other.entries_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& other) {
  if (other.dim() != dim()) throw InvalidInput("operator dimension mismatch in difference");
  entries_ -= other.entries_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double factor) {
  entries_ *= factor;
  return *this;
}

HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
HermitianOperator operator*(double factor, HermitianOperator a) { return a *= factor; }
HermitianOperator operator*(HermitianOperator a, double factor) { return a *= factor; }

HermitianOperator anticommutator_half(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw InvalidInput("operator dimension mismatch in anticommutator");
  return HermitianOperator::hermitized((a.matrix() * b.matrix() + b.matrix() * a.matrix()) / 2.0);
}

Eigen::MatrixXcd commutator(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) throw InvalidInput("operator dimension mismatch in commutator");
  return a.matrix() * b.matrix() - b.matrix() * a.matrix();
}

SpectralBounds::SpectralBounds(double lo, double hi, bool is_exact)
    : lambda_min(lo), lambda_max(hi), exact(is_exact) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InvalidInput("spectral bounds must be finite");
  if (lo > hi) throw InvalidInput("spectral bounds require lambda_min <= lambda_max");
}

double SpectralBounds::variance_cap() const {
  const double half_width = 0.5 * (lambda_max - lambda_min);
  return half_width * half_width;
}

double SpectralBounds::square_cap() const {
  const double top = std::max(std::abs(lambda_min), std::abs(lambda_max));
  return top * top;
}

double SpectralBounds::clamp(double value) const { return std::clamp(value, lambda_min, lambda_max); }

SpectralBounds SpectralBounds::scaled(double factor) const {
  if (factor >= 0) return {factor * lambda_min, factor * lambda_max, exact};
  return {factor * lambda_max, factor * lambda_min, exact};
}

DickeBasis::DickeBasis(int n_particles) : n_(n_particles) {
  if (n_particles < 1) throw InvalidInput("Dicke basis needs at least one particle");
}

double ladder_coefficient(const DickeBasis& basis, Index k) {
  const double j = basis.total_spin();
  const double m = basis.m(k);
  return std::sqrt(std::max(0.0, j * (j + 1) - m * (m + 1)));
}

HermitianOperator collective_spin(const DickeBasis& basis, Axis axis) {
  return HermitianOperator(collective_spin_matrix<double>(basis, axis));
}

SpectralBounds eigen_bounds(const HermitianOperator& op) {
  const Eigen::VectorXd values = eigenvalues(op);
  return {values(0), values(values.size() - 1), false};
}

SpectralBounds collective_spectral_bounds(int n_particles, Axis /*axis*/) {
  if (n_particles < 1) throw InvalidInput("collective spin needs at least one particle");
  return {-0.5 * n_particles, 0.5 * n_particles, true};
}

Eigen::VectorXd eigenvalues(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("Hermitian eigensolver did not converge (dim " + std::to_string(op.dim()) + ")");
  }
  return es.eigenvalues();
}

HermitianOperator tensor_embed(std::span<const SiteOperator> ops, std::span<const Index> dims) {
  if (dims.empty()) throw InvalidInput("tensor_embed needs at least one site");
  Index total = 1;
  for (Index d : dims) {
    if (d < 1) throw InvalidInput("local dimensions must be positive");
    total *= d;
    if (total > kMaxTensorDim) {
      throw SizeError("total dimension exceeds " + std::to_string(kMaxTensorDim));
    }
  }
  std::vector<const HermitianOperator*> per_site(dims.size(), nullptr);
  for (const auto& so : ops) {
    if (so.site < 0 || so.site >= static_cast<Index>(dims.size())) {
      throw InvalidInput("site index " + std::to_string(so.site) + " out of range");
    }
    if (per_site[so.site] != nullptr) {
      throw InvalidInput("site index " + std::to_string(so.site) + " listed twice");
    }
    if (so.op.dim() != dims[so.site]) {
      throw InvalidInput("operator at site " + std::to_string(so.site) + " has wrong dimension");
    }
    per_site[so.site] = &so.op;
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (std::size_t s = 0; s < dims.size(); ++s) {
    if (per_site[s] != nullptr) {
      out = linalg::kron(out, per_site[s]->matrix());
    } else {
      out = linalg::kron(out, Eigen::MatrixXcd::Identity(dims[s], dims[s]));
    }
  }
  return HermitianOperator::hermitized(out);
}

HermitianOperator pauli(Axis axis) {
  Eigen::Matrix2cd m;
  switch (axis) {
    case Axis::X: m << 0, 1, 1, 0; break;
    case Axis::Y: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case Axis::Z: m << 1, 0, 0, -1; break;
  }
  return HermitianOperator(m);
}

HermitianOperator qubit_collective_spin(int n_qubits, Axis axis) {
  if (n_qubits < 1) throw InvalidInput("need at least one qubit");
  std::vector<Index> dims(static_cast<std::size_t>(n_qubits), 2);
  Index total = 1;
  for (int i = 0; i < n_qubits; ++i) {
    total *= 2;
    if (total > kMaxTensorDim) throw SizeError("total dimension exceeds " + std::to_string(kMaxTensorDim));
  }
  const HermitianOperator half = 0.5 * pauli(axis);
  HermitianOperator sum = HermitianOperator::zero(total);
  for (int i = 0; i < n_qubits; ++i) {
    const SiteOperator site{i, half};
    sum += tensor_embed(std::span(&site, 1), dims);
  }
  return sum;
}

HermitianOperator partial_transpose(const HermitianOperator& op, Index dim_a, Index dim_b) {
  if (dim_a < 1 || dim_b < 1 || dim_a * dim_b != op.dim()) {
    throw InvalidInput("partial_transpose: dims " + std::to_string(dim_a) + "x" + std::to_string(dim_b) +
                       " do not match operator dimension " + std::to_string(op.dim()));
  }
  return HermitianOperator::hermitized(linalg::partial_transpose_second(op.matrix(), dim_a, dim_b));
}

}  // namespace entq
