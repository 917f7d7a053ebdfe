#pragma once

// Small dense helpers shared by the operator, oracle and simulator code.
// Everything here is a template over Eigen expressions so it works for
// real and complex scalars alike.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>

namespace entq::linalg {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Kronecker product a ⊗ b.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Matrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b.template cast<Scalar>();
    }
  }
  return out;
}

/// Transpose on the second tensor factor of a (dA·dB)-dimensional operator.
template <typename Derived>
Matrix<typename Derived::Scalar> partial_transpose_second(const Eigen::MatrixBase<Derived>& m,
                                                          Eigen::Index dim_a, Eigen::Index dim_b) {
  Matrix<typename Derived::Scalar> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < dim_a; ++i) {
    for (Eigen::Index j = 0; j < dim_b; ++j) {
      for (Eigen::Index k = 0; k < dim_a; ++k) {
        for (Eigen::Index l = 0; l < dim_b; ++l) {
          out(i * dim_b + l, k * dim_b + j) = m(i * dim_b + j, k * dim_b + l);
        }
      }
    }
  }
  return out;
}

/// Largest entrywise deviation from Hermiticity.
template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Frobenius-nearest positive semidefinite matrix (clips negative eigenvalues).
template <typename Derived>
Matrix<typename Derived::Scalar> project_psd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(h);
  auto clipped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
}

/// Smallest eigenvalue of a Hermitian matrix.
template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(m.eval(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace entq::linalg
