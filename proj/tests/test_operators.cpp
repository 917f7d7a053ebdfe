#include <doctest.h>

#include <algorithm>

#include "entq/error.hpp"
#include "entq/operators.hpp"
#include "entq/verify.hpp"
#include "reference.hpp"

using namespace entq;

namespace {

Eigen::MatrixXcd j(int n, Axis a) { return collective_spin(DickeBasis(n), a).matrix(); }

}  // namespace

TEST_CASE("single spin J_z is diag(1/2, -1/2) in descending order") {
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(2, 2);
  expected(0, 0) = 0.5;
  expected(1, 1) = -0.5;
  CHECK((j(1, Axis::Z) - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((j(1, Axis::X) - 0.5 * reference::pauli_x()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((j(1, Axis::Y) - 0.5 * reference::pauli_y()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("N = 4 J_z spectrum is -2..2") {
  const auto ev = eigenvalues(collective_spin(DickeBasis(4), Axis::Z));
  REQUIRE(ev.size() == 5);
  for (int k = 0; k < 5; ++k) CHECK(ev(k) == doctest::Approx(-2.0 + k));
}

TEST_CASE("[J_z, J_y] = -i J_x at N = 2") {
  const auto lhs = commutator(collective_spin(DickeBasis(2), Axis::Z), collective_spin(DickeBasis(2), Axis::Y));
  CHECK((lhs - Complex(0, -1) * j(2, Axis::X)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("su(2) commutators and Casimir hold for N <= 40") {
  for (int n = 1; n <= 40; ++n) {
    const DickeBasis b(n);
    const auto x = collective_spin(b, Axis::X);
    const auto y = collective_spin(b, Axis::Y);
    const auto z = collective_spin(b, Axis::Z);
    const Complex i(0, 1);
    CHECK((commutator(x, y) - i * z.matrix()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((commutator(y, z) - i * x.matrix()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((commutator(z, x) - i * y.matrix()).cwiseAbs().maxCoeff() < 1e-10);
    const double jj = 0.5 * n * (0.5 * n + 1.0);
    const Eigen::MatrixXcd casimir = (x.squared() + y.squared() + z.squared()).matrix();
    CHECK((casimir - jj * Eigen::MatrixXcd::Identity(b.dim(), b.dim())).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("eigen_bounds on diag(1,2,3)") {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
  d(0, 0) = 1;
  d(1, 1) = 2;
  d(2, 2) = 3;
  const auto b = eigen_bounds(HermitianOperator(d));
  CHECK(b.lambda_min == doctest::Approx(1.0));
  CHECK(b.lambda_max == doctest::Approx(3.0));
  CHECK_FALSE(b.exact);
}

TEST_CASE("eigen_bounds matches characteristic-polynomial roots on random 6x6 Hermitian matrices") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Eigen::MatrixXcd m = reference::random_hermitian(6, seed);
    const auto roots = reference::charpoly_roots(m);
    REQUIRE(roots.size() == 6);
    const auto b = eigen_bounds(HermitianOperator(m));
    CHECK(std::abs(b.lambda_min - roots.front()) < 1e-9);
    CHECK(std::abs(b.lambda_max - roots.back()) < 1e-9);
  }
}

TEST_CASE("collective_spectral_bounds is analytic and agrees with eigen_bounds") {
  const auto big = collective_spectral_bounds(476, Axis::X);
  CHECK(big.lambda_min == -238.0);
  CHECK(big.lambda_max == 238.0);
  CHECK(big.exact);
  const auto one = collective_spectral_bounds(1, Axis::Z);
  CHECK(one.lambda_min == -0.5);
  CHECK(one.lambda_max == 0.5);
  for (int n = 1; n <= 40; ++n) {
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
      const auto analytic = collective_spectral_bounds(n, a);
      const auto numeric = eigen_bounds(collective_spin(DickeBasis(n), a));
      CHECK(std::abs(analytic.lambda_min - numeric.lambda_min) <= 1e-10 * n);
      CHECK(std::abs(analytic.lambda_max - numeric.lambda_max) <= 1e-10 * n);
    }
  }
}

TEST_CASE("tensor_embed places operators by site") {
  const std::vector<Index> dims{2, 2};
  const SiteOperator sz{0, pauli(Axis::Z)};
  const auto e = tensor_embed(std::span(&sz, 1), dims);
  CHECK((e.matrix() - reference::kron(reference::pauli_z(), Eigen::Matrix2cd::Identity())).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));

  const std::vector<Index> dims3{2, 3, 2};
  std::vector<SiteOperator> ids;
  for (Index s = 0; s < 3; ++s) ids.push_back({s, HermitianOperator::identity(dims3[s])});
  CHECK(tensor_embed(ids, dims3).matrix().isIdentity(0.0));
}

TEST_CASE("qubit J_z restricted to the symmetric subspace matches the Dicke J_z") {
  const int n = 4;
  const DickeBasis b(n);
  Eigen::MatrixXcd iso(Index{1} << n, b.dim());
  for (Index k = 0; k < b.dim(); ++k) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(b.dim());
    e(k) = 1.0;
    iso.col(k) = verify::dicke_to_qubits(SpinEnsembleState(n, e));
  }
  CHECK((iso.adjoint() * iso).isIdentity(1e-12));
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    const Eigen::MatrixXcd restricted = iso.adjoint() * qubit_collective_spin(n, a).matrix() * iso;
    CHECK((restricted - j(n, a)).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Eigenvalue multiset of the restriction equals {-2, ..., 2}.
  const auto ev = eigenvalues(HermitianOperator::hermitized(iso.adjoint() * qubit_collective_spin(n, Axis::Z).matrix() * iso));
  for (int k = 0; k < 5; ++k) CHECK(ev(k) == doctest::Approx(-2.0 + k));
}

TEST_CASE("tensor_embed guards the total dimension and site indices") {
  const std::vector<Index> dims(13, 2);
  CHECK_THROWS_AS(tensor_embed({}, dims), SizeError);
  const std::vector<Index> two{2, 2};
  const SiteOperator bad{2, pauli(Axis::X)};
  CHECK_THROWS_AS(tensor_embed(std::span(&bad, 1), two), InvalidInput);
  const std::vector<SiteOperator> dup{{0, pauli(Axis::X)}, {0, pauli(Axis::Z)}};
  CHECK_THROWS_AS(tensor_embed(dup, two), InvalidInput);
}

TEST_CASE("partial transpose: Bell, product, Werner, involution") {
  const Eigen::VectorXcd phi = reference::phi_plus();
  const auto bell = HermitianOperator(Eigen::MatrixXcd(phi * phi.adjoint()));
  CHECK(eigen_bounds(partial_transpose(bell, 2, 2)).lambda_min == doctest::Approx(-0.5));

  const Eigen::MatrixXcd ra = reference::random_hermitian(2, 7);
  const Eigen::MatrixXcd rb = reference::random_hermitian(3, 8);
  const auto prod = HermitianOperator(reference::kron(ra, rb));
  const auto ev_before = eigenvalues(prod);
  const auto ev_after = eigenvalues(partial_transpose(prod, 2, 3));
  CHECK((ev_before - ev_after).cwiseAbs().maxCoeff() < 1e-12);

  for (double p = 0.0; p <= 1.0001; p += 0.05) {
    const auto w = HermitianOperator(reference::werner(p));
    const double lmin = eigen_bounds(partial_transpose(w, 2, 2)).lambda_min;
    CHECK(lmin == doctest::Approx((1.0 - 3.0 * p) / 4.0).epsilon(1e-12));
    if (p <= 1.0 / 3.0) CHECK(lmin >= -1e-15);
    if (p > 1.0 / 3.0 + 1e-9) CHECK(lmin < 0.0);
  }

  const auto r = HermitianOperator(reference::random_hermitian(6, 11));
  CHECK((partial_transpose(partial_transpose(r, 2, 3), 2, 3).matrix() - r.matrix()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(partial_transpose(r, 2, 2), InvalidInput);
}

TEST_CASE("Hermitian construction tolerance is 1e-12 absolute") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0 + 1e-13;
  CHECK_NOTHROW(HermitianOperator{m});
  m(1, 0) = 1.0 + 1e-11;
  CHECK_THROWS_AS(HermitianOperator{m}, InvalidInput);
  CHECK_THROWS_AS(HermitianOperator{Eigen::MatrixXcd(2, 3)}, InvalidInput);
}

TEST_CASE("every constructed operator is Hermitian") {
  for (int n : {1, 3, 8}) {
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
      const auto op = collective_spin(DickeBasis(n), a);
      CHECK(linalg::hermiticity_defect(op.matrix()) <= 1e-15);
      CHECK(linalg::hermiticity_defect(op.squared().matrix()) <= 1e-12);
    }
  }
  const auto x = collective_spin(DickeBasis(5), Axis::X);
  const auto z = collective_spin(DickeBasis(5), Axis::Z);
  CHECK(linalg::hermiticity_defect(anticommutator_half(x, z).matrix()) <= 1e-12);
  CHECK(linalg::hermiticity_defect(partial_transpose(qubit_collective_spin(2, Axis::Y), 2, 2).matrix()) <= 1e-15);
}

TEST_CASE("axis labels") {
  CHECK(parse_axis("x") == Axis::X);
  CHECK(parse_axis("Y") == Axis::Y);
  CHECK(axis_label(Axis::Z) == 'z');
  CHECK_THROWS_AS(parse_axis("w"), InvalidInput);
}
