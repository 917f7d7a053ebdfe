#include <doctest.h>

#include <cmath>
#include <iomanip>
#include <random>

#include "entq/bounds.hpp"
#include "entq/criteria.hpp"
#include "entq/error.hpp"
#include "entq/oracle.hpp"
#include "entq/simulator.hpp"
#include "entq/verify.hpp"

using namespace entq;

namespace {

constexpr double kN = 476.0;
constexpr double kVar = 32.0;
constexpr double kC = 0.98;

MomentData experiment() { return wineland_moments(kN, kVar, kC); }

// Closed-form Wineland GR ratio at tangent t, written out independently of
// the criterion machinery.
double wineland_ratio(double n, double var, double mean_x, double t) {
  const double numerator = 4.0 * t * mean_x - var - 4.0 * t * t * n;
  const double m_t = n * n / 4.0 + 4.0 * t * t * n + 2.0 * t * n;
  return numerator / m_t;
}

double scan_max(double n, double var, double mean_x) {
  double best = 0.0;
  const double hi = mean_x / n;
  for (int i = 1; i <= 200000; ++i) best = std::max(best, wineland_ratio(n, var, mean_x, hi * i / 200000.0));
  return best;
}

// Split of the optimally rotated OAT state of n atoms with p = 1/2.
BipartiteMomentData split_oat(int n, double mu) {
  return split_moments(exact_moments(verify::squeezed_state(n, mu)), n, SplitConfig{0.5});
}

double xi2_of(int n, double mu) { return wineland_xi2(exact_moments(verify::squeezed_state(n, mu))).xi2; }

}  // namespace

TEST_CASE("sum bounds: clamping and normalization") {
  SumCriterion c;
  c.variance_terms.push_back(Observable::unit(3, 2, SpectralBounds{-1.0, 1.0, true}));
  c.offset = Observable::unit(3, 0, SpectralBounds{-1.0, 1.0, true});
  MomentData m;
  m.n_particles = 2;
  m.covariance.diagonal() << 0.5, 0.5, 0.5;
  m.mean << 0.2, 0.0, 0.0;
  CHECK(bsa_from_sum(c, m.flat()).value == 0.0);
  CHECK(gr_from_sum(c, m.flat()).value == 0.0);
  // S = 0 - 1 = -n
  m.covariance(2, 2) = 0.0;
  m.mean(0) = 1.0;
  CHECK(bsa_from_sum(c, m.flat()).value == doctest::Approx(1.0).epsilon(1e-15));
  // m = 1 + 1
  CHECK(gr_from_sum(c, m.flat()).value == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("a non-certifying tangent at t = 0.49") {
  const auto c = wineland_criterion(kN);
  const auto m = experiment().flat();
  const double s = sum_value(tangent_criterion(c, 0.49), m);
  CHECK(s == doctest::Approx(32.0 + 4.0 * 0.49 * 0.49 * kN - 4.0 * 0.49 * kC * kN / 2.0).epsilon(1e-12));
  CHECK(s > 0.0);
  CHECK(gr_at(c, m, 0.49) == 0.0);
  CHECK(bsa_at(c, m, 0.49) == 0.0);
}

TEST_CASE("fixed-t paths agree with the mapped sum criterion") {
  const auto c = wineland_criterion(kN);
  const auto m = experiment().flat();
  for (double t : {0.05, 0.13, 0.245, 0.3, 0.45}) {
    const auto mapped = tangent_criterion(c, t);
    CHECK(std::abs(gr_at(c, m, t) - gr_from_sum(mapped, m).value) <= 1e-12);
    CHECK(std::abs(bsa_at(c, m, t) - bsa_from_sum(mapped, m).value) <= 1e-12);
    CHECK(gr_at(c, m, t) == doctest::Approx(std::max(0.0, wineland_ratio(kN, kVar, kC * kN / 2, t))).epsilon(1e-12));
  }
}

TEST_CASE("Wineland bounds at the experimental values") {
  const auto b = wineland_bounds(experiment());
  const double xi2 = kN * kVar / std::pow(kC * kN / 2.0, 2);
  CHECK(b.squeezing.xi2 == doctest::Approx(xi2).epsilon(1e-14));
  CHECK(b.squeezing.contrast == doctest::Approx(kC).epsilon(1e-14));
  CHECK(b.bsa.value == doctest::Approx(kC * (1.0 - std::sqrt(xi2))).epsilon(1e-13));
  CHECK(std::abs(b.bsa.value - 0.461) <= 0.005);
  REQUIRE(b.bsa.params.t.has_value());
  CHECK(*b.bsa.params.t == doctest::Approx(std::sqrt(kVar / (4.0 * kN))).epsilon(1e-12));
  CHECK(b.gr_first_order == doctest::Approx(kC * kC * (1.0 - xi2) / kN).epsilon(1e-13));
  CHECK(std::abs(b.gr_first_order - 1.453e-3) <= 2e-5);

  // The hand ratio at t = 0.245, 82.3/56991, is 1.444e-3 to four figures.
  const double at_hand = gr_at(wineland_criterion(kN), experiment().flat(), 0.245);
  CHECK(std::round(at_hand * 1e6) / 1e6 == doctest::Approx(1.444e-3).epsilon(1e-12));
  CHECK(b.gr.value >= at_hand);

  // Independent dense scan of the closed-form ratio.
  const double scanned = scan_max(kN, kVar, kC * kN / 2.0);
  CHECK(b.gr.value >= scanned - 1e-15);
  CHECK(b.gr.value - scanned <= 1e-12);
  CHECK(b.gr.diagnostics.normalization_certified);
}

TEST_CASE("no violation means zero bounds") {
  for (int n : {4, 50, 476}) {
    const auto b = wineland_bounds(wineland_moments_from_xi2(n, 1.0, 0.9));
    CHECK(b.bsa.value == 0.0);
    CHECK(b.gr.value == 0.0);
    CHECK(b.gr_first_order == 0.0);
    const auto css = wineland_bounds(exact_moments(css_x(n)));
    CHECK(css.squeezing.xi2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(css.bsa.value == 0.0);
    CHECK(css.gr.value == 0.0);
  }
  // Var(O1) Var(O2) >= <B>^2
  const auto weak = wineland_moments_from_xi2(100, 1.3, 0.5);
  CHECK(gr_from_product(wineland_criterion(100), weak.flat()).value == 0.0);
  CHECK(bsa_from_product(wineland_criterion(100), weak.flat()).value == 0.0);
}

TEST_CASE("zero mean spin is degenerate, not an error") {
  MomentData m = wineland_moments(100, 20, 0.5);
  m.mean(0) = 0.0;
  CHECK_THROWS_AS(wineland_xi2(m), DegenerateCriterion);
  const auto b = wineland_bounds(m);
  CHECK(b.degenerate);
  CHECK(b.bsa.value == 0.0);
  CHECK(b.gr.value == 0.0);
}

TEST_CASE("every bound is reproduced from its own parameters") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double n = 10.0 + 2000.0 * u(rng);
    const double c = 0.3 + 0.7 * u(rng);
    const double xi2 = 0.05 + 1.2 * u(rng);
    const auto m = wineland_moments_from_xi2(n, xi2, c);
    const auto b = wineland_bounds(m);
    REQUIRE(b.gr.params.t.has_value());
    const double t = *b.gr.params.t;
    const double recomputed = std::max(0.0, wineland_ratio(n, m.variance(Axis::Z), m.mean_of(Axis::X), t));
    CHECK(std::abs(recomputed - b.gr.value) <= 1e-10);
    CHECK(std::abs(gr_at(wineland_criterion(n), m.flat(), t) - b.gr.value) <= 1e-10);
    CHECK(std::abs(bsa_at(wineland_criterion(n), m.flat(), *b.bsa.params.t) - b.bsa.value) <= 1e-10);
    CHECK(b.bsa.value <= 1.0);
    CHECK(b.bsa.value >= 0.0);
    CHECK(b.gr.value >= 0.0);
    // Dominance over fixed tangents.
    for (double f : {0.3, 0.7, 0.9, 1.1}) {
      CHECK(b.gr.value >= gr_at(wineland_criterion(n), m.flat(), f * t) - 1e-15);
      CHECK(b.bsa.value >= bsa_at(wineland_criterion(n), m.flat(), f * t) - 1e-15);
    }
  }
}

TEST_CASE("bounds weakly decrease as xi^2 grows") {
  for (double n : {100.0, 476.0}) {
    double prev_bsa = 2.0;
    double prev_gr = 1.0;
    for (double db = -15.0; db <= 1.0; db += 0.25) {
      const auto b = wineland_bounds(wineland_moments_from_xi2(n, std::pow(10.0, db / 10.0), 0.98));
      CHECK(b.bsa.value <= prev_bsa);
      CHECK(b.gr.value <= prev_gr);
      prev_bsa = b.bsa.value;
      prev_gr = b.gr.value;
    }
  }
}

TEST_CASE("N * GR approaches the first-order value as N grows") {
  const double c = 0.98;
  const double xi2 = std::pow(10.0, -5.5 / 10.0);
  double prev = 1e300;
  for (double n : {1e2, 1e3, 1e4}) {
    const auto b = wineland_bounds(wineland_moments_from_xi2(n, xi2, c));
    const double deviation = std::abs(n * b.gr.value - c * c * (1.0 - xi2));
    CAPTURE(n);
    CHECK(deviation < prev);
    prev = deviation;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("GR normalization certification") {
  // Centered shift: the Weyl cap equals m_t.
  const auto centered = wineland_bounds(experiment());
  CHECK(centered.gr.diagnostics.shifted_normalization == doctest::Approx(centered.gr.normalization).epsilon(1e-14));
  CHECK(centered.gr.diagnostics.normalization_certified);

  // A measured nonzero <J_z> moves the optimal shift off center.
  MomentData m;
  m.n_particles = 2;
  m.mean << 0.8, 0.0, -0.46;
  m.covariance.diagonal() << 0.1, 0.3, 0.02;
  const auto r = gr_from_product(wineland_criterion(2), m.flat());
  REQUIRE(r.value > 0.0);
  const double t = *r.params.t;
  const double s = r.params.s[0];
  CHECK(s == doctest::Approx(-0.46));
  const double weyl = std::pow(std::abs(s) + 1.0, 2) + 4.0 * t * t * 2.0 + 4.0 * t * 1.0;
  CHECK(r.diagnostics.shifted_normalization == doctest::Approx(weyl).epsilon(1e-12));
  CHECK_FALSE(r.diagnostics.normalization_certified);
}

TEST_CASE("Giovannetti G^2 identities") {
  const auto m = split_oat(100, 0.05);
  // Zero gains leave the single-system uncertainty relation for B.
  const double only_b = m.covariance(5, 5) * m.covariance(4, 4) / (m.mean_B(0) * m.mean_B(0) / 4.0);
  CHECK(giovannetti_g2(m, 0.0, 0.0) == doctest::Approx(only_b).epsilon(1e-12));
  CHECK(giovannetti_g2(m, 0.0, 0.0) >= 1.0);
  // At p = 1/2, Var(J_y^A - J_y^B) = N/4 and the criterion collapses to xi^2.
  CHECK(giovannetti_g2(m, 1.0, -1.0) == doctest::Approx(xi2_of(100, 0.05)).epsilon(1e-10));
  BipartiteMomentData flagged = m;
  flagged.unmeasured(2, 5) = flagged.unmeasured(5, 2) = true;
  CHECK_THROWS_AS(giovannetti_g2(flagged, 1.0, 1.0), UnmeasuredMoment);
}

TEST_CASE("independent ensembles: G^2 >= 1 and zero bounds") {
  const auto a = exact_moments(css_x(40));
  const auto b = exact_moments(css_x(60));
  BipartiteMomentData m;
  m.n_A = 40;
  m.n_B = 60;
  m.mean_A = a.mean;
  m.mean_B = b.mean;
  m.covariance.topLeftCorner<3, 3>() = a.covariance;
  m.covariance.bottomRightCorner<3, 3>() = b.covariance;
  // Coherent states saturate the relation, so zero holds up to rounding.
  CHECK(giovannetti_g2(m, 1.0, 1.0) >= 1.0 - 1e-12);
  const auto g = giovannetti_bounds(m);
  CHECK(g.g2_min >= 1.0 - 1e-12);
  CHECK(g.bsa.value <= 1e-12);
  CHECK(g.gr.value <= 1e-12);

  // Independently squeezed ensembles stay strictly above.
  const auto sa = exact_moments(verify::squeezed_state(40, 0.1));
  const auto sb = exact_moments(verify::squeezed_state(60, 0.05));
  m.mean_A = sa.mean;
  m.mean_B = sb.mean;
  m.covariance.topLeftCorner<3, 3>() = sa.covariance;
  m.covariance.bottomRightCorner<3, 3>() = sb.covariance;
  const auto gs = giovannetti_bounds(m);
  CHECK(gs.g2_min >= 1.0);
  CHECK(gs.bsa.value == 0.0);
  CHECK(gs.gr.value == 0.0);
}

TEST_CASE("split OAT at -3.8 dB certifies entanglement between the halves") {
  const int n = 100;
  // Bisection on mu below the optimal twist, where xi^2 decreases with mu.
  const double target = std::pow(10.0, -3.8 / 10.0);
  double lo = 0.0;
  double hi = 0.05;
  REQUIRE(xi2_of(n, hi) < target);
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (xi2_of(n, mid) > target ? lo : hi) = mid;
  }
  const double mu = 0.5 * (lo + hi);
  CHECK(10.0 * std::log10(xi2_of(n, mu)) == doctest::Approx(-3.8).epsilon(1e-6));

  const auto m = split_oat(n, mu);
  const auto g = giovannetti_bounds(m);
  CHECK(g.g2_min < 1.0);
  CHECK(g.g2_min <= target + 1e-10);
  CHECK(g.bsa.value > 0.0);
  CHECK(g.gr.value > 0.0);
  CHECK(g.bsa.value >= giovannetti_bsa_at(m, 1.0, 1.0).value);
  CHECK(g.gr.value >= giovannetti_gr_at(m, 1.0, 1.0).value);
  CHECK(g.gr.value >= giovannetti_gr_at(m, 1.0, -1.0).value);

  // Audit at the returned gains.
  CHECK(std::abs(giovannetti_bsa_at(m, *g.bsa.g_z, *g.bsa.g_y).value - g.bsa.value) <= 1e-10);
  CHECK(std::abs(giovannetti_gr_at(m, *g.gr.g_z, *g.gr.g_y).value - g.gr.value) <= 1e-10);

  // Regression baselines from this build (not external reference values).
  MESSAGE(std::setprecision(12) << "split OAT baselines: mu=" << mu << " BSA=" << g.bsa.value << " GR=" << g.gr.value);
  CHECK(std::abs(g.bsa.value - 0.352867821959) <= 1e-6 * 0.353);
  CHECK(std::abs(g.gr.value - 0.00328275452549) <= 1e-6 * 0.00328);
}

TEST_CASE("separable mixtures give zero bounds") {
  // Mixture of qubit product states tilted around +x.
  const int n = 4;
  const auto comps = qubit_components(n);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.3);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(16, 16);
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(1);
    for (int q = 0; q < n; ++q) {
      const double theta = M_PI / 2 + g(rng);
      const double phi = g(rng);
      Eigen::Vector2cd local(std::cos(theta / 2), std::polar(std::sin(theta / 2), phi));
      Eigen::VectorXcd next(v.size() * 2);
      for (Index i = 0; i < v.size(); ++i) next.segment(2 * i, 2) = v(i) * local;
      v = next;
    }
    rho += v * v.adjoint() / 20.0;
  }
  const auto m = single_moments(DensityMatrix(rho), comps, n);
  const auto b = wineland_bounds(m);
  CHECK(b.squeezing.xi2 >= 1.0);
  CHECK(b.bsa.value == 0.0);
  CHECK(b.gr.value == 0.0);
}
