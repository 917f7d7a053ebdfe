#include "entq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "entq/error.hpp"
#include "entq/optimize.hpp"

namespace entq {

SpinEnsembleState::SpinEnsembleState(int n_particles, Eigen::VectorXcd amplitudes)
    : n_(n_particles), amplitudes_(std::move(amplitudes)) {
  if (n_particles < 1) throw InvalidInput("spin ensemble needs at least one particle");
  if (amplitudes_.size() != n_particles + 1) {
    throw InvalidInput("expected " + std::to_string(n_particles + 1) + " Dicke amplitudes");
  }
  const double norm = amplitudes_.norm();
  if (!(std::abs(norm - 1.0) <= kNormTolerance)) {
    throw InvalidInput("state is not normalized (|psi| = " + std::to_string(norm) + ")");
  }
}

namespace {

// Subdiagonal of J_x: entry k-1 couples Dicke indices k-1 and k.
Eigen::VectorXd jx_subdiagonal(const DickeBasis& basis) {
  Eigen::VectorXd sub(basis.dim() - 1);
  for (Index k = 1; k < basis.dim(); ++k) sub(k - 1) = 0.5 * ladder_coefficient(basis, k);
  return sub;
}

// Eigenvectors of J_x (real, orthonormal columns) with eigenvalues snapped to
// the exact half-integer grid.
struct JxEigen {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};

JxEigen jx_eigen(const DickeBasis& basis) {
  if (basis.dim() == 1) return {Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(Eigen::VectorXd::Zero(basis.dim()), jx_subdiagonal(basis), Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw ConvergenceError("J_x eigensolver did not converge");
  JxEigen out{es.eigenvectors(), es.eigenvalues()};
  for (Index i = 0; i < out.values.size(); ++i) out.values(i) = std::round(2.0 * out.values(i)) / 2.0;
  return out;
}

// diag(i^k): maps J_x onto J_y in the Dicke basis, J_y = D J_x D^H.
Eigen::VectorXcd jy_phases(Index dim) {
  static const Complex kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  Eigen::VectorXcd d(dim);
  for (Index k = 0; k < dim; ++k) d(k) = kPhases[k % 4];
  return d;
}

Eigen::VectorXcd apply_spin(const DickeBasis& basis, Axis axis, const Eigen::VectorXcd& psi) {
  const Index dim = basis.dim();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
  if (axis == Axis::Z) {
    for (Index k = 0; k < dim; ++k) out(k) = basis.m(k) * psi(k);
    return out;
  }
  for (Index k = 1; k < dim; ++k) {
    const double a = 0.5 * ladder_coefficient(basis, k);
    if (axis == Axis::X) {
      out(k - 1) += a * psi(k);
      out(k) += a * psi(k - 1);
    } else {
      out(k - 1) += Complex(0, -a) * psi(k);
      out(k) += Complex(0, a) * psi(k - 1);
    }
  }
  return out;
}

}  // namespace

SpinEnsembleState css_x(int n_particles) {
  const DickeBasis basis(n_particles);
  Eigen::VectorXcd amps(basis.dim());
  const double n = n_particles;
  for (Index k = 0; k < basis.dim(); ++k) {
    const double kk = static_cast<double>(k);
    const double log_binom = std::lgamma(n + 1) - std::lgamma(kk + 1) - std::lgamma(n - kk + 1);
    amps(k) = std::exp(0.5 * log_binom - 0.5 * n * std::numbers::ln2);
  }
  amps.normalize();
  return {n_particles, amps};
}

SpinEnsembleState oat_evolve(const SpinEnsembleState& state, double mu) {
  const DickeBasis basis = state.basis();
  Eigen::VectorXcd amps = state.amplitudes();
  for (Index k = 0; k < basis.dim(); ++k) {
    const double m = basis.m(k);
    amps(k) *= std::polar(1.0, -mu * m * m);
  }
  return {state.n_particles(), amps};
}

SpinEnsembleState rotate_x(const SpinEnsembleState& state, double theta) {
  const auto eig = jx_eigen(state.basis());
  const Eigen::VectorXcd coeffs = eig.vectors.transpose() * state.amplitudes();
  Eigen::VectorXcd phased(coeffs.size());
  for (Index i = 0; i < coeffs.size(); ++i) phased(i) = std::polar(1.0, -theta * eig.values(i)) * coeffs(i);
  Eigen::VectorXcd amps = eig.vectors * phased;
  amps.normalize();
  return {state.n_particles(), amps};
}

double optimal_squeezing_rotation(const SpinEnsembleState& state) {
  const DickeBasis basis = state.basis();
  const auto eig = jx_eigen(basis);
  const Eigen::VectorXcd coeffs = eig.vectors.transpose() * state.amplitudes();
  Eigen::VectorXd m(basis.dim());
  for (Index k = 0; k < basis.dim(); ++k) m(k) = basis.m(k);

  auto var_jz = [&](double theta) {
    Eigen::VectorXcd phased(coeffs.size());
    for (Index i = 0; i < coeffs.size(); ++i) phased(i) = std::polar(1.0, -theta * eig.values(i)) * coeffs(i);
    const Eigen::VectorXd prob = (eig.vectors * phased).cwiseAbs2();
    const double mean = prob.dot(m);
    return prob.dot(m.cwiseProduct(m)) - mean * mean;
  };

  // Var(J_z) is pi-periodic with one minimum per period; a coarse scan picks
  // the basin, golden section refines inside it.
  constexpr int kScan = 32;
  const double h = std::numbers::pi / kScan;
  int best = 0;
  double best_val = var_jz(0.0);
  for (int i = 1; i < kScan; ++i) {
    const double v = var_jz(i * h);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const auto res = optimize::golden_section_maximize([&](double th) { return -var_jz(th); }, (best - 1) * h,
                                                     (best + 1) * h, 1e-13);
  double theta = res.value >= -best_val ? res.x : best * h;
  theta = std::fmod(theta, std::numbers::pi);
  if (theta < 0) theta += std::numbers::pi;
  return theta;
}

MomentData exact_moments(const SpinEnsembleState& state) {
  const DickeBasis basis = state.basis();
  const Eigen::VectorXcd& psi = state.amplitudes();
  Eigen::VectorXcd applied[3];
  MomentData out;
  out.n_particles = state.n_particles();
  for (int a = 0; a < 3; ++a) {
    applied[a] = apply_spin(basis, static_cast<Axis>(a), psi);
    out.mean(a) = psi.dot(applied[a]).real();
  }
  // Centered vectors keep the diagonal a squared norm, so a coherent state's
  // zero variance cannot come out slightly negative.
  for (int a = 0; a < 3; ++a) applied[a] -= out.mean(a) * psi;
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) out.covariance(a, b) = out.covariance(b, a) = applied[a].dot(applied[b]).real();
  }
  return out;
}

BipartiteMomentData split_moments(const MomentData& parent, int n_particles, SplitConfig cfg) {
  if (!(cfg.p > 0.0 && cfg.p < 1.0)) throw InvalidInput("split probability p must lie in (0, 1)");
  if (n_particles < 1) throw InvalidInput("split needs at least one particle");
  if (parent.unmeasured.any() || parent.unmeasured_mean.any()) {
    throw InvalidInput("split_moments needs fully specified (simulator) parent moments");
  }
  const double p = cfg.p;
  const double q = 1.0 - p;
  const Eigen::Matrix3d raw = parent.covariance + parent.mean * parent.mean.transpose();
  const Eigen::Matrix3d single = 0.25 * n_particles * Eigen::Matrix3d::Identity();
  const Eigen::Matrix3d pair = raw - single;

  Eigen::Matrix<double, 6, 6> raw6;
  raw6.topLeftCorner<3, 3>() = p * p * pair + p * single;
  raw6.bottomRightCorner<3, 3>() = q * q * pair + q * single;
  raw6.topRightCorner<3, 3>() = p * q * pair;
  raw6.bottomLeftCorner<3, 3>() = p * q * pair.transpose();

  BipartiteMomentData out;
  out.n_A = p * n_particles;
  out.n_B = q * n_particles;
  out.mean_A = p * parent.mean;
  out.mean_B = q * parent.mean;
  Eigen::Matrix<double, 6, 1> mean6;
  mean6 << out.mean_A, out.mean_B;
  out.covariance = raw6 - mean6 * mean6.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

void check_sampling_args(int n_shots, double sigma, const SettingsPlan& plan) {
  if (n_shots < 0) throw InvalidInput("number of shots must be >= 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("detection sigma must be finite and >= 0");
  if (plan.axes.empty()) throw InvalidInput("settings plan lists no axes");
}

// Counts for total N and spin value m, plus optional additive detection noise.
std::pair<long long, long long> noisy_counts(long long total, double m, double sigma, std::mt19937_64& rng) {
  long long n1 = std::llround(0.5 * static_cast<double>(total) + m);
  n1 = std::clamp(n1, 0LL, total);
  long long n2 = total - n1;
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    n1 = std::max(0LL, std::llround(static_cast<double>(n1) + noise(rng)));
    n2 = std::max(0LL, std::llround(static_cast<double>(n2) + noise(rng)));
  }
  return {n1, n2};
}

}  // namespace

std::vector<ShotRecord> sample_shots(const SpinEnsembleState& state, const SettingsPlan& plan, int n_shots,
                                     std::uint64_t seed, double detection_sigma) {
  check_sampling_args(n_shots, detection_sigma, plan);
  const DickeBasis basis = state.basis();
  const auto eig = jx_eigen(basis);
  const Eigen::VectorXcd phases = jy_phases(basis.dim());
  std::mt19937_64 rng(seed);
  std::vector<ShotRecord> shots;
  shots.reserve(plan.axes.size() * static_cast<std::size_t>(n_shots));
  long long shot_id = 0;
  for (Axis axis : plan.axes) {
    Eigen::VectorXd prob;
    Eigen::VectorXd values;
    if (axis == Axis::Z) {
      prob = state.amplitudes().cwiseAbs2();
      values.resize(basis.dim());
      for (Index k = 0; k < basis.dim(); ++k) values(k) = basis.m(k);
    } else if (axis == Axis::X) {
      prob = (eig.vectors.transpose() * state.amplitudes()).cwiseAbs2();
      values = eig.values;
    } else {
      const Eigen::VectorXcd rotated = phases.conjugate().cwiseProduct(state.amplitudes());
      prob = (eig.vectors.transpose() * rotated).cwiseAbs2();
      values = eig.values;
    }
    std::discrete_distribution<Index> pick(prob.data(), prob.data() + prob.size());
    for (int i = 0; i < n_shots; ++i) {
      const auto [n1, n2] = noisy_counts(state.n_particles(), values(pick(rng)), detection_sigma, rng);
      shots.push_back({shot_id++, axis, Region::All, n1, n2});
    }
  }
  return shots;
}

std::vector<ShotRecord> sample_shots(const MomentData& moments, const SettingsPlan& plan, int n_shots,
                                     std::uint64_t seed, double detection_sigma) {
  check_sampling_args(n_shots, detection_sigma, plan);
  const long long total = std::llround(moments.n_particles);
  std::mt19937_64 rng(seed);
  std::vector<ShotRecord> shots;
  long long shot_id = 0;
  for (Axis axis : plan.axes) {
    std::normal_distribution<double> spin(moments.mean_of(axis), std::sqrt(moments.variance(axis)));
    for (int i = 0; i < n_shots; ++i) {
      const auto [n1, n2] = noisy_counts(total, spin(rng), detection_sigma, rng);
      shots.push_back({shot_id++, axis, Region::All, n1, n2});
    }
  }
  return shots;
}

std::vector<ShotRecord> sample_shots(const BipartiteMomentData& moments, const SettingsPlan& plan, int n_shots,
                                     std::uint64_t seed, double detection_sigma) {
  check_sampling_args(n_shots, detection_sigma, plan);
  const long long total_a = std::llround(moments.n_A);
  const long long total_b = std::llround(moments.n_B);
  const auto flat = moments.flat();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<ShotRecord> shots;
  long long shot_id = 0;
  for (Axis axis : plan.axes) {
    const Index ia = component(Region::A, axis);
    const Index ib = component(Region::B, axis);
    Eigen::Vector2d ea = Eigen::Vector2d::Zero();
    Eigen::Vector2d eb = Eigen::Vector2d::Zero();
    ea(0) = 1.0;
    eb(1) = 1.0;
    Eigen::VectorXd ca = Eigen::VectorXd::Zero(6);
    Eigen::VectorXd cb = Eigen::VectorXd::Zero(6);
    ca(ia) = 1.0;
    cb(ib) = 1.0;
    const double mean_a = flat.mean_of(ca);
    const double mean_b = flat.mean_of(cb);
    Eigen::Matrix2d cov;
    cov(0, 0) = flat.variance_of(ca);
    cov(1, 1) = flat.variance_of(cb);
    cov(0, 1) = cov(1, 0) = 0.5 * (flat.variance_of(ca + cb) - cov(0, 0) - cov(1, 1));
    // Symmetric square root tolerates singular (e.g. perfectly correlated) blocks.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const Eigen::Matrix2d root =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    for (int i = 0; i < n_shots; ++i) {
      const Eigen::Vector2d z(gauss(rng), gauss(rng));
      const Eigen::Vector2d j = Eigen::Vector2d(mean_a, mean_b) + root * z;
      const auto [a1, a2] = noisy_counts(total_a, j(0), detection_sigma, rng);
      const auto [b1, b2] = noisy_counts(total_b, j(1), detection_sigma, rng);
      shots.push_back({shot_id, axis, Region::A, a1, a2});
      shots.push_back({shot_id, axis, Region::B, b1, b2});
      ++shot_id;
    }
  }
  return shots;
}

}  // namespace entq
