#include "entq/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "entq/error.hpp"

namespace entq::verify {

// ---------------------------------------------------------------------------
// Full-tensor references

Eigen::VectorXcd dicke_to_qubits(const SpinEnsembleState& state) {
  const int n = state.n_particles();
  if (n > 12) throw SizeError("full-tensor embedding is limited to 12 qubits");
  const Index dim = Index{1} << n;
  Eigen::VectorXcd out(dim);
  for (Index b = 0; b < dim; ++b) {
    const int k = std::popcount(static_cast<unsigned long long>(b));
    const double binom = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
    out(b) = state.amplitudes()(k) / std::sqrt(binom);
  }
  return out;
}

MomentData full_tensor_moments(const SpinEnsembleState& state) {
  const auto rho = DensityMatrix::pure(dicke_to_qubits(state));
  return single_moments(rho, qubit_components(state.n_particles()), state.n_particles());
}

BipartiteMomentData full_tensor_split(const SpinEnsembleState& state, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("p must lie in (0, 1)");
  const int n = state.n_particles();
  const Eigen::VectorXcd psi = dicke_to_qubits(state);
  const std::vector<Index> dims(static_cast<std::size_t>(n), 2);

  // v[3i + a] = (sigma_a^(i) / 2) psi
  std::vector<Eigen::VectorXcd> v;
  for (int i = 0; i < n; ++i) {
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
      const SiteOperator site{i, 0.5 * pauli(a)};
      v.push_back(tensor_embed(std::span(&site, 1), dims).matrix() * psi);
    }
  }
  const Index k = 3 * n;
  Eigen::VectorXd single(k);
  Eigen::MatrixXd pair(k, k);
  for (Index i = 0; i < k; ++i) {
    single(i) = psi.dot(v[static_cast<std::size_t>(i)]).real();
    for (Index j = 0; j < k; ++j) pair(i, j) = v[static_cast<std::size_t>(i)].dot(v[static_cast<std::size_t>(j)]).real();
  }

  Eigen::Matrix<double, 6, 1> mean = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 6> raw = Eigen::Matrix<double, 6, 6>::Zero();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const int in_a = std::popcount(mask);
    const double w = std::pow(p, in_a) * std::pow(1.0 - p, n - in_a);
    auto region_of = [&](int qubit) { return ((mask >> qubit) & 1u) ? 0 : 3; };
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < 3; ++a) {
        mean(region_of(i) + a) += w * single(3 * i + a);
        for (int j = 0; j < n; ++j) {
          for (int b = 0; b < 3; ++b) raw(region_of(i) + a, region_of(j) + b) += w * pair(3 * i + a, 3 * j + b);
        }
      }
    }
  }
  BipartiteMomentData out;
  out.n_A = p * n;
  out.n_B = (1.0 - p) * n;
  out.mean_A = mean.head<3>();
  out.mean_B = mean.tail<3>();
  out.covariance = raw - mean * mean.transpose();
  return out;
}

SpinEnsembleState squeezed_state(int n_particles, double mu) {
  const auto twisted = oat_evolve(css_x(n_particles), mu);
  return rotate_x(twisted, optimal_squeezing_rotation(twisted));
}

// ---------------------------------------------------------------------------
// Witnesses

namespace {

ProductCriterion oriented(const ProductCriterion& c, const FlatMoments& m) {
  return product_terms(c, m).mean_b < 0.0 ? with_flipped_offset(c) : c;
}

WitnessInstance instance(std::string label, const ProductCriterion& c, const FlatMoments& m,
                         const ComponentOperators& ops, std::vector<Index> dims) {
  const auto gr = gr_from_product(c, m);
  WitnessInstance out;
  out.label = std::move(label);
  out.params = gr.params;
  out.w = witness_product(c, gr.params, ops);
  out.dims = std::move(dims);
  const auto k = constants(c, gr.params.t);
  out.n = k.n;
  out.m_t = *k.m_t;
  return out;
}

}  // namespace

WitnessInstance wineland_witness(int n_qubits, const MomentData& data) {
  const auto flat = data.flat();
  const auto c = oriented(wineland_criterion(n_qubits), flat);
  return instance("wineland-N" + std::to_string(n_qubits), c, flat, qubit_components(n_qubits),
                  std::vector<Index>(static_cast<std::size_t>(n_qubits), 2));
}

WitnessInstance giovannetti_witness(int n_a, int n_b, const BipartiteMomentData& data, double g_z, double g_y) {
  const auto flat = data.flat();
  const auto c = oriented(giovannetti_criterion(data, g_z, g_y), flat);
  return instance("giovannetti-" + std::to_string(n_a) + "x" + std::to_string(n_b), c, flat,
                  bipartite_qubit_components(n_a, n_b), {Index{1} << n_a, Index{1} << n_b});
}

std::vector<WitnessInstance> shipped_witnesses() {
  std::vector<WitnessInstance> out;
  for (int n : {2, 4, 6}) out.push_back(wineland_witness(n, exact_moments(squeezed_state(n, 0.3))));
  for (int half : {1, 2}) {
    const auto split = split_moments(exact_moments(squeezed_state(2 * half, 0.3)), 2 * half, {0.5});
    const auto best = giovannetti_bounds(split);
    out.push_back(giovannetti_witness(half, half, split, *best.gr.g_z, *best.gr.g_y));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-qubit families

DensityMatrix random_mixed_state(Index dim, int rank, std::uint64_t seed) {
  if (rank < 1) throw InvalidInput("rank must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd g(dim, rank);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < rank; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  }
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

DensityMatrix noisy_squeezed_pair(double mu, double noise) {
  if (!(noise >= 0.0 && noise <= 1.0)) throw InvalidInput("noise weight must lie in [0, 1]");
  const Eigen::VectorXcd psi = dicke_to_qubits(squeezed_state(2, mu)).normalized();
  Eigen::MatrixXcd rho = (1.0 - noise) * psi * psi.adjoint() + noise * Eigen::MatrixXcd::Identity(4, 4) / 4.0;
  rho /= rho.trace().real();
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

SandwichRow sandwich(const std::string& family, const DensityMatrix& rho, std::uint64_t seed) {
  SandwichRow row;
  row.family = family;
  const auto wb = wineland_bounds(single_moments(rho, qubit_components(2), 2.0));
  row.bsa_bound = wb.bsa.value;
  row.gr_bound = wb.gr.value;
  try {
    const auto gb = giovannetti_bounds(bipartite_moments(rho, bipartite_qubit_components(1, 1), 1.0, 1.0));
    row.bsa_bound = std::max(row.bsa_bound, gb.bsa.value);
    row.gr_bound = std::max(row.gr_bound, gb.gr.value);
  } catch (const DegenerateCriterion&) {
  }
  const std::vector<Index> dims{2, 2};
  row.bsa_upper = bsa_upper(rho, dims, 4, seed);
  row.gr_ppt = gr_ppt(rho, 2, 2).value;
  return row;
}

// ---------------------------------------------------------------------------
// Suite

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

double max_moment_gap(const MomentData& a, const MomentData& b) {
  return std::max((a.mean - b.mean).cwiseAbs().maxCoeff(), (a.covariance - b.covariance).cwiseAbs().maxCoeff());
}

double max_moment_gap(const BipartiteMomentData& a, const BipartiteMomentData& b) {
  double gap = std::max((a.mean_A - b.mean_A).cwiseAbs().maxCoeff(), (a.mean_B - b.mean_B).cwiseAbs().maxCoeff());
  gap = std::max(gap, (a.covariance - b.covariance).cwiseAbs().maxCoeff());
  return std::max(gap, std::max(std::abs(a.n_A - b.n_A), std::abs(a.n_B - b.n_B)));
}

Eigen::VectorXcd bell_vector() {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(1) = 1.0 / std::numbers::sqrt2;
  v(2) = -1.0 / std::numbers::sqrt2;
  return v;
}

}  // namespace

std::vector<CheckResult> run_suite(const SuiteOptions& opts) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  {
    MomentData experiment;
    experiment.n_particles = 476;
    experiment.mean(0) = 0.98 * 238.0;
    experiment.covariance(2, 2) = 32.0;
    const auto wb = wineland_bounds(experiment);
    const bool ok = std::abs(wb.squeezing.xi2 - 0.280) <= 1e-3 && std::abs(wb.bsa.value - 0.461) <= 5e-3 &&
                    std::abs(wb.gr_first_order - 1.453e-3) <= 2e-5;
    add("wineland-reference-numbers", ok,
        "xi2=" + fmt(wb.squeezing.xi2) + " bsa=" + fmt(wb.bsa.value) + " gr1=" + fmt(wb.gr_first_order));
  }

  for (const auto& wi : shipped_witnesses()) {
    const auto pm = min_over_product_states(wi.w, wi.dims, opts.product_starts, opts.seed);
    add("witness-validity/" + wi.label, pm.value >= -1e-6, "min product <W>=" + fmt(pm.value));
    const double t = std::abs(*wi.params.t);
    const double bsa_margin =
        membership_margin((1.0 / (4.0 * t)) * wi.w, wi.n, HermitianOperator::identity(wi.w.dim()), MembershipSign::Plus);
    add("membership-bsa/" + wi.label, bsa_margin >= -1e-9, "min eig=" + fmt(bsa_margin));
    const double gr_margin =
        membership_margin(wi.w, wi.m_t, HermitianOperator::identity(wi.w.dim()), MembershipSign::Minus);
    add("membership-gr/" + wi.label, gr_margin >= -1e-9, "min eig=" + fmt(gr_margin));
  }

  {
    const double bell = gr_ppt(DensityMatrix::pure(bell_vector()), 2, 2).value;
    add("gr-ppt/bell", std::abs(bell - 1.0) <= 1e-6, "value=" + fmt(bell));

    const Eigen::VectorXcd psi = bell_vector();
    const Eigen::MatrixXcd werner = 0.5 * psi * psi.adjoint() + 0.5 * Eigen::MatrixXcd::Identity(4, 4) / 4.0;
    const DensityMatrix w(werner);
    const double admm = gr_ppt(w, 2, 2).value;
    const double bisect = gr_ppt_bisection(w, 2, 2);
    add("gr-ppt/werner-vs-bisection", admm > 0.0 && std::abs(admm - bisect) <= 1e-6,
        "projection=" + fmt(admm) + " bisection=" + fmt(bisect));

    const double mixed = gr_ppt(DensityMatrix::maximally_mixed(4), 2, 2).value;
    add("gr-ppt/separable", std::abs(mixed) <= 1e-8, "value=" + fmt(mixed));
  }

  {
    const std::vector<Index> dims{2, 2};
    const double ent = bsa_upper(DensityMatrix::pure(bell_vector()), dims, 4, opts.seed);
    add("bsa-upper/pure-entangled", ent >= 1.0 - 1e-9, "value=" + fmt(ent));
    Eigen::VectorXcd prod(4);
    prod << 0.6, Complex(0.0, 0.8), 0.0, 0.0;
    const double sep = bsa_upper(DensityMatrix::pure(prod), dims, 4, opts.seed);
    add("bsa-upper/product", sep <= 1e-9, "value=" + fmt(sep));
  }

  {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool ok = true;
    std::string worst;
    double worst_gap = -1e300;
    for (int i = 0; i < opts.sandwich_states; ++i) {
      const bool squeezed = i % 2 == 0;
      const auto rho = squeezed ? noisy_squeezed_pair(0.2 + unit(rng), 0.3 * unit(rng))
                                : random_mixed_state(4, 1 + i % 4, rng());
      const auto row = sandwich(squeezed ? "squeezed" : "random", rho, rng());
      const double gap = std::max(row.bsa_bound - row.bsa_upper, row.gr_bound - row.gr_ppt);
      ok = ok && gap <= 1e-6;
      if (gap > worst_gap) {
        worst_gap = gap;
        worst = row.family + " bsa " + fmt(row.bsa_bound) + "<=" + fmt(row.bsa_upper) + ", gr " + fmt(row.gr_bound) +
                "<=" + fmt(row.gr_ppt);
      }
    }
    add("soundness-sandwich", ok, "tightest: " + worst);
  }

  {
    double gap = 0.0;
    for (int n : {4, 6}) {
      const auto s = squeezed_state(n, 0.3);
      gap = std::max(gap, max_moment_gap(exact_moments(s), full_tensor_moments(s)));
    }
    add("exact-moments/full-tensor", gap <= 1e-10, "max deviation=" + fmt(gap));

    gap = 0.0;
    for (int n : {4, 6}) {
      const auto s = squeezed_state(n, 0.3);
      for (double p : {0.25, 0.5, 0.75}) {
        gap = std::max(gap, max_moment_gap(split_moments(exact_moments(s), n, {p}), full_tensor_split(s, p)));
      }
    }
    add("split-moments/full-tensor", gap <= 1e-10, "max deviation=" + fmt(gap));
  }

  {
    const auto twisted = oat_evolve(css_x(10), 0.2);
    const double theta = optimal_squeezing_rotation(twisted);
    const double best = exact_moments(rotate_x(twisted, theta)).covariance(2, 2);
    double grid_min = best;
    for (int i = 0; i < 64; ++i) {
      grid_min = std::min(grid_min, exact_moments(rotate_x(twisted, i * std::numbers::pi / 64)).covariance(2, 2));
    }
    add("optimal-rotation/grid", best <= grid_min + 1e-12, "Var(J_z)=" + fmt(best) + " grid min=" + fmt(grid_min));
  }
  return out;
}

}  // namespace entq::verify
