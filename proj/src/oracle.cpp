#include "entq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include "entq/error.hpp"
#include "entq/linalg.hpp"
#include "entq/optimize.hpp"

namespace entq {

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) throw InvalidInput("density matrix must be square");
  const double defect = linalg::hermiticity_defect(entries);
  if (!(defect <= kHermitianTolerance)) {
    throw InvalidInput("density matrix is not Hermitian (defect " + std::to_string(defect) + ")");
  }
  entries_ = 0.5 * (entries + entries.adjoint());
  const double trace = entries_.trace().real();
  if (!(std::abs(trace - 1.0) <= kTraceTolerance)) {
    throw InvalidInput("density matrix trace is " + std::to_string(trace) + ", expected 1");
  }
  const double lmin = linalg::min_eigenvalue(entries_);
  if (lmin < -kEigenvalueTolerance) {
    throw InvalidInput("density matrix has negative eigenvalue " + std::to_string(lmin));
  }
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw InvalidInput("pure state vector is zero");
  const Eigen::VectorXcd v = psi / norm;
  Eigen::MatrixXcd rho = v * v.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  if (dim < 1) throw InvalidInput("dimension must be positive");
  return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

// ---------------------------------------------------------------------------
// Product states

namespace {

Index total_dim(std::span<const Index> dims) {
  if (dims.empty()) throw InvalidInput("no sites given");
  Index total = 1;
  for (Index d : dims) {
    if (d < 1) throw InvalidInput("site dimension must be positive");
    if (total > kMaxTensorDim / d) {
      throw SizeError("tensor dimension exceeds " + std::to_string(kMaxTensorDim));
    }
    total *= d;
  }
  return total;
}

Eigen::VectorXcd random_unit_vector(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  return v.normalized();
}

Eigen::VectorXcd kron_vectors(const std::vector<Eigen::VectorXcd>& locals) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Ones(1);
  for (const auto& l : locals) out = linalg::kron(out, l);
  return out;
}

// Columns span the product states with every site except `site` fixed.
Eigen::MatrixXcd site_embedding(const std::vector<Eigen::VectorXcd>& locals, std::size_t site) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Ones(1, 1);
  for (std::size_t j = 0; j < locals.size(); ++j) {
    if (j == site) {
      out = linalg::kron(out, Eigen::MatrixXcd::Identity(locals[j].size(), locals[j].size()));
    } else {
      out = linalg::kron(out, Eigen::MatrixXcd(locals[j]));
    }
  }
  return out;
}

std::vector<std::uint64_t> start_seeds(std::uint64_t seed, int n) {
  std::mt19937_64 master(seed);
  std::vector<std::uint64_t> out(static_cast<std::size_t>(n));
  for (auto& s : out) s = master();
  return out;
}

// Runs body(i) for i in [0, n) on a small pool; each index is handled by
// exactly one worker, so results depend only on i.
template <typename Body>
void parallel_for(int n, Body&& body) {
  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, std::max(1, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

Eigen::VectorXcd ProductStateSample::vector() const {
  if (locals.empty()) throw InvalidInput("product state has no sites");
  return kron_vectors(locals);
}

std::pair<double, double> ProductStateSample::bloch_angles(std::size_t site) const {
  if (site >= locals.size() || locals[site].size() != 2) throw InvalidInput("Bloch angles need a qubit site");
  const Eigen::VectorXcd v = locals[site].normalized();
  const double theta = 2.0 * std::acos(std::clamp(std::abs(v(0)), 0.0, 1.0));
  double phi = 0.0;
  if (std::abs(v(0)) > 0.0 && std::abs(v(1)) > 0.0) phi = std::arg(v(1)) - std::arg(v(0));
  phi = std::fmod(phi, 2.0 * std::numbers::pi);
  if (phi < 0) phi += 2.0 * std::numbers::pi;
  return {theta, phi};
}

ProductStateSample ProductStateSample::random(std::span<const Index> dims, std::uint64_t seed) {
  total_dim(dims);
  std::mt19937_64 rng(seed);
  ProductStateSample out;
  for (Index d : dims) out.locals.push_back(random_unit_vector(d, rng));
  return out;
}

ProductMinimum min_over_product_states(const HermitianOperator& w, std::span<const Index> dims, int n_starts,
                                       std::uint64_t seed) {
  const Index total = total_dim(dims);
  if (w.dim() != total) throw InvalidInput("operator dimension does not match the site dimensions");
  if (n_starts < 1) throw InvalidInput("need at least one start");
  constexpr int kMaxSweeps = 1000;
  constexpr double kStall = 1e-12;

  const auto seeds = start_seeds(seed, n_starts);
  std::vector<ProductMinimum> results(static_cast<std::size_t>(n_starts));
  parallel_for(n_starts, [&](int i) {
    ProductStateSample state = ProductStateSample::random(dims, seeds[static_cast<std::size_t>(i)]);
    double value = w.expectation(state.vector());
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      const double before = value;
      for (std::size_t site = 0; site < state.locals.size(); ++site) {
        const Eigen::MatrixXcd m = site_embedding(state.locals, site);
        Eigen::MatrixXcd local = m.adjoint() * (w.matrix() * m);
        local = 0.5 * (local + local.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(local);
        state.locals[site] = es.eigenvectors().col(0).normalized();
        value = es.eigenvalues()(0);
      }
      if (before - value < kStall) break;
    }
    results[static_cast<std::size_t>(i)] = {value, std::move(state), 1};
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].value < results[best].value) best = i;
  }
  ProductMinimum out = std::move(results[best]);
  out.starts = n_starts;
  return out;
}

// ---------------------------------------------------------------------------
// Membership

double membership_margin(const HermitianOperator& w, double c, const HermitianOperator& k, MembershipSign sign) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("membership constant must be positive and finite");
  if (w.dim() != k.dim()) throw InvalidInput("W and K differ in dimension");
  const double s = sign == MembershipSign::Plus ? 1.0 : -1.0;
  return linalg::min_eigenvalue(Eigen::MatrixXcd(k.matrix() + (s / c) * w.matrix()));
}

bool membership_check(const HermitianOperator& w, double c, const HermitianOperator& k, MembershipSign sign) {
  return membership_margin(w, c, k, sign) >= -1e-9;
}

bool membership_check(const HermitianOperator& w, double c, MembershipSign sign) {
  return membership_check(w, c, HermitianOperator::identity(w.dim()), sign);
}

// ---------------------------------------------------------------------------
// PPT robustness

namespace {

void check_bipartition(const DensityMatrix& rho, Index dim_a, Index dim_b) {
  if (dim_a < 1 || dim_b < 1 || dim_a * dim_b != rho.dim()) {
    throw InvalidInput("bipartition " + std::to_string(dim_a) + "x" + std::to_string(dim_b) +
                       " does not match density matrix dimension " + std::to_string(rho.dim()));
  }
}

// Euclidean projection of a vector onto {x >= 0, sum x = s}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double s) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumsum += u[i];
    const double candidate = (cumsum - s) / static_cast<double>(i + 1);
    if (u[i] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).cwiseMax(0.0);
}

Eigen::MatrixXcd project_trace_psd(const Eigen::MatrixXcd& m, double s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd lam = project_simplex(es.eigenvalues(), s);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

PptRobustness gr_ppt(const DensityMatrix& rho, Index dim_a, Index dim_b, const PptOptions& opts) {
  check_bipartition(rho, dim_a, dim_b);
  if (!(opts.penalty > 0.0) || !(opts.tolerance > 0.0) || opts.max_iterations < 1) {
    throw InvalidInput("invalid PPT solver options");
  }
  const Index dim = rho.dim();
  const Eigen::MatrixXcd& r = rho.matrix();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
  auto pt = [&](const Eigen::MatrixXcd& m) { return linalg::partial_transpose_second(m, dim_a, dim_b); };

  if (linalg::min_eigenvalue(pt(r)) >= 0.0) return {0.0, 0, 0.0};

  // Splitting X = Z^T_B - rho with X >= 0 and Z >= 0; u is the scaled dual.
  double penalty = opts.penalty;
  Eigen::MatrixXcd z = linalg::project_psd(pt(r));
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
  double primal = std::numeric_limits<double>::infinity();
  double dual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iterations; ++it) {
    x = linalg::project_psd(Eigen::MatrixXcd(pt(z) - r - u - id / penalty));
    const Eigen::MatrixXcd z_prev = z;
    z = linalg::project_psd(pt(Eigen::MatrixXcd(x + r + u)));
    const Eigen::MatrixXcd gap = x - pt(z) + r;
    u += gap;
    primal = gap.norm();
    dual = penalty * (z - z_prev).norm();
    if (primal <= opts.tolerance && dual <= opts.tolerance) {
      return {x.trace().real(), it, std::max(primal, dual)};
    }
    if (it % 50 == 0) {
      if (primal > 10.0 * dual) {
        penalty *= 2.0;
        u /= 2.0;
      } else if (dual > 10.0 * primal) {
        penalty /= 2.0;
        u *= 2.0;
      }
    }
  }
  throw ConvergenceError("PPT robustness did not converge after " + std::to_string(opts.max_iterations) +
                         " iterations (residual " + std::to_string(std::max(primal, dual)) + ")");
}

double gr_ppt_bisection(const DensityMatrix& rho, Index dim_a, Index dim_b, double tolerance) {
  check_bipartition(rho, dim_a, dim_b);
  if (!(tolerance > 0.0)) throw InvalidInput("bisection tolerance must be positive");
  const Index dim = rho.dim();
  const Eigen::MatrixXcd& r = rho.matrix();
  auto pt = [&](const Eigen::MatrixXcd& m) { return linalg::partial_transpose_second(m, dim_a, dim_b); };

  const double lmin = linalg::min_eigenvalue(pt(r));
  if (lmin >= 0.0) return 0.0;

  constexpr double kMeet = 1e-11;
  constexpr int kMaxIterations = 200000;
  auto feasible = [&](double s) {
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(dim, dim) * (s / static_cast<double>(dim));
    double checkpoint = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= kMaxIterations; ++it) {
      const Eigen::MatrixXcd y = pt(linalg::project_psd(pt(Eigen::MatrixXcd(r + x)))) - r;
      x = project_trace_psd(y, s);
      const double dist = (y - x).norm();
      if (dist <= kMeet) return true;
      if (it % 500 == 0) {
        // Distances between the iterates decrease monotonically; a stalled
        // positive distance means the sets are apart.
        if (checkpoint - dist < 1e-4 * dist) return false;
        checkpoint = dist;
      }
    }
    return false;
  };

  double lo = 0.0;
  double hi = static_cast<double>(dim) * -lmin;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Best separable approximation, upper bound

Eigen::MatrixXcd reduced_state(const Eigen::MatrixXcd& rho, std::span<const Index> dims, std::size_t site) {
  const Index total = total_dim(dims);
  if (rho.rows() != total || rho.cols() != total) throw InvalidInput("state does not match the site dimensions");
  if (site >= dims.size()) throw InvalidInput("site index out of range");
  Index before = 1;
  for (std::size_t j = 0; j < site; ++j) before *= dims[j];
  const Index d = dims[site];
  const Index after = total / (before * d);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (Index a = 0; a < before; ++a) {
    for (Index c = 0; c < after; ++c) {
      for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
          out(i, j) += rho((a * d + i) * after + c, (a * d + j) * after + c);
        }
      }
    }
  }
  return out;
}

namespace {

struct ProductMixture {
  std::vector<Index> dims;
  int terms = 0;

  Index site_params() const { return 2 * std::accumulate(dims.begin(), dims.end(), Index{0}); }
  Index size() const { return terms * (site_params() + 1); }

  Eigen::MatrixXcd sigma(const Eigen::VectorXd& x) const {
    const Index total = std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(total, total);
    const Index per = site_params() + 1;
    Eigen::VectorXd logits(terms);
    for (int i = 0; i < terms; ++i) logits(i) = x(i * per + per - 1);
    const Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp();
    const double wsum = w.sum();
    for (int i = 0; i < terms; ++i) {
      std::vector<Eigen::VectorXcd> locals;
      Index offset = i * per;
      bool degenerate = false;
      for (Index d : dims) {
        Eigen::VectorXcd v(d);
        for (Index k = 0; k < d; ++k) v(k) = Complex(x(offset + 2 * k), x(offset + 2 * k + 1));
        offset += 2 * d;
        const double norm = v.norm();
        if (!(norm > 1e-150)) degenerate = true;
        locals.push_back(degenerate ? v : Eigen::VectorXcd(v / norm));
      }
      if (degenerate) continue;
      const Eigen::VectorXcd p = kron_vectors(locals);
      out += (w(i) / wsum) * (p * p.adjoint());
    }
    return out;
  }

  Eigen::VectorXd encode(const std::vector<std::vector<Eigen::VectorXcd>>& locals,
                         const std::vector<double>& logits) const {
    Eigen::VectorXd x(size());
    const Index per = site_params() + 1;
    for (int i = 0; i < terms; ++i) {
      Index offset = i * per;
      for (const auto& v : locals[static_cast<std::size_t>(i)]) {
        for (Index k = 0; k < v.size(); ++k) {
          x(offset + 2 * k) = v(k).real();
          x(offset + 2 * k + 1) = v(k).imag();
        }
        offset += 2 * v.size();
      }
      x(i * per + per - 1) = logits[static_cast<std::size_t>(i)];
    }
    return x;
  }
};

// Largest lambda in [0, 1] with rho - lambda sigma >= 0, by bisection on the
// sign of the smallest eigenvalue (tested with a Cholesky factorization).
double separable_weight(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& sigma) {
  const Index dim = rho.rows();
  const Eigen::MatrixXcd slack = 1e-12 * Eigen::MatrixXcd::Identity(dim, dim);
  auto feasible = [&](double lambda) {
    Eigen::LLT<Eigen::MatrixXcd> llt(rho - lambda * sigma + slack);
    return llt.info() == Eigen::Success;
  };
  if (feasible(1.0)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 44; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

double bsa_upper(const DensityMatrix& rho, std::span<const Index> dims, int n_products, std::uint64_t seed,
                 const BsaSearchOptions& opts) {
  const Index total = total_dim(dims);
  if (rho.dim() != total) throw InvalidInput("state does not match the site dimensions");
  if (n_products < 1 || n_products > 16) throw InvalidInput("number of product terms must be in [1, 16]");
  if (opts.random_starts < 0 || opts.max_iterations < 1) throw InvalidInput("invalid search options");

  const ProductMixture mix{std::vector<Index>(dims.begin(), dims.end()), n_products};
  const Eigen::MatrixXcd& r = rho.matrix();
  auto objective = [&](const Eigen::VectorXd& x) { return -separable_weight(r, mix.sigma(x)); };

  std::vector<Eigen::VectorXd> starts;
  {
    // Products of eigenvectors of the single-site reduced states, heaviest first.
    std::vector<Eigen::MatrixXcd> vecs;
    std::vector<Eigen::VectorXd> vals;
    for (std::size_t j = 0; j < dims.size(); ++j) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(reduced_state(r, dims, j));
      vecs.push_back(es.eigenvectors().rowwise().reverse());
      vals.push_back(es.eigenvalues().reverse().cwiseMax(0.0));
    }
    std::vector<std::pair<double, std::vector<Index>>> combos;
    for (Index c = 0; c < total; ++c) {
      std::vector<Index> choice(dims.size());
      Index rest = c;
      double weight = 1.0;
      for (std::size_t j = dims.size(); j-- > 0;) {
        choice[j] = rest % dims[j];
        rest /= dims[j];
        weight *= vals[j](choice[j]);
      }
      combos.emplace_back(weight, std::move(choice));
    }
    std::stable_sort(combos.begin(), combos.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::vector<Eigen::VectorXcd>> locals;
    std::vector<double> logits;
    for (int i = 0; i < n_products; ++i) {
      const auto& [weight, choice] = combos[static_cast<std::size_t>(i) % combos.size()];
      std::vector<Eigen::VectorXcd> term;
      for (std::size_t j = 0; j < dims.size(); ++j) term.emplace_back(vecs[j].col(choice[j]));
      locals.push_back(std::move(term));
      logits.push_back(i < static_cast<int>(combos.size()) ? std::log(std::max(weight, 1e-8)) : -20.0);
    }
    starts.push_back(mix.encode(locals, logits));
  }
  for (const auto s : start_seeds(seed, opts.random_starts)) {
    std::mt19937_64 rng(s);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd x(mix.size());
    for (Index i = 0; i < x.size(); ++i) x(i) = gauss(rng);
    starts.push_back(x);
  }

  std::vector<double> best(starts.size(), 0.0);
  parallel_for(static_cast<int>(starts.size()), [&](int i) {
    const auto& x0 = starts[static_cast<std::size_t>(i)];
    const double initial = objective(x0);
    const auto res = optimize::nelder_mead_minimize(objective, x0, Eigen::VectorXd::Constant(x0.size(), 0.25),
                                                    opts.max_iterations, 1e-10);
    best[static_cast<std::size_t>(i)] = std::min(initial, res.value);
  });
  const double lambda = -*std::min_element(best.begin(), best.end());
  return std::clamp(1.0 - lambda, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Moments of explicit states

FlatMoments density_moments(const DensityMatrix& rho, const ComponentOperators& components) {
  const Index k = static_cast<Index>(components.size());
  FlatMoments out;
  out.mean.resize(k);
  out.covariance.resize(k, k);
  out.unmeasured = BoolMatrix::Constant(k, k, false);
  out.unmeasured_mean = BoolVector::Constant(k, false);
  for (Index a = 0; a < k; ++a) {
    if (components[static_cast<std::size_t>(a)].dim() != rho.dim()) {
      throw InvalidInput("component operator dimension does not match the state");
    }
    out.mean(a) = rho.expectation(components[static_cast<std::size_t>(a)]);
  }
  for (Index a = 0; a < k; ++a) {
    for (Index b = a; b < k; ++b) {
      const Eigen::MatrixXcd prod =
          components[static_cast<std::size_t>(a)].matrix() * components[static_cast<std::size_t>(b)].matrix();
      const double second = (rho.matrix() * prod).trace().real();
      out.covariance(a, b) = out.covariance(b, a) = second - out.mean(a) * out.mean(b);
    }
  }
  return out;
}

MomentData single_moments(const DensityMatrix& rho, const ComponentOperators& components, double n_particles) {
  if (components.size() != 3) throw InvalidInput("expected three component operators");
  const FlatMoments f = density_moments(rho, components);
  MomentData out;
  out.n_particles = n_particles;
  out.mean = f.mean;
  out.covariance = f.covariance;
  return out;
}

BipartiteMomentData bipartite_moments(const DensityMatrix& rho, const ComponentOperators& components, double n_a,
                                      double n_b) {
  if (components.size() != 6) throw InvalidInput("expected six component operators");
  const FlatMoments f = density_moments(rho, components);
  BipartiteMomentData out;
  out.n_A = n_a;
  out.n_B = n_b;
  out.mean_A = f.mean.head<3>();
  out.mean_B = f.mean.tail<3>();
  out.covariance = f.covariance;
  return out;
}

}  // namespace entq
