#include "entq/bounds.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "entq/error.hpp"
#include "entq/optimize.hpp"

namespace entq {

std::string_view measure_label(Measure m) { return m == Measure::BSA ? "BSA" : "GR"; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Product criterion with <B> >= 0 and its three moment terms.
struct Normalized {
  ProductCriterion c;
  ProductTerms terms;
  bool flipped = false;
};

Normalized normalize(const ProductCriterion& c, const FlatMoments& m) {
  Normalized out{c, product_terms(c, m), false};
  if (out.terms.mean_b < 0.0) {
    out.c = with_flipped_offset(c);
    out.terms.mean_b = -out.terms.mean_b;
    out.flipped = true;
  }
  return out;
}

double tangent_numerator(const ProductTerms& p, double t) {
  return 4.0 * t * p.mean_b - p.var1 - 4.0 * t * t * p.var2;
}

double m_t_of(const ProductCriterion& c, double t, VarianceCap cap) { return *constants(c, t, cap).m_t; }

double bsa_normalization(const ProductCriterion& c) {
  const double n = c.b.bounds.lambda_max;
  if (!(n > 0.0)) throw InvalidInput("lambda_max(B) <= 0: criterion unusable for BSA normalization");
  return n;
}

// max over the spectrum of (lambda - s)^2.
double shifted_cap(const Observable& o, double s) {
  const double half = 0.5 * (o.bounds.lambda_max - o.bounds.lambda_min);
  const double center = 0.5 * (o.bounds.lambda_max + o.bounds.lambda_min);
  const double r = std::abs(s - center) + half;
  return r * r;
}

void certify(BoundResult& r, double shifted) {
  r.diagnostics.shifted_normalization = shifted;
  r.diagnostics.normalization_certified = r.normalization >= shifted * (1.0 - 1e-12);
}

void certify_sum(BoundResult& r, const SumCriterion& c) {
  double shifted = -c.offset.bounds.lambda_min;
  for (std::size_t k = 0; k < c.variance_terms.size(); ++k) shifted += shifted_cap(c.variance_terms[k], r.params.s[k]);
  for (double v : c.constant_variances) shifted += v;
  certify(r, shifted);
}

void certify_product(BoundResult& r, const ProductCriterion& c) {
  const double t = std::abs(r.params.t.value_or(0.0));
  const double weights[2] = {1.0, 4.0 * t * t};
  const VarianceRole* roles[2] = {&c.o1, &c.o2};
  double shifted = -4.0 * t * c.b.bounds.lambda_min;
  std::size_t next = 0;
  for (int k = 0; k < 2; ++k) {
    if (const auto* o = std::get_if<Observable>(roles[k])) {
      shifted += weights[k] * shifted_cap(*o, r.params.s[next++]);
    } else {
      shifted += weights[k] * std::get<ConstantVariance>(*roles[k]).value;
    }
  }
  certify(r, shifted);
}

double product_u2(const ProductTerms& p) {
  return p.mean_b == 0.0 ? kInf : p.var1 * p.var2 / (p.mean_b * p.mean_b);
}

}  // namespace

BoundResult bsa_from_sum(const SumCriterion& c, const FlatMoments& m, const BoundOptions& opts) {
  (void)opts;
  BoundResult r;
  r.measure = Measure::BSA;
  r.criterion_value = sum_value(c, m);
  r.normalization = constants(c).n;
  if (!(r.normalization > 0.0)) throw InvalidInput("n = lambda_max(B) <= 0: criterion unusable for BSA normalization");
  r.params = optimal_shifts(c, m);
  r.value = std::max(0.0, -r.criterion_value / r.normalization);
  return r;
}

BoundResult gr_from_sum(const SumCriterion& c, const FlatMoments& m, const BoundOptions& opts) {
  BoundResult r;
  r.measure = Measure::GR;
  r.criterion_value = sum_value(c, m);
  r.normalization = constants(c, opts.cap).m;
  if (!(r.normalization > 0.0)) throw InvalidInput("m <= 0: criterion unusable for GR normalization");
  r.params = optimal_shifts(c, m);
  r.value = std::max(0.0, -r.criterion_value / r.normalization);
  certify_sum(r, c);
  return r;
}

double bsa_at(const ProductCriterion& c, const FlatMoments& m, double t, const BoundOptions& opts) {
  (void)opts;
  const auto nc = normalize(c, m);
  const auto& p = nc.terms;
  const double n = bsa_normalization(nc.c);
  const double at = std::abs(t);
  if (at == 0.0) return p.var1 == 0.0 ? std::max(0.0, p.mean_b / n) : 0.0;
  if (std::isinf(at)) return p.var2 == 0.0 ? std::max(0.0, p.mean_b / n) : 0.0;
  return std::max(0.0, tangent_numerator(p, at) / (4.0 * at * n));
}

double gr_at(const ProductCriterion& c, const FlatMoments& m, double t, const BoundOptions& opts) {
  const auto nc = normalize(c, m);
  const double at = std::abs(t);
  const double mt = m_t_of(nc.c, at, opts.cap);
  if (!(mt > 0.0)) throw InvalidInput("m_t <= 0: criterion unusable for GR normalization");
  return std::max(0.0, tangent_numerator(nc.terms, at) / mt);
}

BoundResult bsa_from_product(const ProductCriterion& c, const FlatMoments& m, const BoundOptions& opts) {
  (void)opts;
  const auto nc = normalize(c, m);
  const auto& p = nc.terms;
  BoundResult r;
  r.measure = Measure::BSA;
  r.diagnostics.offset_flipped = nc.flipped;
  r.criterion_value = product_u2(p);
  r.normalization = bsa_normalization(nc.c);
  if (p.mean_b == 0.0) {
    r.diagnostics.degenerate = true;
    r.params = optimal_shifts(nc.c, m, 0.0);
    return r;
  }
  const double t = p.var2 > 0.0 ? std::sqrt(p.var1 / (4.0 * p.var2)) : kInf;
  r.params = optimal_shifts(nc.c, m, t);
  const double u = std::sqrt(p.var1 * p.var2) / p.mean_b;
  r.value = std::max(0.0, p.mean_b / r.normalization * (1.0 - u));
  return r;
}

BoundResult gr_from_product(const ProductCriterion& c, const FlatMoments& m, const BoundOptions& opts) {
  const auto nc = normalize(c, m);
  const auto& p = nc.terms;
  BoundResult r;
  r.measure = Measure::GR;
  r.diagnostics.offset_flipped = nc.flipped;
  r.criterion_value = product_u2(p);

  auto ratio = [&](double t) {
    const double mt = m_t_of(nc.c, t, opts.cap);
    if (!(mt > 0.0)) throw InvalidInput("m_t <= 0: criterion unusable for GR normalization");
    return tangent_numerator(p, t) / mt;
  };

  if (p.mean_b == 0.0) {
    r.diagnostics.degenerate = true;
    r.params = optimal_shifts(nc.c, m, 0.0);
    r.normalization = m_t_of(nc.c, 0.0, opts.cap);
    certify_product(r, nc.c);
    return r;
  }

  // The numerator is a concave quadratic in t; it is positive only between its
  // roots t1 < t2, both inside [0, <B>/Var(O2)]. There the ratio with the
  // convex positive m_t is quasi-concave, so golden section is exact.
  const double disc = p.mean_b * p.mean_b - p.var1 * p.var2;
  if (!(disc > 0.0)) {
    const double t = p.var2 > 0.0 ? p.mean_b / (2.0 * p.var2) : 0.0;
    r.params = optimal_shifts(nc.c, m, t);
    r.normalization = m_t_of(nc.c, t, opts.cap);
    r.diagnostics.bracket_hi = p.var2 > 0.0 ? p.mean_b / p.var2 : 0.0;
    certify_product(r, nc.c);
    return r;
  }

  double t1 = 0.0;
  double t2 = 0.0;
  double scale = 0.0;
  const double root = std::sqrt(disc);
  if (p.var2 > 0.0) {
    t1 = p.var1 / (2.0 * (p.mean_b + root));
    t2 = (p.mean_b + root) / (2.0 * p.var2);
    scale = p.mean_b / p.var2;
  } else {
    // Var(O2) = 0: numerator grows linearly, m_t eventually quadratically;
    // cap the bracket where the ratio starts to fall.
    t1 = p.var1 / (4.0 * p.mean_b);
    double hi = std::max(2.0 * t1, 1.0);
    for (int k = 0; k < 200 && ratio(2.0 * hi) > ratio(hi); ++k) hi *= 2.0;
    t2 = 2.0 * hi;
    scale = t2;
  }

  const auto best = optimize::golden_section_maximize(ratio, t1, t2, opts.t_rel_tolerance * scale);
  r.params = optimal_shifts(nc.c, m, best.x);
  r.normalization = m_t_of(nc.c, best.x, opts.cap);
  r.value = std::max(0.0, tangent_numerator(p, best.x) / r.normalization);
  r.diagnostics.iterations = best.iterations;
  r.diagnostics.bracket_lo = t1;
  r.diagnostics.bracket_hi = t2;
  r.diagnostics.converged = best.converged;
  certify_product(r, nc.c);
  return r;
}

// ---------------------------------------------------------------------------
// Wineland

SqueezingParameter wineland_xi2(const MomentData& m) {
  const double jx = m.mean_of(Axis::X);
  const double var = m.variance(Axis::Z);
  if (!(m.n_particles > 0.0)) throw InvalidInput("Wineland parameter needs N > 0");
  if (jx == 0.0) throw DegenerateCriterion("<J_x> = 0: spin-squeezing parameter is undefined");
  SqueezingParameter out;
  out.xi2 = m.n_particles * var / (jx * jx);
  out.contrast = jx / (0.5 * m.n_particles);
  out.db = 10.0 * std::log10(out.xi2);
  return out;
}

WinelandBounds wineland_bounds(const MomentData& m, const BoundOptions& opts) {
  WinelandBounds out;
  const auto c = wineland_criterion(m.n_particles);
  const auto flat = m.flat();
  out.bsa.measure = Measure::BSA;
  out.gr.measure = Measure::GR;
  try {
    out.squeezing = wineland_xi2(m);
  } catch (const DegenerateCriterion&) {
    out.degenerate = true;
    out.squeezing = {kInf, 0.0, kInf};
    out.bsa = bsa_from_product(c, flat, opts);
    out.gr = gr_from_product(c, flat, opts);
    return out;
  }
  out.bsa = bsa_from_product(c, flat, opts);
  out.gr = gr_from_product(c, flat, opts);
  const double contrast = out.squeezing.contrast;
  out.gr_first_order = std::max(0.0, contrast * contrast * (1.0 - out.squeezing.xi2) / m.n_particles);
  return out;
}

MomentData wineland_moments(double n_particles, double var_jz, double contrast) {
  if (!(n_particles > 0.0) || !std::isfinite(n_particles)) throw InvalidInput("N must be positive and finite");
  if (!(var_jz >= 0.0) || !std::isfinite(var_jz)) throw InvalidInput("Var(J_z) must be finite and >= 0");
  if (!std::isfinite(contrast)) throw InvalidInput("contrast must be finite");
  MomentData m;
  m.n_particles = n_particles;
  m.mean(0) = 0.5 * contrast * n_particles;
  m.covariance(2, 2) = var_jz;
  m.unmeasured.setConstant(true);
  m.unmeasured(2, 2) = false;
  m.unmeasured_mean << false, true, true;
  m.validate();
  return m;
}

MomentData wineland_moments_from_xi2(double n_particles, double xi2, double contrast) {
  if (!(xi2 >= 0.0) || !std::isfinite(xi2)) throw InvalidInput("xi^2 must be finite and >= 0");
  if (!(n_particles > 0.0)) throw InvalidInput("N must be positive and finite");
  const double jx = 0.5 * contrast * n_particles;
  return wineland_moments(n_particles, xi2 * jx * jx / n_particles, contrast);
}

// ---------------------------------------------------------------------------
// Giovannetti

double giovannetti_g2(const BipartiteMomentData& m, double g_z, double g_y) {
  return product_value(giovannetti_criterion(m, g_z, g_y), m.flat());
}

BoundResult giovannetti_bsa_at(const BipartiteMomentData& m, double g_z, double g_y, const BoundOptions& opts) {
  auto r = bsa_from_product(giovannetti_criterion(m, g_z, g_y), m.flat(), opts);
  r.g_z = g_z;
  r.g_y = g_y;
  return r;
}

BoundResult giovannetti_gr_at(const BipartiteMomentData& m, double g_z, double g_y, const BoundOptions& opts) {
  auto r = gr_from_product(giovannetti_criterion(m, g_z, g_y), m.flat(), opts);
  r.g_z = g_z;
  r.g_y = g_y;
  return r;
}

namespace {

std::vector<double> start_gains(const GiovannettiOptions& opts) {
  if (opts.grid < 1 || !(opts.g_min > 0.0) || !(opts.g_max >= opts.g_min)) {
    throw InvalidInput("Giovannetti optimizer: need grid >= 1 and 0 < g_min <= g_max");
  }
  std::vector<double> gains;
  for (int k = 0; k < opts.grid; ++k) {
    const double f = opts.grid == 1 ? 0.0 : static_cast<double>(k) / (opts.grid - 1);
    const double g = opts.g_min * std::pow(opts.g_max / opts.g_min, f);
    gains.push_back(g);
    gains.push_back(-g);
  }
  return gains;
}

struct Best {
  Eigen::Vector2d g{1.0, 1.0};
  double value = -kInf;
  int iterations = 0;
  bool converged = false;
};

// Deterministic multi-start: every grid pair seeds a simplex; the first
// strictly better result wins.
template <typename Objective>
Best multistart_minimize(const Objective& objective, const GiovannettiOptions& opts) {
  const auto gains = start_gains(opts);
  Best best;
  best.value = kInf;
  std::function<double(const Eigen::VectorXd&)> f = [&](const Eigen::VectorXd& g) { return objective(g(0), g(1)); };
  for (double gz : gains) {
    for (double gy : gains) {
      Eigen::VectorXd x0(2);
      x0 << gz, gy;
      Eigen::VectorXd step = 0.25 * x0.cwiseAbs();
      const auto res = optimize::nelder_mead_minimize(f, x0, step, opts.max_iterations, opts.size_tolerance);
      best.iterations += res.iterations;
      if (res.value < best.value) {
        best.value = res.value;
        best.g = res.x.head<2>();
        best.converged = res.converged;
      }
    }
  }
  return best;
}

}  // namespace

GiovannettiBounds giovannetti_bounds(const BipartiteMomentData& m, const GiovannettiOptions& opts) {
  // Fail fast on unmeasured entries before the optimizer swallows anything.
  (void)product_terms(giovannetti_criterion(m, 1.0, 1.0), m.flat());

  GiovannettiBounds out;
  const auto bsa_best = multistart_minimize(
      [&](double gz, double gy) { return -giovannetti_bsa_at(m, gz, gy, opts.bound).value; }, opts);
  out.bsa = giovannetti_bsa_at(m, bsa_best.g(0), bsa_best.g(1), opts.bound);
  out.bsa.diagnostics.converged = bsa_best.converged;
  out.bsa.diagnostics.iterations = bsa_best.iterations;

  const auto gr_best = multistart_minimize(
      [&](double gz, double gy) { return -giovannetti_gr_at(m, gz, gy, opts.bound).value; }, opts);
  out.gr = giovannetti_gr_at(m, gr_best.g(0), gr_best.g(1), opts.bound);
  out.gr.diagnostics.converged = gr_best.converged && out.gr.diagnostics.converged;
  out.gr.diagnostics.iterations = gr_best.iterations;

  const auto flat = m.flat();
  const auto g2_best = multistart_minimize(
      [&](double gz, double gy) {
        const auto p = product_terms(giovannetti_criterion(m, gz, gy), flat);
        return p.mean_b == 0.0 ? kInf : p.var1 * p.var2 / (p.mean_b * p.mean_b);
      },
      opts);
  out.g2_g_z = g2_best.g(0);
  out.g2_g_y = g2_best.g(1);
  out.g2_min = giovannetti_g2(m, out.g2_g_z, out.g2_g_y);
  return out;
}

}  // namespace entq
