#pragma once

#include <optional>
#include <string>

#include "entq/criteria.hpp"
#include "entq/moments.hpp"

namespace entq {

enum class Measure { BSA, GR };

std::string_view measure_label(Measure m);

struct BoundDiagnostics {
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool converged = true;
  /// <B> = 0 (or zero mean spin): nothing can be certified, value is 0.
  bool degenerate = false;
  /// B was replaced by -B so that <B> > 0.
  bool offset_flipped = false;
  /// GR only: sum of shifted spectral caps, an upper bound on lambda_max(W)
  /// at the returned shifts (Weyl's inequality).
  double shifted_normalization = 0.0;
  /// GR only: the normalization used is at least shifted_normalization, so
  /// W / normalization provably lies in M_GR. False when the optimal shift
  /// sits away from the spectral center of its observable.
  bool normalization_certified = true;
};

/// A certified lower bound on an entanglement measure, with the parameters
/// that certify it. Re-evaluating the bound expression at `params`
/// (and `g_z`, `g_y` where present) reproduces `value`.
struct BoundResult {
  Measure measure = Measure::BSA;
  double value = 0.0;
  WitnessParams params;
  std::optional<double> g_z;
  std::optional<double> g_y;
  /// Normalization used: n for BSA, m (sum form) or m_t (product form) for GR.
  double normalization = 0.0;
  /// S for sum criteria, U^2 for product criteria.
  double criterion_value = 0.0;
  BoundDiagnostics diagnostics;
};

struct BoundOptions {
  VarianceCap cap = VarianceCap::Sharp;
  /// Relative width at which the t search stops (times the bracket scale).
  double t_rel_tolerance = 1e-12;
};

/// max{0, -S/n}
BoundResult bsa_from_sum(const SumCriterion& c, const FlatMoments& m, const BoundOptions& opts = {});
/// max{0, -S/m}
BoundResult gr_from_sum(const SumCriterion& c, const FlatMoments& m, const BoundOptions& opts = {});

/// max{0, (<B>/n)(1 - U)}, attained at t^2 = Var(O1) / (4 Var(O2)).
BoundResult bsa_from_product(const ProductCriterion& c, const FlatMoments& m, const BoundOptions& opts = {});
/// max over t >= 0 of (4t<B> - Var(O1) - 4t^2 Var(O2)) / m_t, clamped at 0.
BoundResult gr_from_product(const ProductCriterion& c, const FlatMoments& m, const BoundOptions& opts = {});

/// The BSA bound certified by the single tangent t: max{0, -S_t/(4|t| n)}.
double bsa_at(const ProductCriterion& c, const FlatMoments& m, double t, const BoundOptions& opts = {});
/// The GR bound certified by the single tangent t: max{0, -S_t/m_t}.
double gr_at(const ProductCriterion& c, const FlatMoments& m, double t, const BoundOptions& opts = {});

// Wineland spin squeezing --------------------------------------------------------

struct SqueezingParameter {
  double xi2 = 0.0;
  double contrast = 0.0;
  double db = 0.0;
};

/// xi^2 = N Var(J_z)/<J_x>^2, C = <J_x>/(N/2), dB = 10 log10(xi^2).
/// Throws DegenerateCriterion when <J_x> = 0.
SqueezingParameter wineland_xi2(const MomentData& m);

struct WinelandBounds {
  SqueezingParameter squeezing;
  BoundResult bsa;
  BoundResult gr;
  /// C^2 (1 - xi^2) / N, clamped at 0.
  double gr_first_order = 0.0;
  bool degenerate = false;
};

/// Never throws on <J_x> = 0; reports degenerate with zero bounds instead.
WinelandBounds wineland_bounds(const MomentData& m, const BoundOptions& opts = {});

/// Moments holding only what the Wineland criterion reads: <J_x> = C N/2 and
/// Var(J_z). Every other entry is flagged unmeasured.
MomentData wineland_moments(double n_particles, double var_jz, double contrast);
/// Same, with Var(J_z) = xi^2 <J_x>^2 / N.
MomentData wineland_moments_from_xi2(double n_particles, double xi2, double contrast);

// Giovannetti two-ensemble criterion ------------------------------------------------

/// G^2 = Var(g_z J_z^A + J_z^B) Var(g_y J_y^A + J_y^B) / [(|g_z g_y||<J_x^A>| + |<J_x^B>|)^2/4].
double giovannetti_g2(const BipartiteMomentData& m, double g_z, double g_y);

struct GiovannettiOptions {
  /// Multi-start grid: `grid` log-spaced magnitudes in [g_min, g_max] per gain, both signs.
  int grid = 5;
  double g_min = 0.1;
  double g_max = 10.0;
  int max_iterations = 400;
  double size_tolerance = 1e-10;
  BoundOptions bound;
};

struct GiovannettiBounds {
  BoundResult bsa;
  BoundResult gr;
  /// Minimum of G^2 found over the gains, and where.
  double g2_min = 0.0;
  double g2_g_z = 1.0;
  double g2_g_y = 1.0;
};

GiovannettiBounds giovannetti_bounds(const BipartiteMomentData& m, const GiovannettiOptions& opts = {});

/// The bound objectives at fixed gains (used by the optimizer and for auditing).
BoundResult giovannetti_bsa_at(const BipartiteMomentData& m, double g_z, double g_y, const BoundOptions& opts = {});
BoundResult giovannetti_gr_at(const BipartiteMomentData& m, double g_z, double g_y, const BoundOptions& opts = {});

}  // namespace entq
