#pragma once

#include <Eigen/Dense>

#include <functional>

namespace entq::optimize {

struct ScalarResult {
  double x = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double lo = 0.0;  // initial bracket
  double hi = 0.0;
};

/// Golden-section maximization of a unimodal f on [lo, hi], stopping once the
/// bracket is narrower than abs_tol. Ties keep the left part, so equal values
/// resolve toward smaller x. Deterministic.
ScalarResult golden_section_maximize(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                                     int max_iterations = 400);

struct VectorResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex minimization (GSL nmsimplex2) from x0 with initial
/// step sizes `step`. Converged when the simplex size drops below size_tol.
VectorResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& step, int max_iterations, double size_tol);

}  // namespace entq::optimize
