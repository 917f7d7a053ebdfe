#include "entq/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>
#include <memory>

#include "entq/error.hpp"

namespace entq::optimize {

ScalarResult golden_section_maximize(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                                     int max_iterations) {
  if (!(lo <= hi)) throw InvalidInput("golden section: empty bracket");
  static const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  ScalarResult out;
  out.lo = lo;
  out.hi = hi;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  while (b - a > abs_tol && it < max_iterations) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
    ++it;
  }
  out.iterations = it;
  out.converged = b - a <= abs_tol;
  if (fc >= fd) {
    out.x = c;
    out.value = fc;
  } else {
    out.x = d;
    out.value = fd;
  }
  return out;
}

namespace {

struct Callback {
  const std::function<double(const Eigen::VectorXd&)>* f;
  Eigen::VectorXd scratch;
};

double trampoline(const gsl_vector* v, void* params) {
  auto* cb = static_cast<Callback*>(params);
  for (Eigen::Index i = 0; i < cb->scratch.size(); ++i) cb->scratch(i) = gsl_vector_get(v, static_cast<size_t>(i));
  const double value = (*cb->f)(cb->scratch);
  return std::isfinite(value) ? value : std::numeric_limits<double>::max();
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

gsl_vector* to_gsl(const Eigen::VectorXd& x) {
  gsl_vector* v = gsl_vector_alloc(static_cast<size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) gsl_vector_set(v, static_cast<size_t>(i), x(i));
  return v;
}

}  // namespace

VectorResult nelder_mead_minimize(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                                  const Eigen::VectorXd& step, int max_iterations, double size_tol) {
  if (x0.size() == 0 || x0.size() != step.size()) throw InvalidInput("Nelder-Mead: bad start or step size");
  gsl_set_error_handler_off();
  Callback cb{&f, Eigen::VectorXd(x0.size())};
  gsl_multimin_function fn{&trampoline, static_cast<size_t>(x0.size()), &cb};

  std::unique_ptr<gsl_vector, VectorDeleter> x(to_gsl(x0));
  std::unique_ptr<gsl_vector, VectorDeleter> ss(to_gsl(step));
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, static_cast<size_t>(x0.size())));
  if (gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get()) != GSL_SUCCESS) {
    throw ConvergenceError("Nelder-Mead: could not initialize simplex");
  }

  VectorResult out;
  int status = GSL_CONTINUE;
  int it = 0;
  while (status == GSL_CONTINUE && it < max_iterations) {
    ++it;
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), size_tol);
  }
  out.iterations = it;
  out.converged = status == GSL_SUCCESS;
  out.x.resize(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) out.x(i) = gsl_vector_get(s->x, static_cast<size_t>(i));
  out.value = s->fval;
  return out;
}

}  // namespace entq::optimize
