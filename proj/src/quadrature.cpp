#include "layerlab/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <sstream>

#include "layerlab/core.hpp"

namespace layerlab::quad {

namespace bq = boost::math::quadrature;

namespace {

void check(const char* what, double value, double error, double abs_tol, double rel_tol) {
  if (!std::isfinite(value) || error > std::max(abs_tol, rel_tol * std::fabs(value))) {
    std::ostringstream msg;
    msg << what << ": quadrature did not converge (value " << value << ", error estimate "
        << error << ")";
    throw QuadratureError(msg.str());
  }
}

bq::exp_sinh<double>& exp_sinh_rule() {
  thread_local bq::exp_sinh<double> rule;
  return rule;
}

}  // namespace

double finite(const Integrand& f, double a, double b, double abs_tol, double rel_tol) {
  if (a == b) return 0.0;
  double error = 0.0;
  const double v =
      bq::gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol * 1e-2, &error);
  check("finite", v, error, abs_tol, rel_tol);
  return v;
}

double log_scale(const Integrand& f, double a, double b, double abs_tol, double rel_tol) {
  if (!(a > 0.0)) throw DomainError("log_scale: lower limit must be positive");
  auto g = [&](double u) {
    const double r = std::exp(u);
    return f(r) * r;
  };
  return finite(g, std::log(a), std::log(b), abs_tol, rel_tol);
}

double to_infinity(const Integrand& f, double a, double abs_tol, double rel_tol) {
  if (!(a > 0.0)) throw DomainError("to_infinity: lower limit must be positive");
  const double shift = std::log(a);
  auto g = [&](double v) {
    const double r = std::exp(shift + v);
    if (!std::isfinite(r)) return 0.0;
    const double y = f(r) * r;
    // Far in the tail the integrand may evaluate as inf * 0.
    return std::isfinite(y) || r < 1e100 ? y : 0.0;
  };
  double error = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  const double v = exp_sinh_rule().integrate(g, rel_tol * 1e-2, &error, &l1, &levels);
  check("to_infinity", v, error, abs_tol, rel_tol);
  return v;
}

double from_zero(const Integrand& f, double b, double abs_tol, double rel_tol) {
  if (!(b > 0.0)) throw DomainError("from_zero: upper limit must be positive");
  const double shift = std::log(b);
  auto g = [&](double v) {
    const double r = std::exp(shift - v);
    if (r == 0.0) return 0.0;
    const double y = f(r) * r;
    return std::isfinite(y) || r > 1e-100 ? y : 0.0;
  };
  double error = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  const double v = exp_sinh_rule().integrate(g, rel_tol * 1e-2, &error, &l1, &levels);
  check("from_zero", v, error, abs_tol, rel_tol);
  return v;
}

double fourier_cos(const Integrand& f, double omega, double rel_tol) {
  thread_local bq::ooura_fourier_cos<double> rule(1e-13, 8);
  auto [v, err] = rule.integrate(f, omega);
  check("fourier_cos", v, err, 1e-12, rel_tol);
  return v;
}

double fourier_sin(const Integrand& f, double omega, double rel_tol) {
  thread_local bq::ooura_fourier_sin<double> rule(1e-13, 8);
  auto [v, err] = rule.integrate(f, omega);
  check("fourier_sin", v, err, 1e-12, rel_tol);
  return v;
}

}  // namespace layerlab::quad
