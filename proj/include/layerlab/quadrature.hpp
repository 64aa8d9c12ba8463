#pragma once

#include <functional>

namespace layerlab::quad {

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on [a, b]. Throws QuadratureError when the error
/// estimate exceeds max(abs_tol, rel_tol * |result|).
double finite(const Integrand& f, double a, double b, double abs_tol = 1e-12,
              double rel_tol = 1e-12);

/// Integral over [a, b] with 0 < a < b after the substitution r = e^u.
/// Suited to power-law integrands spanning many decades.
double log_scale(const Integrand& f, double a, double b, double abs_tol = 1e-12,
                 double rel_tol = 1e-12);

/// Integral over [a, inf), a > 0, via r = e^u and double-exponential rules.
double to_infinity(const Integrand& f, double a, double abs_tol = 1e-12,
                   double rel_tol = 1e-12);

/// Integral over (0, b] via r = e^u; the integrand may blow up at 0 as long
/// as it stays integrable.
double from_zero(const Integrand& f, double b, double abs_tol = 1e-12, double rel_tol = 1e-12);

/// int_0^inf f(x) cos(omega x) dx and int_0^inf f(x) sin(omega x) dx for
/// omega > 0 and slowly decaying f (Ooura's double-exponential method).
double fourier_cos(const Integrand& f, double omega, double rel_tol = 1e-11);
double fourier_sin(const Integrand& f, double omega, double rel_tol = 1e-11);

}  // namespace layerlab::quad
