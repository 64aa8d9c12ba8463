#pragma once

namespace layerlab::special {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Riemann zeta for real s > 0, s != 1.
///
/// Evaluated through the alternating Dirichlet eta series accelerated with
/// Borwein's algorithm, so it is valid on (0,1) where the defining series
/// diverges. Absolute accuracy is better than 1e-14 for s in [0.5, 4].
double zeta(double s);

/// Independent Euler-Maclaurin evaluation of zeta, used as a cross-check.
double zeta_euler_maclaurin(double s);

/// Gamma function (negative non-integer arguments allowed).
double gamma(double x);

/// |Gamma(-alpha) cos(pi alpha / 2)| for alpha != 1, pi/2 for alpha == 1.
double stable_constant(double alpha);

/// Test hook: when enabled, zeta() returns a deliberately wrong value so the
/// self-test can demonstrate that it detects a broken centering constant.
void set_zeta_corruption_for_testing(bool on);

}  // namespace layerlab::special
