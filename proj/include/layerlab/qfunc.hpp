#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "layerlab/core.hpp"
#include "layerlab/spherical.hpp"

namespace layerlab {

/// Radial density q(r, xi) of a layered stable Levy measure, with short-time
/// index alpha and long-time index beta.
class LayeredQ {
 public:
  enum class Kind { Canonical, Custom };

  using Density = std::function<double(double r, const Vec& xi)>;
  using Limit = std::function<double(const Vec& xi)>;

  /// q(r) = mass^{-1} (r^{-alpha-1} on (0,1], r^{-beta-1} on (1,inf)).
  static LayeredQ canonical(double alpha, double beta, double mass);

  /// Programmatic density with its limit coefficients c1 (r -> 0) and
  /// c2 (r -> inf). The asymptotics are spot-checked at r = 1e-6 and 1e6
  /// along `probe` directions; pass the atoms of the measure you intend to use.
  static LayeredQ custom(double alpha, double beta, Density q, Limit c1, Limit c2,
                         const std::vector<Vec>& probe);

  /// Built-in smooth family q(r) = mass^{-1} r^{-alpha-1} (1 + r)^{alpha-beta}.
  static LayeredQ smooth(double alpha, double beta, double mass, std::size_t dimension);

  /// `canonical:alpha=..,beta=..[,mass=..]` or `smooth:alpha=..,beta=..[,mass=..]`.
  /// A missing mass defaults to `default_mass`.
  static LayeredQ parse(std::string_view spec, double default_mass, std::size_t dimension);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  /// Normalizing mass m of the canonical density (also used by smooth).
  double mass() const { return mass_; }

  double eval(double r, const Vec& xi) const;
  double c1(const Vec& xi) const;
  double c2(const Vec& xi) const;

  /// Q(r, xi), the integral of q(s, xi) over s in [r, inf).
  double tail_integral(double r, const Vec& xi) const;

  /// Generalized inverse of Q(., xi): inf{r > 0 : Q(r, xi) < u}.
  double inverse_tail(double u, const Vec& xi) const;

  /// Integral of s q(s, xi) over s in [a, 1]; used by the series centering.
  double truncated_first_moment(double a, const Vec& xi) const;

  std::string to_string() const;

 private:
  LayeredQ() = default;

  Kind kind_ = Kind::Canonical;
  double alpha_ = 1.0;
  double beta_ = 1.0;
  double mass_ = 1.0;
  std::string label_;
  Density q_;
  Limit c1_;
  Limit c2_;
};

struct DerivedSphericalPair {
  SphericalMeasure sigma1;
  SphericalMeasure sigma2;
};

/// sigma1 = c1 sigma, sigma2 = c2 sigma.
DerivedSphericalPair derive_sigma_pair(const LayeredQ& q, const SphericalMeasure& sigma);

/// Integral over the sphere of Q(x, xi) sigma(d xi), the Levy measure of
/// {|z| > x}.
double levy_tail_mass(const LayeredQ& q, const SphericalMeasure& sigma, double x);

}  // namespace layerlab
