#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "layerlab/core.hpp"
#include "layerlab/rng.hpp"

namespace layerlab {

/// Finite positive measure on the unit sphere S^{d-1}.
///
/// Either a finite sum of weighted point masses or the rotation-invariant
/// measure with a given total mass. Immutable after construction. The d = 1
/// uniform measure is stored as the two atoms +1 and -1 with equal mass.
class SphericalMeasure {
 public:
  struct Atom {
    Vec direction;
    double weight;
  };

  /// Directions are normalized; zero vectors, nonpositive weights, and
  /// mixed dimensions are rejected.
  static SphericalMeasure discrete(std::vector<Atom> atoms);
  static SphericalMeasure uniform(std::size_t dimension, double total_mass);

  /// `discrete:[(x1,...,xd):w, ...]` or `uniform:d:mass`.
  static SphericalMeasure parse(std::string_view spec);

  std::size_t dimension() const { return dim_; }
  bool is_uniform() const { return uniform_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  double total_mass() const { return mass_; }

  /// Unnormalized first moment, the integral of xi against the measure.
  Vec first_moment() const;

  /// Integral of xi xi' against the measure.
  Matrix second_moment() const;

  /// Atoms closed under xi -> -xi with equal weights, or uniform.
  bool is_symmetric(double tol = 1e-12) const;

  /// Draw from sigma / sigma(S^{d-1}).
  Vec sample_direction(Rng& rng) const;

  /// Same as sample_direction, writing into out[0..d).
  void sample_direction_into(Rng& rng, double* out) const;

  /// Integral of g(<y, xi>) against the measure. Uniform measures use a
  /// polar-angle quadrature of the projection density.
  double integrate_projection(const Vec& y, const std::function<double(double)>& g) const;

  /// The measure c(xi) sigma(d xi). Atoms whose new weight is zero are dropped,
  /// so the result may have zero total mass. For a uniform base c must be
  /// constant (checked on a set of probe directions).
  SphericalMeasure reweighted(const std::function<double(const Vec&)>& c) const;

  std::string to_string() const;

 private:
  SphericalMeasure() = default;
  void finalize();

  std::size_t dim_ = 0;
  bool uniform_ = false;
  double mass_ = 0.0;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
};

/// Deterministic probe directions on S^{d-1} used to check direction
/// independence of user-supplied functions.
std::vector<Vec> probe_directions(std::size_t dimension);

}  // namespace layerlab
