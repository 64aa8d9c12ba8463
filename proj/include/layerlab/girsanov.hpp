#pragma once

#include <functional>
#include <vector>

#include "layerlab/core.hpp"
#include "layerlab/qfunc.hpp"
#include "layerlab/series.hpp"
#include "layerlab/spherical.hpp"

namespace layerlab {

/// phi(z) = ln(q(|z|, z/|z|) / (c1(z/|z|) |z|^{-alpha-1})).
double phi(const LayeredQ& q, const Vec& z);

struct Compatibility {
  bool compatible = false;
  Vec required;  // the k0 - k1 that makes the two laws equivalent
};

/// Equivalence of LS(sigma, q; k0) and S_alpha(sigma1; k1) on finite horizons.
Compatibility drift_compatibility(const LayeredQ& q, const SphericalMeasure& sigma, const Vec& k0,
                                  const Vec& k1, double tol = 1e-9);

/// (nu_{sigma,q} - nu_{sigma1}^alpha)({|z| > eps}).
double nu_gap(const LayeredQ& q, const SphericalMeasure& sigma, double eps);

/// 1, 1/2, ..., 2^-20.
std::vector<double> default_eps_schedule();

struct UEstimate {
  double value = 0.0;             // at the smallest eps
  double cauchy_increment = 0.0;  // |U(eps_last) - U(eps_prev)|
  std::vector<double> by_eps;
};

/// Jump-sum form of U_t over the jumps of `path` with time <= t.
UEstimate u_from_jumps(const LayeredQ& q, const SphericalMeasure& sigma, const SamplePath& path,
                       double t, const std::vector<double>& eps_schedule = default_eps_schedule());

/// Closed form for the canonical q; `kappa` is the total mass of sigma1.
double u_canonical(double alpha, double beta, double kappa, const SamplePath& path, double t);

enum class USeries { Prime, DoublePrime };

/// U'_t from the arrivals of a stable series, or U''_t from those of the
/// canonical layered series, sharing `draw` with the path being reweighted.
double u_series(const ShotNoiseDraw& draw, double alpha, double beta, double kappa, double t,
                USeries which);

/// Tail nu(-inf, y) (alpha < beta, y < 0) or nu(y, inf) (alpha > beta, y > 0)
/// of the Levy measure of U_1.
double u_levy_tail(double alpha, double beta, double kappa, double y);

enum class MeasureTag { P, Q };

struct WeightedPathSample {
  SamplePath path;
  double log_weight = 0.0;
  MeasureTag tag = MeasureTag::P;
};

struct WeightedValue {
  double value = 0.0;
  double log_weight = 0.0;
  MeasureTag tag = MeasureTag::P;
};

struct WeightedEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t clipped = 0;
};

constexpr double kLogWeightClip = 500.0;

WeightedEstimate reweighted_expectation(const std::vector<WeightedValue>& samples);
WeightedEstimate reweighted_expectation(const std::vector<WeightedPathSample>& samples,
                                        const std::function<double(const SamplePath&)>& f);

struct SingularityWitness {
  std::vector<double> radii;
  std::vector<double> psi;
  int direction = 0;  // +1 diverging to +inf, -1 to -inf
};

/// psi(z) = ln(q / (c2 |z|^{-beta-1})) along `xi` on radii 1, 1e-1, ..., 1e-12.
SingularityWitness singularity_witness(const LayeredQ& q, const Vec& xi);

}  // namespace layerlab
