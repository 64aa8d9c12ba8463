#pragma once

#include <optional>
#include <string>

#include "layerlab/core.hpp"
#include "layerlab/qfunc.hpp"
#include "layerlab/series.hpp"
#include "layerlab/spherical.hpp"

namespace layerlab {

enum class LimitMode { ShortStable, LongStable, LongGaussian };

std::string to_string(LimitMode mode);

struct LimitConstants {
  Vec eta;
  Vec b;
};

/// A scaling-limit scenario. The limit law is S_index(target_sigma; 0) in the
/// stable modes and a centered Gaussian with target_covariance otherwise.
struct LimitSpec {
  LimitMode mode = LimitMode::ShortStable;
  double h = 1.0;
  double index = 1.0;
  Vec eta;
  Vec b;
  std::optional<SphericalMeasure> target_sigma;
  Matrix target_covariance{0};
};

/// Integrals of xi sigma(d xi) against int_0^1 r q(r, xi) dr and
/// int_1^inf r q(r, xi) dr. The first needs alpha < 1, the second beta > 1.
Vec inner_drift_integral(const LayeredQ& q, const SphericalMeasure& sigma);
Vec outer_drift_integral(const LayeredQ& q, const SphericalMeasure& sigma);

LimitConstants short_time_constants(const LayeredQ& q, const SphericalMeasure& sigma);

/// beta in (0,2) gives the stable-limit constants, beta > 2 gives (eta, 0) of
/// the Gaussian limit; beta = 2 is rejected.
LimitConstants long_time_constants(const LayeredQ& q, const SphericalMeasure& sigma);

/// Integral of z z' against the Levy measure; needs beta > 2.
Matrix gaussian_covariance(const LayeredQ& q, const SphericalMeasure& sigma);

LimitSpec short_time_spec(const LayeredQ& q, const SphericalMeasure& sigma, double h);
LimitSpec long_time_spec(const LayeredQ& q, const SphericalMeasure& sigma, double h);

/// h^{-1/index}(x + s eta) -/+ (s/h) b for the value x of the source process
/// at time s = h t.
Vec rescale_value(const Vec& x, double s, const LimitSpec& spec);

/// Maps a path over [0, hT] to the rescaled path over [0, T].
SamplePath rescale_path(const SamplePath& path, const LimitSpec& spec);

}  // namespace layerlab
