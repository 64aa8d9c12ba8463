#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "layerlab/core.hpp"
#include "layerlab/qfunc.hpp"
#include "layerlab/rng.hpp"
#include "layerlab/spherical.hpp"

namespace layerlab {

/// Distribution phi of the stability index of a mixed stable process.
/// Either finitely many values in (0,2) with weights, or uniform on [a,b]
/// with 0 < a < b < 2.
class MixingLaw {
 public:
  static MixingLaw discrete(std::vector<double> values, std::vector<double> weights);
  static MixingLaw uniform(double a, double b);
  static MixingLaw point(double alpha) { return discrete({alpha}, {1.0}); }
  /// `discrete:a1:w1,a2:w2,...` or `uniform:a:b`.
  static MixingLaw parse(std::string_view spec);

  double sample(Rng& rng) const;
  /// Expectation of f(alpha) under phi.
  double expect(const std::function<double(double)>& f) const;
  bool is_uniform() const { return uniform_; }
  const std::vector<double>& values() const { return values_; }
  std::string to_string() const;

 private:
  MixingLaw() = default;
  bool uniform_ = false;
  double a_ = 0.0, b_ = 0.0;
  std::vector<double> values_, weights_, cumulative_;
};

struct DrawOptions {
  bool rejects = false;
  std::optional<MixingLaw> mix;
};

/// One realization of {Gamma_i}, {T_i}, {V_i} and the optional {U_i},
/// {alpha_i}, truncated at Gamma_i <= gamma_cap * T.
struct ShotNoiseDraw {
  double horizon = 1.0;
  double gamma_cap = 0.0;
  std::size_t dimension = 1;
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
  Vec gammas;
  Vec times;
  Vec directions;  // flat, size() * dimension
  Vec rejects;
  Vec alphas;

  std::size_t size() const { return gammas.size(); }
  const double* direction(std::size_t i) const { return directions.data() + i * dimension; }
};

ShotNoiseDraw draw_shot_noise(std::uint64_t seed, std::uint64_t path, double horizon,
                              const SphericalMeasure& sigma, double gamma_cap,
                              const DrawOptions& options = {});

/// Per-term jump magnitudes of a truncated series (0 drops the term), the
/// deterministic drift per unit time, and an optional Gaussian covariance per
/// unit time standing in for the discarded small jumps.
struct SeriesTerms {
  Vec magnitude;
  Vec drift;
  Matrix diffusion{0};
  double largest_discarded = 0.0;
};

/// Shared by the stable and mixed series so the two agree bit for bit.
inline double stable_magnitude(double alpha, double gamma, double mass_times_t) {
  return std::pow(alpha * gamma / mass_times_t, -1.0 / alpha);
}

/// Centering constant b_T of the stable series.
double stable_bt(double alpha, double mass_times_t);

SeriesTerms stable_terms(double alpha, const SphericalMeasure& sigma, const ShotNoiseDraw& draw);
SeriesTerms layered_general_terms(const LayeredQ& q, const SphericalMeasure& sigma,
                                  const ShotNoiseDraw& draw);
/// Closed-form series of the canonical q; the printed centering b_i.
SeriesTerms layered_canonical_terms(const LayeredQ& q, const SphericalMeasure& sigma,
                                    const ShotNoiseDraw& draw);

enum class RejectionBase { Inner, Outer };
SeriesTerms layered_rejection_terms(const LayeredQ& q, const SphericalMeasure& sigma,
                                    const ShotNoiseDraw& draw, RejectionBase base);
SeriesTerms mixed_terms(const SphericalMeasure& sigma, const ShotNoiseDraw& draw);

/// Gaussian covariance per unit time of the jumps of q smaller than eps.
Matrix small_jump_covariance(const LayeredQ& q, const SphericalMeasure& sigma, double eps);
/// Same for the stable Levy measure with spherical part sigma.
Matrix small_jump_covariance(double alpha, const SphericalMeasure& sigma, double eps);

/// Adds the Gaussian approximation of the truncated jumps to `terms`
/// (symmetric sigma only).
void add_stable_residual(SeriesTerms& terms, double alpha, const SphericalMeasure& sigma);
void add_layered_residual(SeriesTerms& terms, const LayeredQ& q, const SphericalMeasure& sigma);

class SamplePath {
 public:
  std::size_t dimension() const { return dim_; }
  double horizon() const { return horizon_; }
  const Vec& grid() const { return grid_; }
  /// Value at grid point k, a view into d consecutive doubles.
  const double* value(std::size_t k) const { return values_.data() + k * dim_; }
  Vec value_vec(std::size_t k) const { return Vec(value(k), value(k) + dim_); }
  Vec terminal() const { return value_vec(grid_.size() - 1); }

  std::size_t jump_count() const { return jump_times_.size(); }
  double jump_time(std::size_t j) const { return jump_times_[j]; }
  const double* jump(std::size_t j) const { return jumps_.data() + j * dim_; }
  std::size_t jump_term(std::size_t j) const { return jump_terms_[j]; }
  const Vec& drift_per_time() const { return drift_; }

  /// Drift plus retained jumps with time <= t, excluding any Gaussian part.
  Vec jump_part(double t) const;

  /// Exact supremum of the Euclidean norm over [0, horizon]; jump paths only.
  double sup_norm() const;

  bool has_gaussian_part() const { return has_gaussian_; }

  /// Builds a path from raw parts; values are recomputed from the jumps.
  static SamplePath build(std::size_t dim, double horizon, Vec grid, Vec jump_times, Vec jumps,
                          std::vector<std::size_t> jump_terms, Vec drift,
                          const Vec* gaussian_values = nullptr);
  /// Path with prescribed grid values and no jump record.
  static SamplePath from_values(std::size_t dim, double horizon, Vec grid, Vec values);

 private:
  std::size_t dim_ = 1;
  double horizon_ = 1.0;
  bool has_gaussian_ = false;
  Vec grid_;
  Vec values_;
  Vec jump_times_;
  Vec jumps_;
  std::vector<std::size_t> jump_terms_;
  Vec drift_;
};

/// Uniform grid of n intervals on [0, T].
Vec uniform_grid(double horizon, std::size_t n);

SamplePath build_path(const ShotNoiseDraw& draw, const SeriesTerms& terms, const Vec& grid);

/// X_t without building a path; t defaults to the horizon. A Gaussian part is
/// drawn as a single increment over [0, t], so it differs from the value of
/// build_path on a finer grid with the same seed.
Vec terminal_value(const ShotNoiseDraw& draw, const SeriesTerms& terms,
                   std::optional<double> t = std::nullopt);

SamplePath stable_path(double alpha, const SphericalMeasure& sigma, const ShotNoiseDraw& draw,
                       const Vec& grid);
SamplePath layered_path_general(const LayeredQ& q, const SphericalMeasure& sigma,
                                const ShotNoiseDraw& draw, const Vec& grid);
SamplePath layered_path_canonical(const LayeredQ& q, const SphericalMeasure& sigma,
                                  const ShotNoiseDraw& draw, const Vec& grid);
SamplePath layered_path_rejection(const LayeredQ& q, const SphericalMeasure& sigma,
                                  const ShotNoiseDraw& draw, RejectionBase base, const Vec& grid);
SamplePath mixed_path(const SphericalMeasure& sigma, const ShotNoiseDraw& draw, const Vec& grid);

/// Worker count from LAYERLAB_THREADS, else the hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on worker_count() threads. Callers write into
/// per-index slots so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace layerlab
