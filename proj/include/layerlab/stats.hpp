#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "layerlab/core.hpp"
#include "layerlab/qfunc.hpp"
#include "layerlab/series.hpp"
#include "layerlab/spherical.hpp"

namespace layerlab {

using Complex = std::complex<double>;

/// Characteristic function of S_alpha(sigma) with Levy-Khintchine drift eta
/// (truncation at |z| <= 1).
Complex stable_cf(double alpha, const SphericalMeasure& sigma, const Vec& eta, const Vec& y);

/// Levy-Khintchine drift of the law S_alpha(sigma; 0) produced by the stable
/// series: tau_alpha = 0 for alpha != 1 and eta = 0 for alpha = 1.
Vec stable_series_eta(double alpha, const SphericalMeasure& sigma);

/// c_{beta,d} for a uniform spectral measure with the given total mass.
double isotropic_constant(double beta, std::size_t d, double mass);
Complex isotropic_stable_cf(double beta, std::size_t d, double mass, const Vec& y);

Complex gaussian_cf(const Matrix& cov, const Vec& y);

/// exp[i<y,eta> + integral of (e^{i<y,z>} - 1 - i<y,z> 1{|z| <= 1}) nu(dz)]
/// for nu(dz) = sigma(d xi) q(r, xi) dr, by radial quadrature per direction.
Complex levy_khintchine_cf(const LayeredQ& q, const SphericalMeasure& sigma, const Vec& eta,
                           const Vec& y);

/// Radial part of the exponent above for a single direction, s = <y, xi>.
Complex radial_exponent(const LayeredQ& q, const Vec& xi, double s);

class CFTarget {
 public:
  using Fn = std::function<Complex(const Vec&)>;
  CFTarget(std::string name, std::size_t dimension, Fn fn)
      : name_(std::move(name)), dim_(dimension), fn_(std::move(fn)) {}

  static CFTarget stable(double alpha, const SphericalMeasure& sigma, const Vec& eta);
  static CFTarget isotropic(double beta, std::size_t d, double mass);
  static CFTarget gaussian(const Matrix& cov);
  static CFTarget layered(const LayeredQ& q, const SphericalMeasure& sigma, const Vec& eta);

  Complex operator()(const Vec& y) const { return fn_(y); }
  const std::string& name() const { return name_; }
  std::size_t dimension() const { return dim_; }

 private:
  std::string name_;
  std::size_t dim_;
  Fn fn_;
};

Complex ecf(const std::vector<Vec>& samples, const Vec& y);

/// 21 points per axis on [-5, 5]; the full tensor grid for d <= 2, the
/// coordinate axes for larger d.
std::vector<Vec> default_cf_grid(std::size_t d);

/// Max over the grid of |ecf(y) - target(y)|.
double cf_distance(const std::vector<Vec>& samples, const CFTarget& target,
                   const std::vector<Vec>& grid);
/// Same against precomputed target values.
double cf_distance(const std::vector<Vec>& samples, const std::vector<Complex>& target_values,
                   const std::vector<Vec>& grid);
/// Max over the grid of |ecf_a(y) - ecf_b(y)|.
double ecf_distance(const std::vector<Vec>& a, const std::vector<Vec>& b,
                    const std::vector<Vec>& grid);

std::vector<Complex> evaluate_target(const CFTarget& target, const std::vector<Vec>& grid);

/// Hill estimator over the k largest values; k = 0 selects floor(sqrt(N)).
double hill_tail_index(std::vector<double> magnitudes, std::size_t k = 0);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap interval of `statistic`.
Interval bootstrap_ci(const std::vector<double>& data,
                      const std::function<double(const std::vector<double>&)>& statistic,
                      std::size_t resamples, double level, std::uint64_t seed);

double empirical_moment(const std::vector<Vec>& samples, double p);

/// Sum of |X_{t_{k+1}} - X_{t_k}|^p over the path grid.
double p_variation(const SamplePath& path, double p);

/// sup |F_n - F| for a sample (sorted in place).
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Two-sample sup |F_n - G_m|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic Kolmogorov p-value of sqrt(n_eff) * D.
double ks_pvalue(double d, double n_eff);

/// Upper tail probability of a chi-square statistic.
double chi_square_pvalue(double statistic, double dof);

double median(std::vector<double> v);
double mean(const std::vector<double>& v);

}  // namespace layerlab
