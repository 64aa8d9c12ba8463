#include "layerlab/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "layerlab/quadrature.hpp"
#include "layerlab/special.hpp"

namespace layerlab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAbsTol = 1e-11;
constexpr double kRelTol = 1e-10;

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

// sin(x) - x without cancellation for small x.
double sin_minus_id(double x) {
  if (std::fabs(x) < 1e-3) {
    const double x2 = x * x;
    return x * x2 * (-1.0 / 6.0 + x2 / 120.0);
  }
  return std::sin(x) - x;
}

}  // namespace

Complex stable_cf(double alpha, const SphericalMeasure& sigma, const Vec& eta, const Vec& y) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0, 2)");
  if (y.size() != sigma.dimension() || eta.size() != sigma.dimension())
    throw DomainError("stable_cf: dimension mismatch");
  const double c = special::stable_constant(alpha);
  const Vec m1 = sigma.first_moment();
  Vec tau = eta;
  const double shift = alpha == 1.0 ? special::kEulerGamma - 1.0 : 1.0 / (1.0 - alpha);
  for (std::size_t k = 0; k < tau.size(); ++k) tau[k] -= shift * m1[k];

  double re = 0.0, im = 0.0;
  if (sigma.is_uniform()) {
    re = sigma.integrate_projection(y, [&](double u) { return std::pow(std::fabs(u), alpha); });
  } else {
    const double tan_term = alpha == 1.0 ? 0.0 : std::tan(kPi * alpha / 2.0);
    for (const auto& atom : sigma.atoms()) {
      const double u = dot(y, atom.direction);
      if (u == 0.0) continue;
      const double au = std::fabs(u);
      if (alpha == 1.0) {
        re += atom.weight * au;
        im += atom.weight * (2.0 / kPi) * u * std::log(au);
      } else {
        const double p = std::pow(au, alpha);
        re += atom.weight * p;
        im -= atom.weight * p * tan_term * sgn(u);
      }
    }
  }
  return std::exp(Complex(-c * re, dot(y, tau) - c * im));
}

Vec stable_series_eta(double alpha, const SphericalMeasure& sigma) {
  if (alpha == 1.0) return Vec(sigma.dimension(), 0.0);
  return scaled(sigma.first_moment(), 1.0 / (1.0 - alpha));
}

double isotropic_constant(double beta, std::size_t d, double mass) {
  if (!(beta > 0.0 && beta < 2.0)) throw DomainError("beta must lie in (0, 2)");
  const double k = static_cast<double>(d);
  return std::tgamma(k / 2.0) * std::tgamma((2.0 - beta) / 2.0) /
         (std::pow(2.0, beta) * beta * std::tgamma((beta + k) / 2.0)) * mass;
}

Complex isotropic_stable_cf(double beta, std::size_t d, double mass, const Vec& y) {
  return std::exp(-isotropic_constant(beta, d, mass) * std::pow(norm(y), beta));
}

Complex gaussian_cf(const Matrix& cov, const Vec& y) {
  if (cov.n != y.size()) throw DomainError("gaussian_cf: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < cov.n; ++i)
    for (std::size_t j = 0; j < cov.n; ++j) s += y[i] * cov(i, j) * y[j];
  return std::exp(-0.5 * s);
}

Complex radial_exponent(const LayeredQ& q, const Vec& xi, double s) {
  if (s == 0.0) return 0.0;
  const double w = std::fabs(s);
  const double sg = sgn(s);
  const double period = kPi / w;
  auto qf = [&](double r) { return q.eval(r, xi); };
  auto re_f = [&](double r) {
    const double h = std::sin(w * r / 2.0);
    return -2.0 * h * h * qf(r);
  };
  auto im_small = [&](double r) { return sin_minus_id(w * r) * qf(r); };
  auto im_large = [&](double r) { return std::sin(w * r) * qf(r); };

  double re = 0.0, im = 0.0;
  const double first = std::min(1.0, period);
  re += quad::from_zero(re_f, first, kAbsTol, kRelTol);
  im += quad::from_zero(im_small, first, kAbsTol, kRelTol);
  if (period < 1.0) {
    re += quad::finite(re_f, period, 1.0, kAbsTol, kRelTol);
    im += quad::finite(im_small, period, 1.0, kAbsTol, kRelTol);
  }
  const double start = std::max(1.0, period);
  if (start > 1.0) {
    re += quad::log_scale(re_f, 1.0, start, kAbsTol, kRelTol);
    im += quad::log_scale(im_large, 1.0, start, kAbsTol, kRelTol);
  }
  auto shifted = [&](double x) { return qf(start + x); };
  const double c = quad::fourier_cos(shifted, w, kRelTol);
  const double sn = quad::fourier_sin(shifted, w, kRelTol);
  const double ca = std::cos(w * start), sa = std::sin(w * start);
  re += ca * c - sa * sn - q.tail_integral(start, xi);
  im += sa * c + ca * sn;
  return Complex(re, sg * im);
}

Complex levy_khintchine_cf(const LayeredQ& q, const SphericalMeasure& sigma, const Vec& eta,
                           const Vec& y) {
  if (y.size() != sigma.dimension() || eta.size() != sigma.dimension())
    throw DomainError("levy_khintchine_cf: dimension mismatch");
  Complex e(0.0, dot(y, eta));
  if (sigma.is_uniform()) {
    const Vec xi = probe_directions(sigma.dimension()).front();
    e += sigma.integrate_projection(y, [&](double s) { return radial_exponent(q, xi, s).real(); });
  } else {
    for (const auto& atom : sigma.atoms())
      e += atom.weight * radial_exponent(q, atom.direction, dot(y, atom.direction));
  }
  return std::exp(e);
}

CFTarget CFTarget::stable(double alpha, const SphericalMeasure& sigma, const Vec& eta) {
  return CFTarget("stable", sigma.dimension(),
                  [=](const Vec& y) { return stable_cf(alpha, sigma, eta, y); });
}

CFTarget CFTarget::isotropic(double beta, std::size_t d, double mass) {
  return CFTarget("isotropic-stable", d,
                  [=](const Vec& y) { return isotropic_stable_cf(beta, d, mass, y); });
}

CFTarget CFTarget::gaussian(const Matrix& cov) {
  return CFTarget("gaussian", cov.n, [=](const Vec& y) { return gaussian_cf(cov, y); });
}

CFTarget CFTarget::layered(const LayeredQ& q, const SphericalMeasure& sigma, const Vec& eta) {
  return CFTarget("levy-khintchine", sigma.dimension(),
                  [=](const Vec& y) { return levy_khintchine_cf(q, sigma, eta, y); });
}

Complex ecf(const std::vector<Vec>& samples, const Vec& y) {
  if (samples.empty()) throw DomainError("ecf: no samples");
  double re = 0.0, im = 0.0;
  for (const auto& x : samples) {
    const double a = dot(y, x);
    re += std::cos(a);
    im += std::sin(a);
  }
  const double n = static_cast<double>(samples.size());
  return Complex(re / n, im / n);
}

std::vector<Vec> default_cf_grid(std::size_t d) {
  if (d == 0) throw DomainError("grid dimension must be positive");
  Vec axis;
  for (int k = -10; k <= 10; ++k) axis.push_back(0.5 * k);
  std::vector<Vec> grid;
  if (d == 1) {
    for (double v : axis) grid.push_back({v});
  } else if (d == 2) {
    for (double a : axis)
      for (double b : axis) grid.push_back({a, b});
  } else {
    grid.push_back(Vec(d, 0.0));
    for (std::size_t c = 0; c < d; ++c)
      for (double v : axis) {
        if (v == 0.0) continue;
        Vec y(d, 0.0);
        y[c] = v;
        grid.push_back(y);
      }
  }
  return grid;
}

std::vector<Complex> evaluate_target(const CFTarget& target, const std::vector<Vec>& grid) {
  std::vector<Complex> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) { out[k] = target(grid[k]); });
  return out;
}

double cf_distance(const std::vector<Vec>& samples, const std::vector<Complex>& target_values,
                   const std::vector<Vec>& grid) {
  if (grid.empty()) throw DomainError("cf_distance: empty grid");
  if (target_values.size() != grid.size()) throw DomainError("cf_distance: size mismatch");
  double best = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    best = std::max(best, std::abs(ecf(samples, grid[k]) - target_values[k]));
  return best;
}

double cf_distance(const std::vector<Vec>& samples, const CFTarget& target,
                   const std::vector<Vec>& grid) {
  return cf_distance(samples, evaluate_target(target, grid), grid);
}

double ecf_distance(const std::vector<Vec>& a, const std::vector<Vec>& b,
                    const std::vector<Vec>& grid) {
  double best = 0.0;
  for (const auto& y : grid) best = std::max(best, std::abs(ecf(a, y) - ecf(b, y)));
  return best;
}

double hill_tail_index(std::vector<double> magnitudes, std::size_t k) {
  const std::size_t n = magnitudes.size();
  if (n < 2) throw DomainError("hill: need at least two samples");
  if (k == 0) k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  if (k >= n) throw DomainError("hill: k must be smaller than the sample size");
  for (double m : magnitudes)
    if (!(m > 0.0)) throw DomainError("hill: magnitudes must be positive");
  std::nth_element(magnitudes.begin(), magnitudes.begin() + static_cast<std::ptrdiff_t>(k),
                   magnitudes.end(), std::greater<>());
  const double threshold = magnitudes[k];
  double s = 0.0;
  for (std::size_t j = 0; j < k; ++j) s += std::log(magnitudes[j] / threshold);
  if (!(s > 0.0)) throw DomainError("hill: degenerate sample (no spread above the threshold)");
  return static_cast<double>(k) / s;
}

Interval bootstrap_ci(const std::vector<double>& data,
                      const std::function<double(const std::vector<double>&)>& statistic,
                      std::size_t resamples, double level, std::uint64_t seed) {
  if (data.empty() || resamples < 2) throw DomainError("bootstrap: need data and resamples");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("bootstrap: level must lie in (0, 1)");
  Rng rng = make_rng(seed, 0, Stream::Auxiliary);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<double> stats(resamples), sample(data.size());
  for (auto& s : stats) {
    for (auto& x : sample) x = data[pick(rng)];
    s = statistic(sample);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - level) / 2.0;
  auto at = [&](double p) {
    const auto idx = static_cast<std::size_t>(std::floor(p * static_cast<double>(resamples - 1)));
    return stats[std::min(idx, resamples - 1)];
  };
  return {at(tail), at(1.0 - tail)};
}

double empirical_moment(const std::vector<Vec>& samples, double p) {
  if (!(p > 0.0)) throw DomainError("moment order must be positive");
  if (samples.empty()) throw DomainError("empirical_moment: no samples");
  double s = 0.0;
  for (const auto& x : samples) s += std::pow(norm(x), p);
  return s / static_cast<double>(samples.size());
}

double p_variation(const SamplePath& path, double p) {
  if (!(p > 0.0)) throw DomainError("variation order must be positive");
  if (path.grid().size() < 2) throw DomainError("p_variation: grid needs two points");
  const std::size_t d = path.dimension();
  double s = 0.0;
  for (std::size_t k = 1; k < path.grid().size(); ++k) {
    double n2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double inc = path.value(k)[c] - path.value(k - 1)[c];
      n2 += inc * inc;
    }
    if (n2 > 0.0) s += std::pow(n2, p / 2.0);
  }
  return s;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_pvalue(double d, double n_eff) {
  if (!(n_eff > 0.0)) throw DomainError("ks: effective sample size must be positive");
  const double x = std::sqrt(n_eff) * d;
  if (x <= 0.0) return 1.0;
  // Survival function of the Kolmogorov distribution; the theta-function form
  // converges fast for small x.
  if (x < 1.0) {
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      s += std::exp(-m * m * kPi * kPi / (8.0 * x * x));
    }
    return 1.0 - std::sqrt(2.0 * kPi) / x * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  return std::clamp(s, 0.0, 1.0);
}

double chi_square_pvalue(double statistic, double dof) {
  if (!(dof > 0.0)) throw DomainError("chi-square: dof must be positive");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median of an empty list");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw DomainError("mean of an empty list");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace layerlab
