#include "layerlab/limits.hpp"

#include <cmath>

#include "layerlab/quadrature.hpp"

namespace layerlab {

namespace {

constexpr double kRadialAbsTol = 1e-12;
constexpr double kRadialRelTol = 1e-10;

// Integral of xi f(xi) sigma(d xi). Uniform sigma integrates to zero when f
// does not depend on the direction.
Vec sphere_vector_integral(const SphericalMeasure& sigma, const std::function<double(const Vec&)>& f) {
  Vec out(sigma.dimension(), 0.0);
  if (sigma.is_uniform()) {
    const auto probes = probe_directions(sigma.dimension());
    const double v = f(probes.front());
    for (const auto& p : probes)
      if (std::fabs(f(p) - v) > 1e-9 * std::max(1.0, std::fabs(v)))
        throw DomainError("direction-dependent q over a uniform spherical measure");
    return out;
  }
  for (const auto& atom : sigma.atoms()) {
    const double c = atom.weight * f(atom.direction);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += c * atom.direction[k];
  }
  return out;
}

bool in_open(double x, double lo, double hi) { return x > lo && x < hi; }

}  // namespace

std::string to_string(LimitMode mode) {
  switch (mode) {
    case LimitMode::ShortStable: return "short";
    case LimitMode::LongStable: return "long-stable";
    case LimitMode::LongGaussian: return "long-gaussian";
  }
  return "unknown";
}

Vec inner_drift_integral(const LayeredQ& q, const SphericalMeasure& sigma) {
  if (!(q.alpha() < 1.0)) throw DomainError("int_0^1 r q dr diverges for alpha >= 1");
  return sphere_vector_integral(sigma, [&](const Vec& xi) {
    if (q.kind() == LayeredQ::Kind::Canonical) return 1.0 / ((1.0 - q.alpha()) * q.mass());
    return quad::from_zero([&](double r) { return r * q.eval(r, xi); }, 1.0, kRadialAbsTol,
                           kRadialRelTol);
  });
}

Vec outer_drift_integral(const LayeredQ& q, const SphericalMeasure& sigma) {
  if (!(q.beta() > 1.0)) throw DomainError("int_1^inf r q dr diverges for beta <= 1");
  return sphere_vector_integral(sigma, [&](const Vec& xi) {
    if (q.kind() == LayeredQ::Kind::Canonical) return 1.0 / ((q.beta() - 1.0) * q.mass());
    return quad::to_infinity([&](double r) { return r * q.eval(r, xi); }, 1.0, kRadialAbsTol,
                             kRadialRelTol);
  });
}

LimitConstants short_time_constants(const LayeredQ& q, const SphericalMeasure& sigma) {
  const double a = q.alpha(), b = q.beta();
  const std::size_t d = sigma.dimension();
  LimitConstants c{Vec(d, 0.0), Vec(d, 0.0)};
  if (a < 1.0) c.eta = inner_drift_integral(q, sigma);
  else if (in_open(a, 1.0, 2.0) && b > 1.0) c.eta = scaled(outer_drift_integral(q, sigma), -1.0);
  if (in_open(a, 1.0, 2.0) && b <= 1.0) {
    const auto pair = derive_sigma_pair(q, sigma);
    c.b = scaled(pair.sigma1.first_moment(), 1.0 / (a - 1.0));
  }
  return c;
}

LimitConstants long_time_constants(const LayeredQ& q, const SphericalMeasure& sigma) {
  const double a = q.alpha(), b = q.beta();
  const std::size_t d = sigma.dimension();
  if (b == 2.0) throw DomainError("beta = 2: the rescaled process does not converge to a stable or Gaussian limit");
  LimitConstants c{Vec(d, 0.0), Vec(d, 0.0)};
  if (b > 2.0) {
    c.eta = scaled(outer_drift_integral(q, sigma), -1.0);
    return c;
  }
  if (a < 1.0 && b < 1.0) c.eta = inner_drift_integral(q, sigma);
  else if (in_open(b, 1.0, 2.0)) c.eta = scaled(outer_drift_integral(q, sigma), -1.0);
  if (a >= 1.0 && b < 1.0) {
    const auto pair = derive_sigma_pair(q, sigma);
    c.b = scaled(pair.sigma2.first_moment(), 1.0 / (1.0 - b));
  }
  return c;
}

Matrix gaussian_covariance(const LayeredQ& q, const SphericalMeasure& sigma) {
  if (!(q.beta() > 2.0)) throw DomainError("second moment of the Levy measure needs beta > 2");
  auto radial = [&](const Vec& xi) {
    if (q.kind() == LayeredQ::Kind::Canonical)
      return (1.0 / (2.0 - q.alpha()) + 1.0 / (q.beta() - 2.0)) / q.mass();
    auto f = [&](double r) { return r * r * q.eval(r, xi); };
    return quad::from_zero(f, 1.0, kRadialAbsTol, kRadialRelTol) +
           quad::to_infinity(f, 1.0, kRadialAbsTol, kRadialRelTol);
  };
  if (sigma.is_uniform()) {
    Matrix m = sigma.second_moment();
    const double f = radial(probe_directions(sigma.dimension()).front());
    for (double& v : m.a) v *= f;
    return m;
  }
  Matrix m(sigma.dimension());
  for (const auto& atom : sigma.atoms()) {
    const double f = atom.weight * radial(atom.direction);
    for (std::size_t i = 0; i < m.n; ++i)
      for (std::size_t j = 0; j < m.n; ++j) m(i, j) += f * atom.direction[i] * atom.direction[j];
  }
  return m;
}

LimitSpec short_time_spec(const LayeredQ& q, const SphericalMeasure& sigma, double h) {
  if (!(h > 0.0)) throw DomainError("h must be positive");
  const auto c = short_time_constants(q, sigma);
  LimitSpec spec;
  spec.mode = LimitMode::ShortStable;
  spec.h = h;
  spec.index = q.alpha();
  spec.eta = c.eta;
  spec.b = c.b;
  spec.target_sigma = derive_sigma_pair(q, sigma).sigma1;
  return spec;
}

LimitSpec long_time_spec(const LayeredQ& q, const SphericalMeasure& sigma, double h) {
  if (!(h > 0.0)) throw DomainError("h must be positive");
  const auto c = long_time_constants(q, sigma);
  LimitSpec spec;
  spec.h = h;
  spec.eta = c.eta;
  spec.b = c.b;
  if (q.beta() > 2.0) {
    spec.mode = LimitMode::LongGaussian;
    spec.index = 2.0;
    spec.target_covariance = gaussian_covariance(q, sigma);
  } else {
    spec.mode = LimitMode::LongStable;
    spec.index = q.beta();
    spec.target_sigma = derive_sigma_pair(q, sigma).sigma2;
  }
  return spec;
}

namespace {

double b_sign(LimitMode mode) {
  switch (mode) {
    case LimitMode::ShortStable: return -1.0;
    case LimitMode::LongStable: return 1.0;
    case LimitMode::LongGaussian: return 0.0;
  }
  return 0.0;
}

}  // namespace

Vec rescale_value(const Vec& x, double s, const LimitSpec& spec) {
  if (x.size() != spec.eta.size()) throw DomainError("rescale: dimension mismatch");
  const double scale = std::pow(spec.h, -1.0 / spec.index);
  const double t = s / spec.h;
  const double sign = b_sign(spec.mode);
  Vec out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = scale * (x[k] + s * spec.eta[k]);
    if (sign != 0.0) out[k] += sign * t * spec.b[k];
  }
  return out;
}

SamplePath rescale_path(const SamplePath& path, const LimitSpec& spec) {
  const std::size_t d = path.dimension();
  if (spec.eta.size() != d || spec.b.size() != d) throw DomainError("rescale: dimension mismatch");
  const double h = spec.h;
  const double scale = std::pow(h, -1.0 / spec.index);
  const double sign = b_sign(spec.mode);
  Vec grid(path.grid().size());
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = path.grid()[k] / h;
  const double horizon = path.horizon() / h;

  if (path.has_gaussian_part()) {
    Vec values(grid.size() * d);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const Vec v = rescale_value(path.value_vec(k), path.grid()[k], spec);
      std::copy(v.begin(), v.end(), values.begin() + k * d);
    }
    return SamplePath::from_values(d, horizon, std::move(grid), std::move(values));
  }

  Vec times(path.jump_count()), jumps(path.jump_count() * d);
  std::vector<std::size_t> terms(path.jump_count());
  for (std::size_t j = 0; j < path.jump_count(); ++j) {
    times[j] = path.jump_time(j) / h;
    terms[j] = path.jump_term(j);
    for (std::size_t c = 0; c < d; ++c) jumps[j * d + c] = scale * path.jump(j)[c];
  }
  Vec drift(d);
  for (std::size_t c = 0; c < d; ++c) {
    drift[c] = scale * h * (path.drift_per_time()[c] + spec.eta[c]);
    if (sign != 0.0) drift[c] += sign * spec.b[c];
  }
  return SamplePath::build(d, horizon, std::move(grid), std::move(times), std::move(jumps),
                           std::move(terms), std::move(drift));
}

}  // namespace layerlab
