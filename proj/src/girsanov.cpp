#include "layerlab/girsanov.hpp"

#include <algorithm>
#include <cmath>

#include "layerlab/limits.hpp"
#include "layerlab/quadrature.hpp"

namespace layerlab {

namespace {

constexpr double kAbsTol = 1e-12;
constexpr double kRelTol = 1e-10;

// Integral of r (q(r, xi) - c1(xi) r^{-alpha-1}) over (0, 1].
double inner_defect(const LayeredQ& q, const Vec& xi) {
  if (q.kind() == LayeredQ::Kind::Canonical) return 0.0;
  const double c1 = q.c1(xi);
  auto f = [&](double r) { return r * (q.eval(r, xi) - c1 * std::pow(r, -q.alpha() - 1.0)); };
  return quad::from_zero(f, 1.0, kAbsTol, kRelTol);
}

Vec sphere_vector(const SphericalMeasure& sigma, const std::function<double(const Vec&)>& f) {
  Vec out(sigma.dimension(), 0.0);
  if (sigma.is_uniform()) return out;
  for (const auto& atom : sigma.atoms()) {
    const double c = atom.weight * f(atom.direction);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += c * atom.direction[k];
  }
  return out;
}

double sphere_scalar(const SphericalMeasure& sigma, const std::function<double(const Vec&)>& f) {
  if (sigma.is_uniform()) return sigma.total_mass() * f(probe_directions(sigma.dimension()).front());
  double s = 0.0;
  for (const auto& atom : sigma.atoms()) s += atom.weight * f(atom.direction);
  return s;
}

}  // namespace

double phi(const LayeredQ& q, const Vec& z) {
  const double r = norm(z);
  if (!(r > 0.0)) throw DomainError("phi: z must be nonzero");
  if (q.kind() == LayeredQ::Kind::Canonical) {
    if (r <= 1.0) return 0.0;
    return (q.alpha() - q.beta()) * std::log(r);
  }
  const Vec xi = scaled(z, 1.0 / r);
  const double c1 = q.c1(xi);
  if (!(c1 > 0.0)) throw DomainError("phi: c1 vanishes in this direction");
  return std::log(q.eval(r, xi)) - std::log(c1) + (q.alpha() + 1.0) * std::log(r);
}

Compatibility drift_compatibility(const LayeredQ& q, const SphericalMeasure& sigma, const Vec& k0,
                                  const Vec& k1, double tol) {
  const std::size_t d = sigma.dimension();
  if (k0.size() != d || k1.size() != d) throw DomainError("drift vectors have the wrong dimension");
  const double a = q.alpha();
  Compatibility out;
  if (a < 1.0) {
    out.required = inner_drift_integral(q, sigma);
  } else {
    out.required = sphere_vector(sigma, [&](const Vec& xi) { return inner_defect(q, xi); });
    if (a > 1.0) {
      const Vec m1 = derive_sigma_pair(q, sigma).sigma1.first_moment();
      for (std::size_t k = 0; k < d; ++k) out.required[k] += m1[k] / (a - 1.0);
    }
  }
  double gap = 0.0;
  for (std::size_t k = 0; k < d; ++k) gap = std::max(gap, std::fabs(k0[k] - k1[k] - out.required[k]));
  out.compatible = gap <= tol;
  return out;
}

double nu_gap(const LayeredQ& q, const SphericalMeasure& sigma, double eps) {
  if (!(eps > 0.0)) throw DomainError("nu_gap: eps must be positive");
  const double a = q.alpha(), b = q.beta();
  if (q.kind() == LayeredQ::Kind::Canonical) {
    const double kappa = sigma.total_mass() / q.mass();
    if (eps <= 1.0) return kappa * (1.0 / b - 1.0 / a);
    return kappa * (std::pow(eps, -b) / b - std::pow(eps, -a) / a);
  }
  return sphere_scalar(sigma, [&](const Vec& xi) {
    const double c1 = q.c1(xi);
    auto f = [&](double r) { return q.eval(r, xi) - c1 * std::pow(r, -a - 1.0); };
    if (eps >= 1.0) return quad::to_infinity(f, eps, kAbsTol, kRelTol);
    return quad::log_scale(f, eps, 1.0, kAbsTol, kRelTol) +
           quad::to_infinity(f, 1.0, kAbsTol, kRelTol);
  });
}

std::vector<double> default_eps_schedule() {
  std::vector<double> eps;
  for (int k = 0; k <= 20; ++k) eps.push_back(std::ldexp(1.0, -k));
  return eps;
}

UEstimate u_from_jumps(const LayeredQ& q, const SphericalMeasure& sigma, const SamplePath& path,
                       double t, const std::vector<double>& eps_schedule) {
  if (eps_schedule.empty()) throw DomainError("u_from_jumps: empty eps schedule");
  std::vector<std::pair<double, double>> size_phi;
  for (std::size_t j = 0; j < path.jump_count() && path.jump_time(j) <= t; ++j) {
    const Vec z(path.jump(j), path.jump(j) + path.dimension());
    size_phi.emplace_back(norm(z), phi(q, z));
  }
  UEstimate out;
  for (double eps : eps_schedule) {
    double s = 0.0;
    for (const auto& [r, p] : size_phi)
      if (r > eps) s += p;
    out.by_eps.push_back(s - t * nu_gap(q, sigma, eps));
  }
  out.value = out.by_eps.back();
  if (out.by_eps.size() > 1)
    out.cauchy_increment = std::fabs(out.by_eps.back() - out.by_eps[out.by_eps.size() - 2]);
  return out;
}

double u_canonical(double alpha, double beta, double kappa, const SamplePath& path, double t) {
  double s = 0.0;
  for (std::size_t j = 0; j < path.jump_count() && path.jump_time(j) <= t; ++j) {
    const double r = norm(Vec(path.jump(j), path.jump(j) + path.dimension()));
    if (r > 1.0) s += std::log(r);
  }
  return (alpha - beta) * s - t * (1.0 / beta - 1.0 / alpha) * kappa;
}

double u_series(const ShotNoiseDraw& draw, double alpha, double beta, double kappa, double t,
                USeries which) {
  const double index = which == USeries::Prime ? alpha : beta;
  const double kt = kappa * draw.horizon;
  const double split = kt / index;
  double s = 0.0;
  for (std::size_t i = 0; i < draw.size() && draw.gammas[i] <= split; ++i)
    if (draw.times[i] <= t) s += std::log(index * draw.gammas[i] / kt);
  return -(alpha - beta) / index * s - t * (1.0 / beta - 1.0 / alpha) * kappa;
}

double u_levy_tail(double alpha, double beta, double kappa, double y) {
  if (alpha == beta) throw DomainError("u_levy_tail: alpha equals beta");
  if (alpha < beta && !(y < 0.0)) throw DomainError("u_levy_tail: y must be negative for alpha < beta");
  if (alpha > beta && !(y > 0.0)) throw DomainError("u_levy_tail: y must be positive for alpha > beta");
  return kappa / alpha * std::exp(-alpha / (alpha - beta) * y);
}

WeightedEstimate reweighted_expectation(const std::vector<WeightedValue>& samples) {
  if (samples.empty()) throw DomainError("reweighted_expectation: no samples");
  WeightedEstimate out;
  const MeasureTag tag = samples.front().tag;
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.tag != tag) throw DomainError("reweighted_expectation: mixed measure tags");
    double lw = s.log_weight;
    if (!std::isfinite(lw)) throw DomainError("reweighted_expectation: non-finite log weight");
    if (std::fabs(lw) > kLogWeightClip) {
      lw = std::clamp(lw, -kLogWeightClip, kLogWeightClip);
      ++out.clipped;
    }
    const double x = std::exp(lw) * s.value;
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  out.estimate = mean;
  out.std_error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return out;
}

WeightedEstimate reweighted_expectation(const std::vector<WeightedPathSample>& samples,
                                        const std::function<double(const SamplePath&)>& f) {
  std::vector<WeightedValue> values;
  values.reserve(samples.size());
  for (const auto& s : samples) values.push_back({f(s.path), s.log_weight, s.tag});
  return reweighted_expectation(values);
}

SingularityWitness singularity_witness(const LayeredQ& q, const Vec& xi) {
  if (q.alpha() == q.beta()) throw DomainError("singularity_witness: alpha equals beta");
  const double c2 = q.c2(xi);
  if (!(c2 > 0.0)) throw DomainError("singularity_witness: c2 vanishes in this direction");
  SingularityWitness w;
  for (int k = 0; k <= 12; ++k) {
    const double r = std::pow(10.0, -k);
    w.radii.push_back(r);
    w.psi.push_back(std::log(q.eval(r, xi)) - std::log(c2) + (q.beta() + 1.0) * std::log(r));
  }
  w.direction = w.psi.back() > w.psi.front() ? 1 : -1;
  return w;
}

}  // namespace layerlab
