#include "layerlab/qfunc.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "layerlab/quadrature.hpp"

namespace layerlab {

namespace {

constexpr double kTailAbsTol = 1e-10;
constexpr double kTailRelTol = 1e-11;

void check_indices(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0, 2)");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
}

void check_radius(double r) {
  if (!(r > 0.0)) throw DomainError("q: radius must be positive");
}

double asymptotic_gap(double value, double limit) {
  if (limit > 0.0) return std::fabs(value / limit - 1.0);
  return value;
}

}  // namespace

LayeredQ LayeredQ::canonical(double alpha, double beta, double mass) {
  check_indices(alpha, beta);
  if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("canonical q: mass must be positive");
  LayeredQ q;
  q.kind_ = Kind::Canonical;
  q.alpha_ = alpha;
  q.beta_ = beta;
  q.mass_ = mass;
  q.label_ = "canonical";
  return q;
}

LayeredQ LayeredQ::custom(double alpha, double beta, Density density, Limit c1, Limit c2,
                          const std::vector<Vec>& probe) {
  check_indices(alpha, beta);
  if (!density || !c1 || !c2) throw DomainError("custom q: density and limits are required");
  if (probe.empty()) throw DomainError("custom q: need at least one probe direction");
  for (const auto& xi : probe) {
    for (int k = -12; k <= 12; ++k) {
      const double v = density(std::pow(10.0, k), xi);
      if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError("custom q must be positive and finite");
    }
    const double a = c1(xi), b = c2(xi);
    if (a < 0.0 || b < 0.0) throw DomainError("custom q: c1 and c2 must be nonnegative");
    const double small = density(1e-6, xi) * std::pow(1e-6, alpha + 1.0);
    const double large = density(1e6, xi) * std::pow(1e6, beta + 1.0);
    if (asymptotic_gap(small, a) > 0.05)
      throw DomainError("custom q: q(r) r^(alpha+1) does not approach c1 as r -> 0");
    if (asymptotic_gap(large, b) > 0.05)
      throw DomainError("custom q: q(r) r^(beta+1) does not approach c2 as r -> inf");
  }
  LayeredQ q;
  q.kind_ = Kind::Custom;
  q.alpha_ = alpha;
  q.beta_ = beta;
  q.mass_ = 1.0;
  q.label_ = "custom";
  q.q_ = std::move(density);
  q.c1_ = std::move(c1);
  q.c2_ = std::move(c2);
  return q;
}

LayeredQ LayeredQ::smooth(double alpha, double beta, double mass, std::size_t dimension) {
  check_indices(alpha, beta);
  if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("smooth q: mass must be positive");
  const double inv = 1.0 / mass;
  auto density = [=](double r, const Vec&) {
    return inv * std::exp(-(alpha + 1.0) * std::log(r) + (alpha - beta) * std::log1p(r));
  };
  auto c = [=](const Vec&) { return inv; };
  LayeredQ q = custom(alpha, beta, density, c, c, probe_directions(dimension));
  q.mass_ = mass;
  q.label_ = "smooth";
  return q;
}

LayeredQ LayeredQ::parse(std::string_view spec, double default_mass, std::size_t dimension) {
  const auto colon = spec.find(':');
  const std::string family(spec.substr(0, colon));
  std::map<std::string, double> keys;
  if (colon != std::string_view::npos) {
    std::string_view rest = spec.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw DomainError("q spec: expected key=value");
      double v = 0.0;
      const auto text = item.substr(eq + 1);
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size())
        throw DomainError("q spec: bad number '" + std::string(text) + "'");
      const std::string key(item.substr(0, eq));
      if (key != "alpha" && key != "beta" && key != "mass")
        throw DomainError("q spec: unknown key '" + key + "'");
      keys[key] = v;
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  if (!keys.count("alpha") || !keys.count("beta"))
    throw DomainError("q spec: alpha and beta are required");
  const double mass = keys.count("mass") ? keys["mass"] : default_mass;
  if (family == "canonical") return canonical(keys["alpha"], keys["beta"], mass);
  if (family == "smooth") return smooth(keys["alpha"], keys["beta"], mass, dimension);
  throw DomainError("q spec: unknown family '" + family + "'");
}

double LayeredQ::eval(double r, const Vec& xi) const {
  check_radius(r);
  if (kind_ == Kind::Custom) return q_(r, xi);
  const double p = r <= 1.0 ? alpha_ : beta_;
  return std::pow(r, -p - 1.0) / mass_;
}

double LayeredQ::c1(const Vec& xi) const {
  return kind_ == Kind::Custom ? c1_(xi) : 1.0 / mass_;
}

double LayeredQ::c2(const Vec& xi) const {
  return kind_ == Kind::Custom ? c2_(xi) : 1.0 / mass_;
}

double LayeredQ::tail_integral(double r, const Vec& xi) const {
  check_radius(r);
  if (kind_ == Kind::Canonical) {
    if (r > 1.0) return std::pow(r, -beta_) / beta_ / mass_;
    return (std::expm1(-alpha_ * std::log(r)) / alpha_ + 1.0 / beta_) / mass_;
  }
  auto f = [&](double s) { return q_(s, xi); };
  if (r >= 1.0) return quad::to_infinity(f, r, kTailAbsTol, kTailRelTol);
  return quad::log_scale(f, r, 1.0, kTailAbsTol, kTailRelTol) +
         quad::to_infinity(f, 1.0, kTailAbsTol, kTailRelTol);
}

double LayeredQ::inverse_tail(double u, const Vec& xi) const {
  if (!(u > 0.0)) throw DomainError("inverse_tail: u must be positive");
  if (kind_ == Kind::Canonical) {
    const double boundary = 1.0 / (mass_ * beta_);
    if (u <= boundary) return std::pow(beta_ * mass_ * u, -1.0 / beta_);
    return std::pow(alpha_ * mass_ * u + 1.0 - alpha_ / beta_, -1.0 / alpha_);
  }
  // Safeguarded Newton on x = log r; Q is strictly decreasing in x.
  auto excess = [&](double x) { return tail_integral(std::exp(x), xi) - u; };
  double lo = 0.0, hi = 0.0;
  double f0 = excess(0.0);
  if (f0 >= 0.0) {
    hi = 1.0;
    while (excess(hi) >= 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 2000.0) throw DomainError("inverse_tail: could not bracket");
    }
  } else {
    lo = -1.0;
    while (excess(lo) < 0.0) {
      hi = lo;
      lo *= 2.0;
      if (lo < -2000.0) return std::exp(lo);
    }
  }
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    const double fx = excess(x);
    if (fx >= 0.0) lo = x; else hi = x;
    const double r = std::exp(x);
    const double slope = -q_(r, xi) * r;
    double next = x - fx / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) < 1e-14) {
      x = next;
      break;
    }
    x = next;
  }
  return std::exp(x);
}

double LayeredQ::truncated_first_moment(double a, const Vec& xi) const {
  check_radius(a);
  if (a == 1.0) return 0.0;
  if (kind_ == Kind::Canonical) {
    if (a > 1.0) throw DomainError("truncated_first_moment: canonical needs a <= 1");
    if (alpha_ == 1.0) return -std::log(a) / mass_;
    return -std::expm1((1.0 - alpha_) * std::log(a)) / (1.0 - alpha_) / mass_;
  }
  auto f = [&](double s) { return s * q_(s, xi); };
  if (a < 1.0) return quad::log_scale(f, a, 1.0, kTailAbsTol, kTailRelTol);
  return -quad::log_scale(f, 1.0, a, kTailAbsTol, kTailRelTol);
}

std::string LayeredQ::to_string() const {
  std::ostringstream out;
  out.precision(17);
  out << label_ << ":alpha=" << alpha_ << ",beta=" << beta_;
  if (label_ != "custom") out << ",mass=" << mass_;
  return out.str();
}

DerivedSphericalPair derive_sigma_pair(const LayeredQ& q, const SphericalMeasure& sigma) {
  return {sigma.reweighted([&](const Vec& xi) { return q.c1(xi); }),
          sigma.reweighted([&](const Vec& xi) { return q.c2(xi); })};
}

double levy_tail_mass(const LayeredQ& q, const SphericalMeasure& sigma, double x) {
  check_radius(x);
  if (!sigma.is_uniform()) {
    double s = 0.0;
    for (const auto& atom : sigma.atoms()) s += atom.weight * q.tail_integral(x, atom.direction);
    return s;
  }
  const auto probes = probe_directions(sigma.dimension());
  const double v = q.tail_integral(x, probes.front());
  if (q.kind() == LayeredQ::Kind::Custom) {
    for (const auto& p : probes)
      if (std::fabs(q.tail_integral(x, p) - v) > 1e-9 * std::max(1.0, v))
        throw DomainError("direction-dependent q over a uniform spherical measure");
  }
  return sigma.total_mass() * v;
}

}  // namespace layerlab
