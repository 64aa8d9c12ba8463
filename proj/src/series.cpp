#include "layerlab/series.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <mutex>
#include <thread>

#include "layerlab/quadrature.hpp"
#include "layerlab/special.hpp"

namespace layerlab {

namespace {

constexpr double kTinyMagnitude = 1e-300;

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw DomainError("bad number '" + std::string(s) + "'");
  return v;
}

struct Kahan {
  explicit Kahan(std::size_t d) : sum(d, 0.0), carry(d, 0.0) {}
  void add(const double* x) {
    for (std::size_t k = 0; k < sum.size(); ++k) {
      const double y = x[k] - carry[k];
      const double t = sum[k] + y;
      carry[k] = (t - sum[k]) - y;
      sum[k] = t;
    }
  }
  Vec sum, carry;
};

void require_symmetric(const SphericalMeasure& sigma, const char* what) {
  if (!sigma.is_symmetric()) throw DomainError(std::string(what) + " requires a symmetric sigma");
}

void require_canonical(const LayeredQ& q, const char* what) {
  if (q.kind() != LayeredQ::Kind::Canonical)
    throw DomainError(std::string(what) + " requires the canonical q");
}

// Custom q over a uniform sigma must not depend on the direction.
void require_isotropic(const LayeredQ& q, const SphericalMeasure& sigma) {
  if (!sigma.is_uniform() || q.kind() == LayeredQ::Kind::Canonical) return;
  const auto probes = probe_directions(sigma.dimension());
  for (double r : {1e-3, 0.5, 1.0, 2.0, 1e3}) {
    const double v = q.eval(r, probes.front());
    for (const auto& p : probes)
      if (std::fabs(q.eval(r, p) - v) > 1e-12 * v)
        throw DomainError("direction-dependent q over a uniform spherical measure");
  }
}

Vec scaled_first_moment(const SphericalMeasure& sigma, double factor) {
  Vec z = sigma.first_moment();
  for (double& v : z) v *= factor;
  return z;
}

// Lower-triangular factor of a symmetric PSD matrix; nonpositive pivots are
// treated as zero.
Matrix cholesky(const Matrix& a) {
  Matrix l(a.n);
  for (std::size_t j = 0; j < a.n; ++j) {
    double s = a(j, j);
    for (std::size_t k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    const double pivot = s > 0.0 ? std::sqrt(s) : 0.0;
    l(j, j) = pivot;
    for (std::size_t i = j + 1; i < a.n; ++i) {
      double t = a(i, j);
      for (std::size_t k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
      l(i, j) = pivot > 0.0 ? t / pivot : 0.0;
    }
  }
  return l;
}

void gaussian_increment(Rng& rng, const Matrix& chol, double dt, double* out) {
  const std::size_t d = chol.n;
  Vec z(d);
  for (double& v : z) v = standard_normal(rng);
  const double s = std::sqrt(dt);
  for (std::size_t i = 0; i < d; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= i; ++k) acc += chol(i, k) * z[k];
    out[i] = s * acc;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// MixingLaw

MixingLaw MixingLaw::discrete(std::vector<double> values, std::vector<double> weights) {
  if (values.empty() || values.size() != weights.size())
    throw DomainError("mixing law: values and weights must match and be nonempty");
  MixingLaw m;
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0 && values[i] < 2.0)) throw DomainError("mixing law: alpha outside (0,2)");
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw DomainError("mixing law: weights must be positive");
    acc += weights[i];
    m.cumulative_.push_back(acc);
  }
  for (double& w : weights) w /= acc;
  for (double& c : m.cumulative_) c /= acc;
  m.values_ = std::move(values);
  m.weights_ = std::move(weights);
  return m;
}

MixingLaw MixingLaw::uniform(double a, double b) {
  if (!(a > 0.0 && a < b && b < 2.0))
    throw DomainError("mixing law: uniform[a,b] needs 0 < a < b < 2");
  MixingLaw m;
  m.uniform_ = true;
  m.a_ = a;
  m.b_ = b;
  m.values_ = {a, b};
  return m;
}

MixingLaw MixingLaw::parse(std::string_view spec) {
  if (spec.starts_with("uniform:")) {
    auto rest = spec.substr(8);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw DomainError("expected uniform:a:b");
    return uniform(parse_double(rest.substr(0, colon)), parse_double(rest.substr(colon + 1)));
  }
  if (spec.starts_with("discrete:")) {
    auto rest = spec.substr(9);
    std::vector<double> values, weights;
    while (!rest.empty()) {
      auto comma = rest.find(',');
      auto item = rest.substr(0, comma);
      auto colon = item.find(':');
      if (colon == std::string_view::npos) {
        values.push_back(parse_double(item));
        weights.push_back(1.0);
      } else {
        values.push_back(parse_double(item.substr(0, colon)));
        weights.push_back(parse_double(item.substr(colon + 1)));
      }
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return discrete(std::move(values), std::move(weights));
  }
  throw DomainError("unknown mixing law '" + std::string(spec) + "'");
}

double MixingLaw::sample(Rng& rng) const {
  const double u = uniform_open(rng);
  if (uniform_) return a_ + (b_ - a_) * u;
  if (values_.size() == 1) return values_.front();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return values_[std::min<std::size_t>(it - cumulative_.begin(), values_.size() - 1)];
}

double MixingLaw::expect(const std::function<double(double)>& f) const {
  if (uniform_) return quad::finite(f, a_, b_, 1e-13, 1e-11) / (b_ - a_);
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += weights_[i] * f(values_[i]);
  return s;
}

std::string MixingLaw::to_string() const {
  std::ostringstream out;
  out.precision(17);
  if (uniform_) {
    out << "uniform:" << a_ << ":" << b_;
    return out.str();
  }
  out << "discrete:";
  for (std::size_t i = 0; i < values_.size(); ++i)
    out << (i ? "," : "") << values_[i] << ":" << weights_[i];
  return out.str();
}

// ---------------------------------------------------------------------------
// Draws

ShotNoiseDraw draw_shot_noise(std::uint64_t seed, std::uint64_t path, double horizon,
                              const SphericalMeasure& sigma, double gamma_cap,
                              const DrawOptions& options) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive");
  if (!(gamma_cap > 0.0) || !std::isfinite(gamma_cap))
    throw DomainError("gamma_cap must be positive");
  ShotNoiseDraw draw;
  draw.horizon = horizon;
  draw.gamma_cap = gamma_cap;
  draw.dimension = sigma.dimension();
  draw.seed = seed;
  draw.path = path;

  const double limit = gamma_cap * horizon;
  const auto expected = static_cast<std::size_t>(limit + 4.0 * std::sqrt(limit) + 16.0);
  draw.gammas.reserve(expected);
  Rng arrivals = make_rng(seed, path, Stream::Arrivals);
  for (double g = exponential(arrivals); g <= limit; g += exponential(arrivals))
    draw.gammas.push_back(g);
  const std::size_t n = draw.gammas.size();

  Rng times = make_rng(seed, path, Stream::Times);
  draw.times.resize(n);
  for (double& t : draw.times) t = horizon * uniform_open(times);

  Rng dirs = make_rng(seed, path, Stream::Directions);
  draw.directions.resize(n * draw.dimension);
  for (std::size_t i = 0; i < n; ++i)
    sigma.sample_direction_into(dirs, draw.directions.data() + i * draw.dimension);

  if (options.rejects) {
    Rng rej = make_rng(seed, path, Stream::Rejects);
    draw.rejects.resize(n);
    for (double& u : draw.rejects) u = uniform_open(rej);
  }
  if (options.mix) {
    Rng idx = make_rng(seed, path, Stream::Indices);
    draw.alphas.resize(n);
    for (double& a : draw.alphas) a = options.mix->sample(idx);
  }
  return draw;
}

// ---------------------------------------------------------------------------
// Series terms

double stable_bt(double alpha, double mass_times_t) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0, 2)");
  if (alpha < 1.0) return 0.0;
  if (alpha == 1.0) return mass_times_t * (special::kEulerGamma + std::log(mass_times_t));
  return std::pow(alpha / mass_times_t, -1.0 / alpha) * special::zeta(1.0 / alpha);
}

SeriesTerms stable_terms(double alpha, const SphericalMeasure& sigma, const ShotNoiseDraw& draw) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0, 2)");
  if (sigma.dimension() != draw.dimension) throw DomainError("draw and sigma dimensions differ");
  const double mt = sigma.total_mass() * draw.horizon;
  const std::size_t n = draw.size();
  SeriesTerms terms;
  terms.magnitude.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = stable_magnitude(alpha, draw.gammas[i], mt);
    terms.magnitude[i] = m < kTinyMagnitude ? 0.0 : m;
  }
  terms.drift.assign(draw.dimension, 0.0);
  if (alpha >= 1.0) {
    const Vec z0 = scaled_first_moment(sigma, 1.0 / sigma.total_mass());
    if (!is_zero(z0)) {
      double compensator = 0.0;
      for (std::size_t i = 1; i <= n; ++i)
        compensator += stable_magnitude(alpha, static_cast<double>(i), mt);
      const double c = (stable_bt(alpha, mt) - compensator) / draw.horizon;
      for (std::size_t k = 0; k < z0.size(); ++k) terms.drift[k] = c * z0[k];
    }
  }
  terms.largest_discarded = stable_magnitude(alpha, draw.gamma_cap * draw.horizon, mt);
  return terms;
}

SeriesTerms layered_general_terms(const LayeredQ& q, const SphericalMeasure& sigma,
                                  const ShotNoiseDraw& draw) {
  if (sigma.dimension() != draw.dimension) throw DomainError("draw and sigma dimensions differ");
  require_isotropic(q, sigma);
  const double st = sigma.total_mass() * draw.horizon;
  const std::size_t n = draw.size();
  const std::size_t d = draw.dimension;
  SeriesTerms terms;
  terms.magnitude.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec xi(draw.direction(i), draw.direction(i) + d);
    const double m = q.inverse_tail(draw.gammas[i] / st, xi);
    terms.magnitude[i] = m < kTinyMagnitude ? 0.0 : m;
  }
  terms.drift.assign(d, 0.0);
  const double u_n = static_cast<double>(n) / st;
  if (!sigma.is_uniform() && n > 0) {
    // Partial sum of b_i over the retained terms via the substitution u = Q(r).
    for (const auto& atom : sigma.atoms()) {
      const double r_n = q.inverse_tail(u_n, atom.direction);
      if (r_n >= 1.0) continue;
      const double c = atom.weight * q.truncated_first_moment(r_n, atom.direction);
      for (std::size_t k = 0; k < d; ++k) terms.drift[k] -= c * atom.direction[k];
    }
  }
  double largest = 0.0;
  const double u_cap = draw.gamma_cap / sigma.total_mass();
  if (sigma.is_uniform()) {
    largest = q.inverse_tail(u_cap, probe_directions(d).front());
  } else {
    for (const auto& atom : sigma.atoms())
      largest = std::max(largest, q.inverse_tail(u_cap, atom.direction));
  }
  terms.largest_discarded = largest;
  return terms;
}

SeriesTerms layered_canonical_terms(const LayeredQ& q, const SphericalMeasure& sigma,
                                    const ShotNoiseDraw& draw) {
  require_canonical(q, "layered_path_canonical");
  if (sigma.dimension() != draw.dimension) throw DomainError("draw and sigma dimensions differ");
  const double alpha = q.alpha(), beta = q.beta();
  const double kt = sigma.total_mass() / q.mass() * draw.horizon;
  const double split = kt / beta;
  const std::size_t n = draw.size();
  SeriesTerms terms;
  terms.magnitude.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = draw.gammas[i];
    const double m = g <= split ? std::pow(beta * g / kt, -1.0 / beta)
                                : std::pow(alpha * g / kt + 1.0 - alpha / beta, -1.0 / alpha);
    terms.magnitude[i] = m < kTinyMagnitude ? 0.0 : m;
  }
  terms.drift.assign(draw.dimension, 0.0);
  const Vec z0 = scaled_first_moment(sigma, 1.0 / sigma.total_mass());
  if (!is_zero(z0) && n > 0) {
    if (beta <= 1.0)
      throw DomainError("canonical series centering diverges for beta <= 1 with asymmetric sigma");
    const double e = 1.0 - 1.0 / beta;
    const double sum =
        std::pow(beta / kt, -1.0 / beta) * std::pow(std::min(static_cast<double>(n), split), e) / e;
    for (std::size_t k = 0; k < z0.size(); ++k) terms.drift[k] = -sum * z0[k] / draw.horizon;
  }
  terms.largest_discarded = q.inverse_tail(draw.gamma_cap / sigma.total_mass(), {});
  return terms;
}

SeriesTerms layered_rejection_terms(const LayeredQ& q, const SphericalMeasure& sigma,
                                    const ShotNoiseDraw& draw, RejectionBase base) {
  require_canonical(q, "layered_path_rejection");
  require_symmetric(sigma, "layered_path_rejection");
  const double alpha = q.alpha(), beta = q.beta();
  if (!(alpha < beta)) throw DomainError("rejection series requires alpha < beta");
  if (draw.rejects.size() != draw.size()) throw DomainError("draw carries no reject uniforms");
  if (sigma.dimension() != draw.dimension) throw DomainError("draw and sigma dimensions differ");
  const double kt = sigma.total_mass() / q.mass() * draw.horizon;
  const double index = base == RejectionBase::Inner ? alpha : beta;
  const std::size_t n = draw.size();
  SeriesTerms terms;
  terms.magnitude.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = stable_magnitude(index, draw.gammas[i], kt);
    double ratio = 1.0;
    if (base == RejectionBase::Inner && m > 1.0) ratio = std::pow(m, alpha - beta);
    if (base == RejectionBase::Outer && m <= 1.0) ratio = std::pow(m, beta - alpha);
    const bool keep = draw.rejects[i] <= ratio && m >= kTinyMagnitude;
    terms.magnitude[i] = keep ? m : 0.0;
  }
  terms.drift.assign(draw.dimension, 0.0);
  terms.largest_discarded = stable_magnitude(index, draw.gamma_cap * draw.horizon, kt);
  return terms;
}

SeriesTerms mixed_terms(const SphericalMeasure& sigma, const ShotNoiseDraw& draw) {
  require_symmetric(sigma, "mixed_path");
  if (draw.alphas.size() != draw.size()) throw DomainError("draw carries no stability indices");
  if (sigma.dimension() != draw.dimension) throw DomainError("draw and sigma dimensions differ");
  const double mt = sigma.total_mass() * draw.horizon;
  const std::size_t n = draw.size();
  SeriesTerms terms;
  terms.magnitude.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = stable_magnitude(draw.alphas[i], draw.gammas[i], mt);
    terms.magnitude[i] = m < kTinyMagnitude ? 0.0 : m;
  }
  terms.drift.assign(draw.dimension, 0.0);
  double largest = 0.0;
  for (double a : draw.alphas)
    largest = std::max(largest, stable_magnitude(a, draw.gamma_cap * draw.horizon, mt));
  terms.largest_discarded = largest;
  return terms;
}

// ---------------------------------------------------------------------------
// Small-jump Gaussian residual

Matrix small_jump_covariance(const LayeredQ& q, const SphericalMeasure& sigma, double eps) {
  if (!(eps > 0.0)) throw DomainError("small_jump_covariance: eps must be positive");
  auto radial = [&](const Vec& xi) {
    if (q.kind() == LayeredQ::Kind::Canonical) {
      const double a = q.alpha(), b = q.beta(), m = q.mass();
      if (eps <= 1.0) return std::pow(eps, 2.0 - a) / (2.0 - a) / m;
      const double outer =
          b == 2.0 ? std::log(eps) : std::expm1((2.0 - b) * std::log(eps)) / (2.0 - b);
      return (1.0 / (2.0 - a) + outer) / m;
    }
    return quad::from_zero([&](double r) { return r * r * q.eval(r, xi); }, eps, 1e-14, 1e-10);
  };
  Matrix out = sigma.second_moment();
  if (sigma.is_uniform()) {
    require_isotropic(q, sigma);
    const double f = radial(probe_directions(sigma.dimension()).front());
    for (double& v : out.a) v *= f;
    return out;
  }
  Matrix acc(sigma.dimension());
  for (const auto& atom : sigma.atoms()) {
    const double f = atom.weight * radial(atom.direction);
    for (std::size_t i = 0; i < acc.n; ++i)
      for (std::size_t j = 0; j < acc.n; ++j)
        acc(i, j) += f * atom.direction[i] * atom.direction[j];
  }
  return acc;
}

Matrix small_jump_covariance(double alpha, const SphericalMeasure& sigma, double eps) {
  if (!(eps > 0.0)) throw DomainError("small_jump_covariance: eps must be positive");
  Matrix out = sigma.second_moment();
  const double f = std::pow(eps, 2.0 - alpha) / (2.0 - alpha);
  for (double& v : out.a) v *= f;
  return out;
}

void add_stable_residual(SeriesTerms& terms, double alpha, const SphericalMeasure& sigma) {
  require_symmetric(sigma, "small-jump residual");
  terms.diffusion = small_jump_covariance(alpha, sigma, terms.largest_discarded);
}

void add_layered_residual(SeriesTerms& terms, const LayeredQ& q, const SphericalMeasure& sigma) {
  require_symmetric(sigma, "small-jump residual");
  terms.diffusion = small_jump_covariance(q, sigma, terms.largest_discarded);
}

// ---------------------------------------------------------------------------
// Paths

SamplePath SamplePath::build(std::size_t dim, double horizon, Vec grid, Vec jump_times, Vec jumps,
                             std::vector<std::size_t> jump_terms, Vec drift,
                             const Vec* gaussian_values) {
  if (grid.empty()) throw DomainError("path grid must not be empty");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw DomainError("path grid must be increasing");
  if (grid.front() < 0.0 || grid.back() > horizon * (1.0 + 1e-12))
    throw DomainError("path grid must lie in [0, T]");
  if (drift.size() != dim) throw DomainError("drift dimension mismatch");
  SamplePath p;
  p.dim_ = dim;
  p.horizon_ = horizon;
  p.grid_ = std::move(grid);
  p.jump_times_ = std::move(jump_times);
  p.jumps_ = std::move(jumps);
  p.jump_terms_ = std::move(jump_terms);
  p.drift_ = std::move(drift);
  p.values_.assign(p.grid_.size() * dim, 0.0);
  Kahan acc(dim);
  std::size_t j = 0;
  for (std::size_t k = 0; k < p.grid_.size(); ++k) {
    const double t = p.grid_[k];
    while (j < p.jump_times_.size() && p.jump_times_[j] <= t) acc.add(p.jump(j++));
    for (std::size_t c = 0; c < dim; ++c) p.values_[k * dim + c] = acc.sum[c] + p.drift_[c] * t;
  }
  if (gaussian_values) {
    p.has_gaussian_ = true;
    for (std::size_t i = 0; i < p.values_.size(); ++i) p.values_[i] += (*gaussian_values)[i];
  }
  return p;
}

SamplePath SamplePath::from_values(std::size_t dim, double horizon, Vec grid, Vec values) {
  if (values.size() != grid.size() * dim) throw DomainError("values do not match the grid");
  SamplePath p = build(dim, horizon, std::move(grid), {}, {}, {}, Vec(dim, 0.0));
  p.values_ = std::move(values);
  p.has_gaussian_ = true;
  return p;
}

Vec SamplePath::jump_part(double t) const {
  Kahan acc(dim_);
  for (std::size_t j = 0; j < jump_times_.size() && jump_times_[j] <= t; ++j) acc.add(jump(j));
  Vec out(dim_);
  for (std::size_t c = 0; c < dim_; ++c) out[c] = acc.sum[c] + drift_[c] * t;
  return out;
}

double SamplePath::sup_norm() const {
  double best = 0.0;
  if (has_gaussian_) {
    for (std::size_t k = 0; k < grid_.size(); ++k)
      best = std::max(best, norm(value_vec(k)));
    return best;
  }
  Kahan acc(dim_);
  Vec v(dim_);
  auto probe = [&](double t) {
    for (std::size_t c = 0; c < dim_; ++c) v[c] = acc.sum[c] + drift_[c] * t;
    best = std::max(best, norm(v));
  };
  for (std::size_t j = 0; j < jump_times_.size(); ++j) {
    probe(jump_times_[j]);
    acc.add(jump(j));
    probe(jump_times_[j]);
  }
  probe(horizon_);
  return best;
}

Vec uniform_grid(double horizon, std::size_t n) {
  if (n == 0) throw DomainError("grid needs at least one interval");
  Vec g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
  g[n] = horizon;
  return g;
}

SamplePath build_path(const ShotNoiseDraw& draw, const SeriesTerms& terms, const Vec& grid) {
  const std::size_t d = draw.dimension;
  std::vector<std::size_t> order;
  order.reserve(draw.size());
  for (std::size_t i = 0; i < draw.size(); ++i)
    if (terms.magnitude[i] != 0.0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return draw.times[a] < draw.times[b] || (draw.times[a] == draw.times[b] && a < b);
  });
  Vec times(order.size()), jumps(order.size() * d);
  for (std::size_t j = 0; j < order.size(); ++j) {
    const std::size_t i = order[j];
    times[j] = draw.times[i];
    for (std::size_t c = 0; c < d; ++c) jumps[j * d + c] = terms.magnitude[i] * draw.direction(i)[c];
  }
  std::optional<Vec> gaussian;
  if (terms.diffusion.n == d && d > 0) {
    const Matrix chol = cholesky(terms.diffusion);
    Rng rng = make_rng(draw.seed, draw.path, Stream::Auxiliary);
    gaussian.emplace(grid.size() * d, 0.0);
    Vec walk(d, 0.0), inc(d);
    double prev = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (grid[k] > prev) {
        gaussian_increment(rng, chol, grid[k] - prev, inc.data());
        for (std::size_t c = 0; c < d; ++c) walk[c] += inc[c];
      }
      prev = grid[k];
      std::copy(walk.begin(), walk.end(), gaussian->begin() + k * d);
    }
  }
  return SamplePath::build(d, draw.horizon, grid, std::move(times), std::move(jumps),
                           std::move(order), terms.drift, gaussian ? &*gaussian : nullptr);
}

Vec terminal_value(const ShotNoiseDraw& draw, const SeriesTerms& terms, std::optional<double> t) {
  const double at = t.value_or(draw.horizon);
  const std::size_t d = draw.dimension;
  Kahan acc(d);
  Vec jump(d);
  for (std::size_t i = 0; i < draw.size(); ++i) {
    if (terms.magnitude[i] == 0.0 || draw.times[i] > at) continue;
    for (std::size_t c = 0; c < d; ++c) jump[c] = terms.magnitude[i] * draw.direction(i)[c];
    acc.add(jump.data());
  }
  Vec out(d);
  for (std::size_t c = 0; c < d; ++c) out[c] = acc.sum[c] + terms.drift[c] * at;
  if (terms.diffusion.n == d && d > 0) {
    Rng rng = make_rng(draw.seed, draw.path, Stream::Auxiliary);
    Vec inc(d);
    gaussian_increment(rng, cholesky(terms.diffusion), at, inc.data());
    for (std::size_t c = 0; c < d; ++c) out[c] += inc[c];
  }
  return out;
}

SamplePath stable_path(double alpha, const SphericalMeasure& sigma, const ShotNoiseDraw& draw,
                       const Vec& grid) {
  return build_path(draw, stable_terms(alpha, sigma, draw), grid);
}

SamplePath layered_path_general(const LayeredQ& q, const SphericalMeasure& sigma,
                                const ShotNoiseDraw& draw, const Vec& grid) {
  return build_path(draw, layered_general_terms(q, sigma, draw), grid);
}

SamplePath layered_path_canonical(const LayeredQ& q, const SphericalMeasure& sigma,
                                  const ShotNoiseDraw& draw, const Vec& grid) {
  return build_path(draw, layered_canonical_terms(q, sigma, draw), grid);
}

SamplePath layered_path_rejection(const LayeredQ& q, const SphericalMeasure& sigma,
                                  const ShotNoiseDraw& draw, RejectionBase base, const Vec& grid) {
  return build_path(draw, layered_rejection_terms(q, sigma, draw, base), grid);
}

SamplePath mixed_path(const SphericalMeasure& sigma, const ShotNoiseDraw& draw, const Vec& grid) {
  return build_path(draw, mixed_terms(sigma, draw), grid);
}

// ---------------------------------------------------------------------------
// Parallel helpers

unsigned worker_count() {
  if (const char* env = std::getenv("LAYERLAB_THREADS")) {
    unsigned v = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace layerlab
