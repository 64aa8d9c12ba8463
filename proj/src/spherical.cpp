#include "layerlab/spherical.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "layerlab/quadrature.hpp"

namespace layerlab {

namespace {

constexpr double kUnitTolerance = 1e-12;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DomainError("sphere spec: bad number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_top_level(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == sep && depth == 0) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(s.substr(start));
  return parts;
}

// Normalizing constant of sin^{d-2}(theta) on [0, pi].
double polar_norm(std::size_t d) {
  const double k = static_cast<double>(d);
  return std::sqrt(std::numbers::pi) * std::tgamma((k - 1.0) / 2.0) / std::tgamma(k / 2.0);
}

}  // namespace

SphericalMeasure SphericalMeasure::discrete(std::vector<Atom> atoms) {
  if (atoms.empty()) throw DomainError("discrete spherical measure needs at least one atom");
  SphericalMeasure m;
  m.dim_ = atoms.front().direction.size();
  if (m.dim_ == 0) throw DomainError("spherical measure dimension must be positive");
  for (auto& atom : atoms) {
    if (atom.direction.size() != m.dim_) throw DomainError("atoms have mixed dimensions");
    if (!(atom.weight > 0.0) || !std::isfinite(atom.weight))
      throw DomainError("atom weights must be positive and finite");
    const double len = norm(atom.direction);
    if (!(len > 0.0) || !std::isfinite(len)) throw DomainError("atom direction must be nonzero");
    for (double& v : atom.direction) v /= len;
  }
  m.atoms_ = std::move(atoms);
  m.finalize();
  return m;
}

SphericalMeasure SphericalMeasure::uniform(std::size_t dimension, double total_mass) {
  if (dimension == 0) throw DomainError("spherical measure dimension must be positive");
  if (!(total_mass > 0.0) || !std::isfinite(total_mass))
    throw DomainError("uniform spherical measure needs positive mass");
  if (dimension == 1) return discrete({{{1.0}, total_mass / 2.0}, {{-1.0}, total_mass / 2.0}});
  SphericalMeasure m;
  m.dim_ = dimension;
  m.uniform_ = true;
  m.mass_ = total_mass;
  return m;
}

void SphericalMeasure::finalize() {
  cumulative_.clear();
  double acc = 0.0;
  for (const auto& atom : atoms_) {
    acc += atom.weight;
    cumulative_.push_back(acc);
  }
  mass_ = acc;
}

SphericalMeasure SphericalMeasure::parse(std::string_view spec) {
  spec = trim(spec);
  if (spec.starts_with("uniform:")) {
    auto rest = spec.substr(8);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw DomainError("expected uniform:d:mass");
    const double d = parse_number(rest.substr(0, colon));
    if (d < 1 || d != std::floor(d)) throw DomainError("uniform dimension must be a positive integer");
    return uniform(static_cast<std::size_t>(d), parse_number(rest.substr(colon + 1)));
  }
  if (spec.starts_with("discrete:")) {
    auto body = trim(spec.substr(9));
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
      throw DomainError("expected discrete:[(x1,...,xd):w, ...]");
    body = body.substr(1, body.size() - 2);
    std::vector<Atom> atoms;
    for (auto item : split_top_level(body, ',')) {
      item = trim(item);
      auto close = item.find(')');
      if (item.empty() || item.front() != '(' || close == std::string_view::npos ||
          close + 1 >= item.size() || item[close + 1] != ':')
        throw DomainError("bad atom '" + std::string(item) + "'");
      Atom atom;
      for (auto coord : split_top_level(item.substr(1, close - 1), ','))
        atom.direction.push_back(parse_number(coord));
      atom.weight = parse_number(item.substr(close + 2));
      atoms.push_back(std::move(atom));
    }
    for (const auto& a : atoms)
      if (a.direction.size() == 1 && std::fabs(std::fabs(a.direction[0]) - 1.0) > kUnitTolerance)
        throw DomainError("d = 1 directions must be +1 or -1");
    return discrete(std::move(atoms));
  }
  throw DomainError("unknown sphere spec '" + std::string(spec) + "'");
}

Vec SphericalMeasure::first_moment() const {
  Vec m(dim_, 0.0);
  if (uniform_) return m;
  for (const auto& atom : atoms_)
    for (std::size_t k = 0; k < dim_; ++k) m[k] += atom.weight * atom.direction[k];
  return m;
}

Matrix SphericalMeasure::second_moment() const {
  Matrix m(dim_);
  if (uniform_) {
    for (std::size_t k = 0; k < dim_; ++k) m(k, k) = mass_ / static_cast<double>(dim_);
    return m;
  }
  for (const auto& atom : atoms_)
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        m(i, j) += atom.weight * atom.direction[i] * atom.direction[j];
  return m;
}

bool SphericalMeasure::is_symmetric(double tol) const {
  if (uniform_) return true;
  for (const auto& a : atoms_) {
    double mirrored = 0.0, same = 0.0;
    for (const auto& b : atoms_) {
      double d_minus = 0.0, d_plus = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        d_minus = std::max(d_minus, std::fabs(a.direction[k] + b.direction[k]));
        d_plus = std::max(d_plus, std::fabs(a.direction[k] - b.direction[k]));
      }
      if (d_minus <= tol) mirrored += b.weight;
      if (d_plus <= tol) same += b.weight;
    }
    if (std::fabs(mirrored - same) > tol * std::max(1.0, same)) return false;
  }
  return true;
}

void SphericalMeasure::sample_direction_into(Rng& rng, double* out) const {
  if (uniform_) {
    double len2 = 0.0;
    do {
      len2 = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) {
        out[k] = standard_normal(rng);
        len2 += out[k] * out[k];
      }
    } while (len2 == 0.0);
    const double inv = 1.0 / std::sqrt(len2);
    for (std::size_t k = 0; k < dim_; ++k) out[k] *= inv;
    return;
  }
  std::size_t idx = 0;
  if (atoms_.size() > 1) {
    const double u = uniform_open(rng) * mass_;
    idx = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                                   cumulative_.begin());
    idx = std::min(idx, atoms_.size() - 1);
  }
  std::copy(atoms_[idx].direction.begin(), atoms_[idx].direction.end(), out);
}

Vec SphericalMeasure::sample_direction(Rng& rng) const {
  Vec v(dim_);
  sample_direction_into(rng, v.data());
  return v;
}

double SphericalMeasure::integrate_projection(const Vec& y,
                                              const std::function<double(double)>& g) const {
  if (!uniform_) {
    double s = 0.0;
    for (const auto& atom : atoms_) s += atom.weight * g(dot(y, atom.direction));
    return s;
  }
  const double ny = norm(y);
  if (ny == 0.0) return mass_ * g(0.0);
  const double p = static_cast<double>(dim_) - 2.0;
  auto f = [&](double theta) { return std::pow(std::sin(theta), p) * g(ny * std::cos(theta)); };
  const double half = std::numbers::pi / 2.0;
  const double v = quad::finite(f, 0.0, half, 1e-13, 1e-11) +
                   quad::finite(f, half, std::numbers::pi, 1e-13, 1e-11);
  return mass_ * v / polar_norm(dim_);
}

SphericalMeasure SphericalMeasure::reweighted(const std::function<double(const Vec&)>& c) const {
  SphericalMeasure m;
  m.dim_ = dim_;
  if (uniform_) {
    const auto probes = probe_directions(dim_);
    const double c0 = c(probes.front());
    for (const auto& p : probes)
      if (std::fabs(c(p) - c0) > 1e-12 * std::max(1.0, std::fabs(c0)))
        throw DomainError("direction-dependent density over a uniform spherical measure");
    if (c0 < 0.0) throw DomainError("spherical density must be nonnegative");
    if (c0 > 0.0) {
      m.uniform_ = true;
      m.mass_ = mass_ * c0;
    }
    return m;
  }
  for (const auto& atom : atoms_) {
    const double w = c(atom.direction) * atom.weight;
    if (w < 0.0 || !std::isfinite(w)) throw DomainError("spherical density must be nonnegative");
    if (w > 0.0) m.atoms_.push_back({atom.direction, w});
  }
  m.finalize();
  return m;
}

std::string SphericalMeasure::to_string() const {
  std::ostringstream out;
  out.precision(17);
  if (uniform_) {
    out << "uniform:" << dim_ << ":" << mass_;
    return out.str();
  }
  out << "discrete:[";
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) out << ",";
    out << "(";
    for (std::size_t k = 0; k < dim_; ++k) out << (k ? "," : "") << atoms_[i].direction[k];
    out << "):" << atoms_[i].weight;
  }
  out << "]";
  return out.str();
}

std::vector<Vec> probe_directions(std::size_t dimension) {
  std::vector<Vec> out;
  Rng rng(0x5eedULL + dimension);
  for (std::size_t k = 0; k < dimension; ++k) {
    Vec e(dimension, 0.0);
    e[k] = 1.0;
    out.push_back(e);
    e[k] = -1.0;
    out.push_back(e);
  }
  if (dimension > 1) {
    for (int i = 0; i < 16; ++i) {
      Vec v(dimension);
      double len2 = 0.0;
      for (double& x : v) {
        x = standard_normal(rng);
        len2 += x * x;
      }
      for (double& x : v) x /= std::sqrt(len2);
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace layerlab
