#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "layerlab/series.hpp"
#include "layerlab/stats.hpp"

using namespace layerlab;

namespace {

const SphericalMeasure kPm = SphericalMeasure::parse("discrete:[(1):1,(-1):1]");

// int_0^1 (cos(s r) - 1 [+ s^2 r^2 / 2]) r^{-g-1} dr as a power series; the
// bracketed term is included when `second` is set.
double inner_series(double s, double g, bool second) {
  double sum = 0.0, term = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= -s * s / ((2.0 * k - 1.0) * (2.0 * k));
    if (second && k == 1) continue;
    sum += term / (2.0 * k - g);
  }
  return sum;
}

// int_0^inf (cos(s r) - 1 [+ s^2 r^2 / 2]) r^{-g-1} dr for g in (0,2) u (2,4).
double full_integral(double s, double g) {
  if (g == 1.0) return -std::numbers::pi / 2.0 * s;
  return std::tgamma(-g) * std::cos(std::numbers::pi * g / 2.0) * std::pow(s, g);
}

// Log CF of the canonical layered law over symmetric +-1 atoms of weight w.
double layered_exponent(double s, double a, double b, double mass, double w) {
  double outer = full_integral(s, b) - inner_series(s, b, b > 2.0);
  if (b > 2.0) outer -= s * s / (2.0 * (b - 2.0));
  return 2.0 * w / mass * (inner_series(s, a, false) + outer);
}

}  // namespace

TEST_CASE("stable CF basics") {
  CHECK(stable_cf(1.3, kPm, {0.0}, {0.0}) == Complex(1.0, 0.0));
  // symmetric: exp(-c_alpha sigma(S) |y|^alpha)
  const double c = std::sqrt(2.0 * std::numbers::pi);
  CHECK(stable_cf(0.5, kPm, {0.0}, {2.0}).real() == doctest::Approx(std::exp(-c * 2.0 * std::sqrt(2.0))));
  CHECK(std::fabs(stable_cf(0.5, kPm, {0.0}, {2.0}).imag()) < 1e-15);
  for (double y : {0.3, 1.0, 4.0}) {
    const Complex at1 = stable_cf(1.0, kPm, {0.0}, {y});
    CHECK(std::abs(stable_cf(1.0 + 1e-4, kPm, {0.0}, {y}) - at1) < 1e-3);
    CHECK(std::abs(stable_cf(1.0 - 1e-4, kPm, {0.0}, {y}) - at1) < 1e-3);
  }
  // A drift shifts the phase.
  const Complex shifted = stable_cf(1.5, kPm, {0.7}, {2.0});
  CHECK(std::arg(shifted) == doctest::Approx(1.4));
}

TEST_CASE("Levy-Khintchine quadrature against the power-series oracle") {
  for (auto [a, b] : {std::pair{1.3, 1.9}, std::pair{1.1, 2.5}, std::pair{1.9, 1.3}, std::pair{0.5, 1.0},
                      std::pair{1.0, 0.7}}) {
    const auto q = LayeredQ::canonical(a, b, 2.0);
    for (double s : {0.1, 0.5, 1.0, 2.5, 5.0}) {
      CAPTURE(a);
      CAPTURE(s);
      const Complex v = levy_khintchine_cf(q, kPm, {0.0}, {s});
      CHECK(v.real() == doctest::Approx(std::exp(layered_exponent(s, a, b, 2.0, 1.0))).epsilon(1e-9));
      CHECK(std::fabs(v.imag()) < 1e-12);
      CHECK(v.real() > 0.0);
      CHECK(v.real() <= 1.0);
    }
  }
  CHECK(levy_khintchine_cf(LayeredQ::canonical(1.3, 1.9, 2.0), kPm, {0.0}, {0.0}) == Complex(1.0, 0.0));
}

TEST_CASE("Levy-Khintchine quadrature reduces to the stable CF") {
  const auto sigma = SphericalMeasure::parse("discrete:[(1):1.5,(-1):0.5]");
  for (double a : {0.5, 1.0, 1.5}) {
    const auto q = LayeredQ::canonical(a, a, 1.0);
    for (double y : {-3.0, 0.4, 2.0}) {
      CAPTURE(a);
      CAPTURE(y);
      for (const Vec& eta : {Vec{0.0}, stable_series_eta(a, sigma)}) {
        const Complex lk = levy_khintchine_cf(q, sigma, eta, {y});
        CHECK(std::abs(lk - stable_cf(a, sigma, eta, {y})) < 1e-9);
      }
    }
  }
}

TEST_CASE("isotropic CF") {
  CHECK(isotropic_stable_cf(1.5, 3, 2.0, {0.0, 0.0, 0.0}) == Complex(1.0, 0.0));
  CHECK(std::fabs(isotropic_constant(1.999, 2, 2.0 * 0.001) - 0.5) < 2e-3);
  // Against the generic stable CF over the uniform measure.
  const auto u = SphericalMeasure::uniform(2, 3.0);
  const Vec y{0.6, -1.1};
  CHECK(std::abs(isotropic_stable_cf(1.4, 2, 3.0, y) - stable_cf(1.4, u, {0.0, 0.0}, y)) < 1e-9);
}

TEST_CASE("ECF and CF distance") {
  const std::vector<Vec> same(5, Vec{0.7});
  CHECK(std::abs(ecf(same, {2.0}) - std::exp(Complex(0.0, 1.4))) < 1e-15);
  CHECK(ecf(same, {0.0}) == Complex(1.0, 0.0));
  const auto g1 = CFTarget::gaussian(Matrix::identity(1));
  CHECK(cf_distance({Vec{0.0}}, g1, {Vec{1.0}}) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-14));
  CHECK(cf_distance({Vec{0.0}}, g1, {Vec{0.0}}) == 0.0);

  Rng rng(5);
  std::vector<Vec> xs(10000);
  for (auto& x : xs) x = {standard_normal(rng), standard_normal(rng)};
  CHECK(cf_distance(xs, CFTarget::gaussian(Matrix::identity(2)), default_cf_grid(2)) < 0.06);
  CHECK(default_cf_grid(1).size() == 21);
  CHECK(default_cf_grid(2).size() == 441);
  CHECK(default_cf_grid(3).size() == 61);
}

TEST_CASE("Hill estimator") {
  Rng rng(6);
  std::vector<double> pareto(100000);
  for (double& x : pareto) x = std::pow(uniform_open(rng), -0.5);
  const double b = hill_tail_index(pareto, 1000);
  CHECK(b > 1.8);
  CHECK(b < 2.2);
  CHECK_THROWS_AS(hill_tail_index(std::vector<double>(100, 3.0), 10), DomainError);
  CHECK_THROWS_AS(hill_tail_index(pareto, pareto.size()), DomainError);

  const auto q = LayeredQ::canonical(1.3, 1.9, 2.0);
  std::vector<double> mags(100000);
  parallel_for(mags.size(), [&](std::size_t i) {
    const auto draw = draw_shot_noise(51, i, 1.0, kPm, 200.0);
    mags[i] = norm(terminal_value(draw, layered_general_terms(q, kPm, draw)));
  });
  const double h = hill_tail_index(mags, 500);
  CHECK(h > 1.6);
  CHECK(h < 2.2);
}

TEST_CASE("bootstrap interval") {
  Rng rng(8);
  std::vector<double> xs(2000);
  for (double& x : xs) x = standard_normal(rng);
  const auto ci = bootstrap_ci(xs, [](const std::vector<double>& v) { return mean(v); }, 400, 0.95, 3);
  CHECK(ci.lo < mean(xs));
  CHECK(ci.hi > mean(xs));
  CHECK(ci.hi - ci.lo == doctest::Approx(2.0 * 1.96 / std::sqrt(2000.0)).epsilon(0.2));
}

TEST_CASE("moments and variation") {
  CHECK(empirical_moment({Vec{1.0, 0.0}, Vec{0.0, -1.0}}, 1.7) == doctest::Approx(1.0));
  CHECK(empirical_moment({Vec{0.0}, Vec{0.0}}, 0.5) == 0.0);
  const auto jump = SamplePath::build(1, 1.0, uniform_grid(1.0, 10), {0.45}, {2.0}, {0}, {0.0});
  CHECK(p_variation(jump, 2.0) == doctest::Approx(4.0));
  const auto flat = SamplePath::build(1, 1.0, uniform_grid(1.0, 10), {}, {}, {}, {0.0});
  CHECK(p_variation(flat, 1.5) == 0.0);
}

TEST_CASE("KS and chi-square") {
  // Kolmogorov distribution critical values.
  CHECK(ks_pvalue(1.3581 / 1000.0, 1e6) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(ks_pvalue(1.2238 / 1000.0, 1e6) == doctest::Approx(0.10).epsilon(1e-3));
  CHECK(ks_pvalue(1.6276 / 1000.0, 1e6) == doctest::Approx(0.01).epsilon(2e-3));
  CHECK(ks_pvalue(0.5 / 1000.0, 1e6) == doctest::Approx(0.96394).epsilon(1e-4));
  CHECK(ks_statistic({0.5}, [](double x) { return x; }) == doctest::Approx(0.5));
  CHECK(ks_two_sample({1.0, 2.0}, {3.0, 4.0}) == doctest::Approx(1.0));
  CHECK(chi_square_pvalue(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(chi_square_pvalue(5.991464547107979, 2.0) == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(median({3.0, 1.0, 2.0, 10.0}) == 2.5);
  CHECK(mean({1.0, 2.0}) == 1.5);
}
