#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "layerlab/girsanov.hpp"
#include "layerlab/stats.hpp"

using namespace layerlab;

namespace {

const SphericalMeasure kPm = SphericalMeasure::parse("discrete:[(1):1,(-1):1]");

SamplePath jumps_at(Vec times, Vec sizes) {
  std::vector<std::size_t> idx(times.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return SamplePath::build(1, 1.0, {0.0, 1.0}, std::move(times), std::move(sizes), idx, {0.0});
}

LayeredQ smooth_custom(double a, double b) {
  auto q = [=](double r, const Vec&) { return std::pow(r, -a - 1.0) * std::pow(1.0 + r, a - b); };
  auto one = [](const Vec&) { return 1.0; };
  return LayeredQ::custom(a, b, q, one, one, {Vec{1.0}, Vec{-1.0}});
}

}  // namespace

TEST_CASE("phi") {
  const auto q = LayeredQ::canonical(1.3, 1.9, 2.0);
  CHECK(phi(q, {0.5}) == 0.0);
  CHECK(phi(q, {-1.0}) == 0.0);
  CHECK(phi(q, {2.0}) == doctest::Approx(-0.6 * std::log(2.0)).epsilon(1e-14));
  CHECK(phi(q, {-2.0}) == doctest::Approx(-0.41589).epsilon(1e-4));
  CHECK(std::fabs(phi(smooth_custom(1.3, 1.9), {1e-6})) < 0.06);
  CHECK_THROWS_AS(phi(q, {0.0}), DomainError);
}

TEST_CASE("drift compatibility") {
  const auto q = LayeredQ::canonical(1.3, 1.9, 2.0);
  const auto c = drift_compatibility(q, kPm, {0.4}, {0.4});
  CHECK(c.compatible);
  CHECK(c.required[0] == 0.0);
  CHECK_FALSE(drift_compatibility(q, kPm, {0.4}, {0.3}).compatible);
  const auto one = drift_compatibility(LayeredQ::canonical(1.0, 1.5, 2.0),
                                       SphericalMeasure::parse("discrete:[(1):3,(-1):1]"), {0.0}, {0.0});
  CHECK(one.required[0] == 0.0);
  CHECK(one.compatible);
  // alpha < 1: required = int xi sigma int_0^1 r q = (3 - 1) / (2 (1 - 0.5)).
  const auto low = drift_compatibility(LayeredQ::canonical(0.5, 1.5, 2.0),
                                       SphericalMeasure::parse("discrete:[(1):3,(-1):1]"), {2.0}, {0.0});
  CHECK(low.required[0] == doctest::Approx(2.0));
  CHECK(low.compatible);
}

TEST_CASE("nu gap: closed form against quadrature") {
  auto dens = [](double r, const Vec&) { return 0.5 * (r <= 1.0 ? std::pow(r, -2.3) : std::pow(r, -2.9)); };
  auto half = [](const Vec&) { return 0.5; };
  const auto custom = LayeredQ::custom(1.3, 1.9, dens, half, half, {Vec{1.0}, Vec{-1.0}});
  const auto canon = LayeredQ::canonical(1.3, 1.9, 2.0);
  for (double eps : {1e-3, 0.5, 1.0, 3.0})
    CHECK(nu_gap(custom, kPm, eps) == doctest::Approx(nu_gap(canon, kPm, eps)).epsilon(1e-8));
  // kappa (1/beta - 1/alpha) with kappa = 1
  CHECK(nu_gap(canon, kPm, 0.1) == doctest::Approx(1.0 / 1.9 - 1.0 / 1.3).epsilon(1e-14));
}

TEST_CASE("closed-form U") {
  CHECK(u_canonical(1.3, 1.9, 2.0, jumps_at({0.3}, {0.5}), 1.0) ==
        doctest::Approx(-(1.0 / 1.9 - 1.0 / 1.3) * 2.0).epsilon(1e-14));
  CHECK(u_canonical(1.3, 1.9, 2.0, jumps_at({}, {}), 1.0) == doctest::Approx(0.48583).epsilon(1e-5));
  CHECK(u_canonical(1.3, 1.9, 2.0, jumps_at({0.3}, {std::exp(1.0)}), 1.0) ==
        doctest::Approx(-0.11417).epsilon(1e-4));
  CHECK(u_canonical(1.3, 1.3, 2.0, jumps_at({0.3}, {5.0}), 1.0) == 0.0);
  // Jumps after t are ignored.
  CHECK(u_canonical(1.3, 1.9, 2.0, jumps_at({0.3, 0.8}, {std::exp(1.0), 9.0}), 0.5) ==
        doctest::Approx(-0.6 - 0.5 * (1.0 / 1.9 - 1.0 / 1.3) * 2.0).epsilon(1e-13));
}

TEST_CASE("jump-sum U agrees with the closed form") {
  const auto q = LayeredQ::canonical(1.3, 1.9, 2.0);
  const double kappa = 1.0;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto draw = draw_shot_noise(41, i, 1.0, kPm, 500.0);
    const auto path = layered_path_canonical(q, kPm, draw, {0.0, 1.0});
    const auto u = u_from_jumps(q, kPm, path, 1.0);
    CHECK(std::fabs(u.value - u_canonical(1.3, 1.9, kappa, path, 1.0)) < 1e-8);
    CHECK(u.cauchy_increment < 1e-12);
  }
}

TEST_CASE("series U") {
  ShotNoiseDraw empty;
  empty.horizon = 1.0;
  CHECK(u_series(empty, 1.3, 1.9, 2.0, 1.0, USeries::Prime) ==
        doctest::Approx(-(1.0 / 1.9 - 1.0 / 1.3) * 2.0).epsilon(1e-14));
  // U' from the stable arrivals equals the closed form on the stable path.
  const auto sigma1 = SphericalMeasure::parse("discrete:[(1):0.5,(-1):0.5]");
  const auto draw = draw_shot_noise(42, 0, 1.0, sigma1, 500.0);
  const auto path = stable_path(1.3, sigma1, draw, {0.0, 1.0});
  CHECK(u_series(draw, 1.3, 1.9, 1.0, 1.0, USeries::Prime) ==
        doctest::Approx(u_canonical(1.3, 1.9, 1.0, path, 1.0)).epsilon(1e-12));
}

TEST_CASE("reweighted expectation") {
  CHECK_THROWS_AS(reweighted_expectation(std::vector<WeightedValue>{}), DomainError);
  std::vector<WeightedValue> v{{1.0, std::log(2.0), MeasureTag::Q}, {1.0, std::log(4.0), MeasureTag::Q}};
  const auto e = reweighted_expectation(v);
  CHECK(e.estimate == doctest::Approx(3.0));
  CHECK(e.std_error == doctest::Approx(1.0));
  v.push_back({1.0, 600.0, MeasureTag::Q});
  CHECK(reweighted_expectation(v).clipped == 1);
  v.push_back({1.0, 0.0, MeasureTag::P});
  CHECK_THROWS_AS(reweighted_expectation(v), DomainError);

  // f = 1 under the stable law: mean of e^{U'} is 1.
  const auto sigma1 = SphericalMeasure::parse("discrete:[(1):0.5,(-1):0.5]");
  std::vector<WeightedPathSample> paths;
  for (std::size_t i = 0; i < 3000; ++i) {
    const auto draw = draw_shot_noise(43, i, 1.0, sigma1, 50.0);
    paths.push_back({stable_path(1.3, sigma1, draw, {0.0, 1.0}),
                     u_series(draw, 1.3, 1.9, 1.0, 1.0, USeries::Prime), MeasureTag::Q});
  }
  const auto w = reweighted_expectation(paths, [](const SamplePath&) { return 1.0; });
  CHECK(std::fabs(w.estimate - 1.0) < 4.0 * w.std_error);
}

TEST_CASE("Levy measure of U") {
  CHECK(u_levy_tail(1.3, 1.9, 2.0, -1e-12) == doctest::Approx(2.0 / 1.3).epsilon(1e-9));
  CHECK(u_levy_tail(1.3, 1.9, 2.0, -0.6) > u_levy_tail(1.3, 1.9, 2.0, -1.2));
  CHECK(u_levy_tail(1.9, 1.3, 2.0, 0.6) > u_levy_tail(1.9, 1.3, 2.0, 1.2));
  CHECK_THROWS_AS(u_levy_tail(1.3, 1.9, 2.0, 0.5), DomainError);
  CHECK_THROWS_AS(u_levy_tail(1.3, 1.3, 2.0, -0.5), DomainError);
}

TEST_CASE("jumps of U' follow the tail of its Levy measure") {
  const auto sigma1 = SphericalMeasure::parse("discrete:[(1):0.5,(-1):0.5]");
  const double horizon = 130000.0;
  const auto draw = draw_shot_noise(44, 0, horizon, sigma1, 1.0);
  const auto terms = stable_terms(1.3, sigma1, draw);
  std::vector<double> ys;
  for (double r : terms.magnitude)
    if (r > 1.0) ys.push_back((1.3 - 1.9) * std::log(r));
  REQUIRE(ys.size() > 90000);
  const double total = u_levy_tail(1.3, 1.9, 1.0, -1e-300);
  const double d = ks_statistic(ys, [&](double y) { return u_levy_tail(1.3, 1.9, 1.0, y) / total; });
  CHECK(ks_pvalue(d, double(ys.size())) > 1e-3);
  CHECK(double(ys.size()) / horizon == doctest::Approx(total).epsilon(0.02));
}

TEST_CASE("singularity witness") {
  const auto w = singularity_witness(LayeredQ::canonical(1.3, 1.9, 2.0), {1.0});
  CHECK(w.psi[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(w.psi[3] == doctest::Approx(0.6 * std::log(1e-3)).epsilon(1e-12));
  CHECK(w.psi[3] == doctest::Approx(-4.145).epsilon(1e-3));
  CHECK(w.direction == -1);
  const auto v = singularity_witness(LayeredQ::canonical(1.9, 1.3, 2.0), {1.0});
  CHECK(v.psi[3] == doctest::Approx(4.145).epsilon(1e-3));
  CHECK(v.direction == 1);
}
