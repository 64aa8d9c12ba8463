// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// ACCEPTANCE_ONLY=3,7 restricts the run to the listed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "layerlab/girsanov.hpp"
#include "layerlab/limits.hpp"
#include "layerlab/qfunc.hpp"
#include "layerlab/series.hpp"
#include "layerlab/special.hpp"
#include "layerlab/spherical.hpp"
#include "layerlab/stats.hpp"

using namespace layerlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

const SphericalMeasure& pm1() {
  static const auto s = SphericalMeasure::parse("discrete:[(1):1,(-1):1]");
  return s;
}

constexpr std::size_t kN = 10000;

template <class TermsFn>
std::vector<Vec> terminals(std::uint64_t seed, std::size_t n, double horizon, const SphericalMeasure& sigma,
                           double gamma_cap, TermsFn terms_of, const DrawOptions& opts = {}) {
  std::vector<Vec> xs(n);
  parallel_for(n, [&](std::size_t i) {
    const auto draw = draw_shot_noise(seed, i, horizon, sigma, gamma_cap, opts);
    xs[i] = terminal_value(draw, terms_of(draw));
  });
  return xs;
}

// ---------------------------------------------------------------------------

Outcome stable_marginals() {
  Outcome o{true, ""};
  const auto grid = default_cf_grid(1);
  for (double a : {0.5, 1.0, 1.5}) {
    const auto xs = terminals(101, kN, 1.0, pm1(), 2000.0, [&](const ShotNoiseDraw& d) {
      auto t = stable_terms(a, pm1(), d);
      add_stable_residual(t, a, pm1());
      return t;
    });
    const double dist = cf_distance(xs, CFTarget::stable(a, pm1(), stable_series_eta(a, pm1())), grid);
    o.pass = o.pass && dist < 0.06;
    o.detail += "alpha=" + num(a) + ": " + num(dist) + "  ";
  }
  return o;
}

Outcome layered_marginals() {
  Outcome o{true, ""};
  const auto grid = default_cf_grid(1);
  for (auto [a, b] : {std::pair{1.3, 1.9}, std::pair{1.1, 2.5}, std::pair{1.9, 1.3}}) {
    const auto q = LayeredQ::canonical(a, b, pm1().total_mass());
    const auto xs = terminals(102, kN, 1.0, pm1(), 2000.0, [&](const ShotNoiseDraw& d) {
      auto t = layered_general_terms(q, pm1(), d);
      add_layered_residual(t, q, pm1());
      return t;
    });
    const double dist = cf_distance(xs, CFTarget::layered(q, pm1(), Vec{0.0}), grid);
    o.pass = o.pass && dist < 0.06;
    o.detail += "(" + num(a) + "," + num(b) + "): " + num(dist) + "  ";
  }
  return o;
}

// Rescaled terminals of the layered process at horizon h with a fixed term budget.
std::vector<Vec> rescaled_terminals(std::uint64_t seed, const LayeredQ& q, const LimitSpec& spec,
                                    double budget) {
  const double h = spec.h;
  auto xs = terminals(seed, kN, h, pm1(), budget / h, [&](const ShotNoiseDraw& d) {
    auto t = layered_general_terms(q, pm1(), d);
    add_layered_residual(t, q, pm1());
    return t;
  });
  for (auto& x : xs) x = rescale_value(x, h, spec);
  return xs;
}

Outcome short_time_limit() {
  Outcome o{true, ""};
  const auto grid = default_cf_grid(1);
  for (auto [a, b] : {std::pair{1.3, 1.9}, std::pair{1.9, 1.3}}) {
    const auto q = LayeredQ::canonical(a, b, pm1().total_mass());
    const auto spec = short_time_spec(q, pm1(), 1e-3);
    const auto xs = rescaled_terminals(103, q, spec, 2e4);
    const double dist = cf_distance(xs, CFTarget::stable(a, *spec.target_sigma, Vec{0.0}), grid);
    o.pass = o.pass && dist < 0.07;
    o.detail += "(" + num(a) + "," + num(b) + ") -> " + num(spec.index) + ": " + num(dist) + "  ";
  }
  return o;
}

Outcome long_time_stable_limit() {
  const auto q = LayeredQ::canonical(1.3, 1.9, pm1().total_mass());
  const auto spec = long_time_spec(q, pm1(), 1e3);
  const auto xs = rescaled_terminals(104, q, spec, 2e4);
  const CFTarget target = CFTarget::stable(1.9, *spec.target_sigma, Vec{0.0});
  const double dist = cf_distance(xs, target, default_cf_grid(1));
  // Distance of the exact law of the rescaled X_h from the same target.
  const double scale = std::pow(spec.h, -1.0 / spec.index);
  double exact = 0.0;
  for (const auto& y : default_cf_grid(1)) {
    const double e = (radial_exponent(q, Vec{1.0}, y[0] * scale) + radial_exponent(q, Vec{-1.0}, -y[0] * scale)).real();
    exact = std::max(exact, std::abs(std::exp(spec.h * e) - target(y)));
  }
  return {dist < 0.07, "distance " + num(dist) + " (exact law at this h: " + num(exact) + ")"};
}

Outcome long_time_gaussian_limit() {
  const auto q = LayeredQ::canonical(1.1, 2.5, pm1().total_mass());
  const auto spec = long_time_spec(q, pm1(), 1e3);
  const auto xs = rescaled_terminals(105, q, spec, 2e4);
  const double v = spec.target_covariance(0, 0);
  // Second moment of the Levy measure, kappa (1/(2-a) + 1/(b-2)) with kappa = 1.
  const double closed = 1.0 / (2.0 - 1.1) + 1.0 / (2.5 - 2.0);
  const double dist = cf_distance(xs, CFTarget::gaussian(spec.target_covariance), default_cf_grid(1));
  double m = 0.0, s2 = 0.0;
  for (const auto& x : xs) m += x[0];
  m /= static_cast<double>(xs.size());
  for (const auto& x : xs) s2 += (x[0] - m) * (x[0] - m);
  s2 /= static_cast<double>(xs.size() - 1);
  const bool pass = dist < 0.07 && std::fabs(s2 - closed) < 0.1 * closed && std::fabs(v - closed) < 1e-6 * closed;
  return {pass, "distance " + num(dist) + ", variance " + num(s2) + " vs " + num(closed) + " (quadrature " +
                    num(v) + ")"};
}

Outcome inverse_tail_roundtrip() {
  const Vec plus{1.0};
  const auto canon = LayeredQ::canonical(1.3, 1.9, 2.0);
  auto qc = [](double r, const Vec&) { return std::pow(r, -2.3) * std::pow(1.0 + r, 1.3 - 1.9); };
  auto one = [](const Vec&) { return 1.0; };
  const auto custom = LayeredQ::custom(1.3, 1.9, qc, one, one, {plus, Vec{-1.0}});
  double worst_c = 0.0, worst_s = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double r = std::pow(10.0, -6.0 + 12.0 * i / 999.0);
    worst_c = std::max(worst_c, std::fabs(canon.inverse_tail(canon.tail_integral(r, plus), plus) - r) / r);
    worst_s = std::max(worst_s, std::fabs(custom.inverse_tail(custom.tail_integral(r, plus), plus) - r) / r);
  }
  const double boundary = canon.inverse_tail(canon.tail_integral(1.0, plus), plus);
  const double example = LayeredQ::canonical(0.5, 1.5, 2.0).inverse_tail(1.0 / 3.0, plus);
  const bool pass = worst_c < 1e-8 && worst_s < 1e-8 && boundary == 1.0 && example == 1.0;
  return {pass, "canonical " + num(worst_c) + ", custom " + num(worst_s) + ", boundary " +
                    (boundary == 1.0 && example == 1.0 ? "exactly 1" : num(boundary))};
}

struct RnRun {
  WeightedEstimate weight, inverse_weight, reweighted, direct;
};

// Stable paths under the alpha-stable law with sigma1, and layered canonical
// paths, as in the rn command.
const RnRun& rn_run() {
  static const RnRun run = [] {
    const auto q = LayeredQ::canonical(1.3, 1.9, pm1().total_mass());
    const auto sigma1 = derive_sigma_pair(q, pm1()).sigma1;
    const double kappa = sigma1.total_mass();
    const Vec grid{0.0, 1.0};
    auto exceeds = [](const SamplePath& p) { return p.sup_norm() > 3.0 ? 1.0 : 0.0; };
    std::vector<WeightedValue> wp(kN), wq(kN), rw(kN), dr(kN);
    parallel_for(kN, [&](std::size_t i) {
      const auto ds = draw_shot_noise(107, i, 1.0, sigma1, 1e4);
      const double u1 = u_series(ds, 1.3, 1.9, kappa, 1.0, USeries::Prime);
      wp[i] = {1.0, u1, MeasureTag::Q};
      rw[i] = {exceeds(stable_path(1.3, sigma1, ds, grid)), u1, MeasureTag::Q};
      const auto dl = draw_shot_noise(107, kN + i, 1.0, pm1(), 1e4);
      const double u2 = u_series(dl, 1.3, 1.9, kappa, 1.0, USeries::DoublePrime);
      wq[i] = {1.0, -u2, MeasureTag::P};
      dr[i] = {exceeds(layered_path_canonical(q, pm1(), dl, grid)), 0.0, MeasureTag::P};
    });
    return RnRun{reweighted_expectation(wp), reweighted_expectation(wq), reweighted_expectation(rw),
                 reweighted_expectation(dr)};
  }();
  return run;
}

Outcome rn_normalization() {
  const auto& r = rn_run();
  const double z1 = (r.weight.estimate - 1.0) / r.weight.std_error;
  const double z2 = (r.inverse_weight.estimate - 1.0) / r.inverse_weight.std_error;
  return {std::fabs(z1) < 4.0 && std::fabs(z2) < 4.0,
          "mean e^U' " + num(r.weight.estimate) + " (z " + num(z1) + "), mean e^-U'' " +
              num(r.inverse_weight.estimate) + " (z " + num(z2) + ")"};
}

Outcome importance_sampling() {
  const auto& r = rn_run();
  const double se = std::hypot(r.reweighted.std_error, r.direct.std_error);
  const double z = (r.reweighted.estimate - r.direct.estimate) / se;
  return {std::fabs(z) < 4.0, "reweighted " + num(r.reweighted.estimate) + ", direct " +
                                  num(r.direct.estimate) + ", z " + num(z)};
}

Outcome jump_sum_u() {
  const auto q = LayeredQ::canonical(1.3, 1.9, pm1().total_mass());
  const double kappa = pm1().total_mass() / q.mass();
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto draw = draw_shot_noise(109, i, 1.0, pm1(), 1000.0);
    const auto path = layered_path_canonical(q, pm1(), draw, {0.0, 1.0});
    worst = std::max(worst, std::fabs(u_from_jumps(q, pm1(), path, 1.0).value - u_canonical(1.3, 1.9, kappa, path, 1.0)));
  }
  return {worst < 1e-8, "max difference " + num(worst)};
}

Outcome tail_dichotomy() {
  Outcome o{true, ""};
  const std::size_t n = 100000;
  for (auto [a, b] : {std::pair{1.3, 1.9}, std::pair{1.9, 1.3}}) {
    const auto q = LayeredQ::canonical(a, b, pm1().total_mass());
    const auto xs = terminals(110, n, 1.0, pm1(), 2000.0,
                              [&](const ShotNoiseDraw& d) { return layered_general_terms(q, pm1(), d); });
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) mags[i] = std::fabs(xs[i][0]);
    const double est = hill_tail_index(mags);
    const auto ci = bootstrap_ci(mags, [](const std::vector<double>& v) { return hill_tail_index(v); }, 200, 0.95, 110);
    o.pass = o.pass && std::fabs(est - b) <= 0.3 && ci.lo - 0.3 <= b && b <= ci.hi + 0.3;
    o.detail += "beta=" + num(b) + ": " + num(est) + " [" + num(ci.lo) + ", " + num(ci.hi) + "]  ";
  }
  return o;
}

// Ratios of median grid p-variation on n, 4n and 16n points.
Outcome p_variation_dichotomy() {
  Outcome o{true, ""};
  constexpr std::size_t paths = 50, n0 = 4000;
  for (auto [a, b] : {std::pair{1.3, 1.9}, std::pair{1.9, 1.3}}) {
    const auto q = LayeredQ::canonical(a, b, pm1().total_mass());
    const double lo = a - 0.3, hi = a + 0.3;
    std::vector<double> v_lo[3], v_hi[3];
    for (int k = 0; k < 3; ++k) v_lo[k].resize(paths), v_hi[k].resize(paths);
    parallel_for(paths, [&](std::size_t i) {
      const auto draw = draw_shot_noise(111, i, 1.0, pm1(), 1e5);
      auto terms = layered_general_terms(q, pm1(), draw);
      add_layered_residual(terms, q, pm1());
      std::size_t n = n0;
      for (int k = 0; k < 3; ++k, n *= 4) {
        const auto path = build_path(draw, terms, uniform_grid(1.0, n));
        v_lo[k][i] = p_variation(path, lo);
        v_hi[k][i] = p_variation(path, hi);
      }
    });
    const double l4 = median(v_lo[1]) / median(v_lo[0]), l16 = median(v_lo[2]) / median(v_lo[0]);
    const double h4 = median(v_hi[1]) / median(v_hi[0]), h16 = median(v_hi[2]) / median(v_hi[0]);
    o.pass = o.pass && l4 > 1.0 && l16 > 1.5 && std::fabs(h4 - 1.0) < 0.2 && std::fabs(h16 - 1.0) < 0.2;
    o.detail += "alpha=" + num(a) + ": p-0.3 x" + num(l4) + "/x" + num(l16) + ", p+0.3 x" + num(h4) + "/x" +
                num(h16) + "  ";
  }
  return o;
}

Outcome mixed_degeneracy() {
  DrawOptions opts;
  opts.mix = MixingLaw::point(1.4);
  std::size_t mismatches = 0, terms = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto draw = draw_shot_noise(112, i, 1.0, pm1(), 2000.0, opts);
    const auto a = mixed_terms(pm1(), draw).magnitude;
    const auto b = stable_terms(1.4, pm1(), draw).magnitude;
    if (a.size() != b.size()) return {false, "term counts differ"};
    for (std::size_t k = 0; k < a.size(); ++k) mismatches += a[k] != b[k];
    terms += a.size();
  }
  return {mismatches == 0, std::to_string(mismatches) + " of " + std::to_string(terms) + " magnitudes differ"};
}

Outcome rejection_series() {
  const auto q = LayeredQ::canonical(1.3, 1.9, pm1().total_mass());
  const auto grid = default_cf_grid(1);
  const auto oracle = evaluate_target(CFTarget::layered(q, pm1(), Vec{0.0}), grid);
  const auto canon = terminals(113, kN, 1.0, pm1(), 2000.0, [&](const ShotNoiseDraw& d) {
    auto t = layered_canonical_terms(q, pm1(), d);
    add_layered_residual(t, q, pm1());
    return t;
  });
  const double d_canon = cf_distance(canon, oracle, grid);
  Outcome o{d_canon < 0.07, "canonical vs oracle " + num(d_canon) + "  "};
  DrawOptions opts;
  opts.rejects = true;
  for (auto [base, label] : {std::pair{RejectionBase::Inner, "inner"}, std::pair{RejectionBase::Outer, "outer"}}) {
    const auto xs = terminals(base == RejectionBase::Inner ? 114 : 115, kN, 1.0, pm1(), 2000.0,
                              [&](const ShotNoiseDraw& d) {
                                auto t = layered_rejection_terms(q, pm1(), d, base);
                                add_layered_residual(t, q, pm1());
                                return t;
                              },
                              opts);
    const double d_oracle = cf_distance(xs, oracle, grid);
    const double d_canonical = ecf_distance(xs, canon, grid);
    o.pass = o.pass && d_oracle < 0.07 && d_canonical < 0.07;
    o.detail += std::string(label) + " vs oracle " + num(d_oracle) + ", vs canonical " + num(d_canonical) + "  ";
  }
  return o;
}

Outcome boundary_constant() {
  const double beta = 1.999;
  const double c = isotropic_constant(beta, 2, 2.0 * (2.0 - beta));
  return {std::fabs(c - 0.5) < 2e-3, "c = " + num(c)};
}

Outcome independent_components() {
  const double alpha = 1.95, a1 = 1.0, a2 = 4.0;
  const double w = (2.0 - alpha) / 2.0;
  const auto sigma = SphericalMeasure::discrete(
      {{{1.0, 0.0}, w * a1}, {{-1.0, 0.0}, w * a1}, {{0.0, 1.0}, w * a2}, {{0.0, -1.0}, w * a2}});
  const double k = std::sqrt(special::kPi) * std::tgamma(1.0 + (2.0 - alpha) / 2.0) /
                   (std::pow(2.0, alpha - 2.0) * alpha * std::tgamma((1.0 + alpha) / 2.0));
  const auto xs = terminals(116, kN, 1.0, sigma, 2000.0, [&](const ShotNoiseDraw& d) {
    auto t = stable_terms(alpha, sigma, d);
    add_stable_residual(t, alpha, sigma);
    return t;
  });
  double m[2] = {0.0, 0.0}, s[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (const auto& x : xs)
    for (int i = 0; i < 2; ++i) m[i] += x[i] / static_cast<double>(kN);
  for (const auto& x : xs)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s[i][j] += (x[i] - m[i]) * (x[j] - m[j]) / static_cast<double>(kN - 1);
  const double t11 = k * a1, t22 = k * a2;
  const double diff = std::sqrt(std::pow(s[0][0] - t11, 2) + 2.0 * s[0][1] * s[0][1] + std::pow(s[1][1] - t22, 2));
  const double rel = diff / std::hypot(t11, t22);
  const double rho = s[0][1] / std::sqrt(s[0][0] * s[1][1]);
  const double law = cf_distance(xs, CFTarget::stable(alpha, sigma, Vec{0.0, 0.0}), default_cf_grid(2));
  return {rel < 0.15 && std::fabs(rho) < 0.05, "cf distance " + num(law) + ", covariance (" + num(s[0][0]) + ", " + num(s[0][1]) + ", " +
                                                  num(s[1][1]) + ") vs diag(" + num(t11) + ", " + num(t22) +
                                                  "), relative " + num(rel) + ", rho " + num(rho)};
}

std::set<int> selected() {
  std::set<int> ids;
  if (const char* env = std::getenv("ACCEPTANCE_ONLY")) {
    std::stringstream ss(env);
    std::string item;
    while (std::getline(ss, item, ',')) ids.insert(std::stoi(item));
  }
  return ids;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "stable marginal law", stable_marginals},
      {2, "layered marginal law", layered_marginals},
      {3, "short-time stable limit", short_time_limit},
      {4, "long-time stable limit", long_time_stable_limit},
      {5, "long-time Gaussian limit", long_time_gaussian_limit},
      {6, "inverse tail round trip", inverse_tail_roundtrip},
      {7, "Radon-Nikodym normalization", rn_normalization},
      {8, "importance sampling cross-check", importance_sampling},
      {9, "jump-sum U vs closed form", jump_sum_u},
      {10, "tail index dichotomy", tail_dichotomy},
      {11, "p-variation dichotomy", p_variation_dichotomy},
      {12, "mixed stable degeneracy", mixed_degeneracy},
      {13, "rejection series", rejection_series},
      {14, "boundary constant", boundary_constant},
      {15, "independent-component Brownian limit", independent_components},
  };
  const auto only = selected();
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%-4s %2d  %-38s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
