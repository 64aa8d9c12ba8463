#include "layerlab/special.hpp"

#include <array>
#include <atomic>
#include <cmath>

#include "layerlab/core.hpp"

namespace layerlab::special {

namespace {

std::atomic<bool> g_corrupt_zeta{false};

constexpr int kBorweinTerms = 40;

// d_k = n sum_{i=0}^{k} (n+i-1)! 4^i / ((n-i)! (2i)!), built by term ratios.
std::array<double, kBorweinTerms + 1> borwein_coefficients() {
  std::array<double, kBorweinTerms + 1> d{};
  const int n = kBorweinTerms;
  double term = 1.0 / n;  // i = 0: (n-1)!/n! = 1/n
  double sum = term;
  d[0] = n * sum;
  for (int i = 1; i <= n; ++i) {
    term *= 4.0 * (n + i - 1) * (n - i + 1) / ((2.0 * i - 1) * (2.0 * i));
    sum += term;
    d[i] = n * sum;
  }
  return d;
}

}  // namespace

double zeta(double s) {
  if (!(s > 0.0) || s == 1.0) throw DomainError("zeta: s must be positive and != 1");
  static const auto d = borwein_coefficients();
  const double dn = d[kBorweinTerms];
  double acc = 0.0;
  for (int k = 0; k < kBorweinTerms; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    acc += sign * (d[k] - dn) / std::pow(k + 1.0, s);
  }
  const double eta = -acc / dn;
  const double z = eta / (1.0 - std::pow(2.0, 1.0 - s));
  return g_corrupt_zeta.load() ? z * 1.01 + 0.05 : z;
}

double zeta_euler_maclaurin(double s) {
  if (!(s > 0.0) || s == 1.0) throw DomainError("zeta: s must be positive and != 1");
  constexpr int n = 20;
  constexpr std::array<double, 6> b2k = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66,
                                         -691.0 / 2730};
  double sum = 0.0;
  for (int k = 1; k < n; ++k) sum += std::pow(k, -s);
  const double N = n;
  sum += std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s);
  // rising = s (s+1) ... (s+2k-2), fact = (2k)!
  double rising = s, fact = 2.0;
  for (int k = 1; k <= 6; ++k) {
    sum += b2k[k - 1] / fact * rising * std::pow(N, -s - 2.0 * k + 1.0);
    rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
    fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
  }
  return sum;
}

double gamma(double x) { return std::tgamma(x); }

double stable_constant(double alpha) {
  if (alpha == 1.0) return kPi / 2.0;
  return std::fabs(std::tgamma(-alpha) * std::cos(kPi * alpha / 2.0));
}

void set_zeta_corruption_for_testing(bool on) { g_corrupt_zeta.store(on); }

}  // namespace layerlab::special
