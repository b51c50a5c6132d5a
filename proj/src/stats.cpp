#include "fairgate/stats.hpp"

#include <cmath>
#include <limits>

namespace fairgate {

namespace {

// Lower regularized gamma P(a, x) by power series; converges for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a, x) by modified Lentz continued fraction;
// converges for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || !std::isfinite(a) || !std::isfinite(x)) {
    throw Error(Errc::InvalidConfig, "gamma_q requires a > 0 and finite x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, int dof) {
  if (dof < 1) throw Error(Errc::InvalidConfig, "chi2_sf requires dof >= 1");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * x);
}

Chi2Result chi2_test(const std::array<std::array<long, 2>, 2>& table) {
  const double r0 = static_cast<double>(table[0][0] + table[0][1]);
  const double r1 = static_cast<double>(table[1][0] + table[1][1]);
  const double c0 = static_cast<double>(table[0][0] + table[1][0]);
  const double c1 = static_cast<double>(table[0][1] + table[1][1]);
  if (r0 <= 0.0 || r1 <= 0.0 || c0 <= 0.0 || c1 <= 0.0) {
    throw Error(Errc::ZeroMarginal, "chi2_test: zero row or column marginal");
  }
  const double total = r0 + r1;
  const double rows[2] = {r0, r1};
  const double cols[2] = {c0, c1};

  double stat = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / total;
      const double diff = static_cast<double>(table[i][j]) - expected;
      stat += diff * diff / expected;
    }
  }

  Chi2Result res;
  res.statistic = stat;
  res.dof = 1;
  res.p_value = chi2_sf(stat, 1);
  return res;
}

}  // namespace fairgate
