#ifndef FAIRGATE_STATS_HPP
#define FAIRGATE_STATS_HPP

#include <array>

#include "fairgate/types.hpp"

namespace fairgate {

struct Chi2Result {
  double statistic = 0.0;
  int dof = 1;
  double p_value = 1.0;
};

// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double gamma_q(double a, double x);

// Upper tail of the chi-squared distribution: P(X >= x) with dof degrees of
// freedom, computed as Q(dof/2, x/2).
double chi2_sf(double x, int dof);

// Pearson chi-squared on a 2x2 contingency table (dof 1, no continuity
// correction). Expected counts come from the marginals; a zero row or column
// marginal raises ZeroMarginal.
Chi2Result chi2_test(const std::array<std::array<long, 2>, 2>& table);

}  // namespace fairgate

#endif  // FAIRGATE_STATS_HPP
