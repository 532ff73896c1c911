#pragma once

// Internal numeric helpers shared by the coefficient-model and limit-law
// translation units. Not installed.

#include <vector>

namespace longmem::detail {

struct GLRule {
  std::vector<double> x;  // nodes on [0, 1]
  std::vector<double> w;
};

// Cached Gauss-Legendre rule mapped to [0, 1].
const GLRule& gauss_legendre(int n);

// Slowly varying damping factor lambda(u) = 1 / (1 + 1/log(e + u)).
double lambda_log_damped(double x);
// d/dx log lambda(x).
double dlog_lambda(double x);

struct TailSum {
  double value = 0.0;
  double bound = 0.0;  // estimate of the remaining error
};

// sum_{j >= j0} j^a (j+h)^b [* lambda(j) lambda(j+h) when damped].
// Requires a + b < -1 and j0 >= 1. Uses the midpoint Euler-Maclaurin form
// sum = int_{j0-1/2}^inf f + f'(j0-1/2)/24 + O(f'''), with the integral done
// by composite Gauss-Legendre panels in log space.
TailSum power_pair_tail(double a, double b, double h, double j0, bool damped);

}  // namespace longmem::detail
