#pragma once

#include "futureyou/error.hpp"

namespace futureyou::stats {

class DomainError : public Error {
 public:
  using Error::Error;
};

// Regularized incomplete beta I_x(a, b). `upper` returns 1 - I_x(a, b)
// evaluated directly, without cancellation.
double incomplete_beta(double a, double b, double x, bool upper = false);

// Regularized lower and upper incomplete gamma P(a, x), Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Same quantities forced through one evaluation path; used to cross-check
// the switch point in tests.
double gamma_p_series(double a, double x);
double gamma_q_continued_fraction(double a, double x);

// Inverse standard normal CDF.
double normal_quantile(double p);

}  // namespace futureyou::stats
