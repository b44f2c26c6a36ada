#include "futureyou/stats/special.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace futureyou::stats {
namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw DomainError("incomplete beta continued fraction did not converge");
}

double log_beta_front(double a, double b, double x) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
}

}  // namespace

double incomplete_beta(double a, double b, double x, bool upper) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta needs positive shape parameters");
  if (std::isnan(x) || x < 0.0 || x > 1.0) throw DomainError("incomplete beta argument outside [0, 1]");
  if (x == 0.0) return upper ? 1.0 : 0.0;
  if (x == 1.0) return upper ? 0.0 : 1.0;
  const double front = std::exp(log_beta_front(a, b, x));
  // The fraction converges fast on the side of the mean; the other tail
  // is its complement, I_x(a, b) = 1 - I_{1-x}(b, a).
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double lower = front * beta_cf(a, b, x) / a;
    return upper ? 1.0 - lower : lower;
  }
  const double tail = front * beta_cf(b, a, 1.0 - x) / b;
  return upper ? tail : 1.0 - tail;
}

double gamma_p_series(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("incomplete gamma needs a > 0 and x >= 0");
  if (x == 0.0) return 0.0;
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw DomainError("incomplete gamma series did not converge");
}

double gamma_q_continued_fraction(double a, double x) {
  if (!(a > 0.0) || !(x > 0.0)) throw DomainError("incomplete gamma fraction needs a > 0 and x > 0");
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  throw DomainError("incomplete gamma continued fraction did not converge");
}

double gamma_p(double a, double x) {
  if (!(a > 0.0) || std::isnan(x) || x < 0.0) throw DomainError("incomplete gamma needs a > 0 and x >= 0");
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || std::isnan(x) || x < 0.0) throw DomainError("incomplete gamma needs a > 0 and x >= 0");
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_continued_fraction(a, x);
}

// Acklam's rational approximation followed by one Halley step.
double normal_quantile(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) throw DomainError("normal quantile needs p in [0, 1]");
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement. In the upper half work with the upper tail so the
  // residual keeps its relative precision.
  const double sqrt2pi = std::sqrt(2.0 * M_PI);
  double e;
  if (x <= 0.0) {
    e = 0.5 * std::erfc(-x / M_SQRT2) - p;
  } else {
    e = (1.0 - p) - 0.5 * std::erfc(x / M_SQRT2);
  }
  const double u = e * sqrt2pi * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace futureyou::stats
