#include "futureyou/stats/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "futureyou/stats/special.hpp"

namespace futureyou::stats {
namespace {

// Gauss-Legendre 16-point rule on [-1, 1]; symmetric half.
constexpr std::array<double, 8> kNodes = {0.09501250983763745, 0.2816035507792589, 0.45801677765722737,
                                          0.6178762444026438,  0.755404408355003,  0.8656312023878318,
                                          0.9445750230732326,  0.9894009349916499};
constexpr std::array<double, 8> kWeights = {0.18945061045506859, 0.1826034150449236,  0.16915651939500262,
                                            0.14959598881657676, 0.12462897125553403, 0.09515851168249259,
                                            0.062253523938647706, 0.027152459411754037};

template <class F>
double gl16(const F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < kNodes.size(); ++i) {
    const double dx = half * kNodes[i];
    sum += kWeights[i] * (f(mid - dx) + f(mid + dx));
  }
  return sum * half;
}

template <class F>
double adaptive(const F& f, double a, double b, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = gl16(f, a, m);
  const double right = gl16(f, m, b);
  if (depth <= 0 || std::fabs(left + right - whole) <= tol) return left + right;
  return adaptive(f, a, m, left, 0.5 * tol, depth - 1) + adaptive(f, m, b, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
  return adaptive(f, a, b, gl16(f, a, b), tol, 40);
}

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double phi(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Phi(hi) - Phi(lo) for lo <= hi, taken from whichever tail keeps digits.
double normal_mass(double lo, double hi) {
  if (lo >= 0.0) return normal_sf(lo) - normal_sf(hi);
  if (hi <= 0.0) return normal_cdf(hi) - normal_cdf(lo);
  return 1.0 - normal_cdf(lo) - normal_sf(hi);
}

constexpr double kZLimit = 8.5;
constexpr double kTol = 1e-11;

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }
double normal_sf(double x) { return 0.5 * std::erfc(x / M_SQRT2); }

double chi2_cdf(double x, double df) {
  if (!(df > 0.0)) throw DomainError("chi-square needs positive degrees of freedom");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_sf(double x, double df) {
  if (!(df > 0.0)) throw DomainError("chi-square needs positive degrees of freedom");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

double f_cdf(double x, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw DomainError("F distribution needs positive degrees of freedom");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return incomplete_beta(0.5 * df1, 0.5 * df2, df1 * x / (df1 * x + df2));
}

double f_sf(double x, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw DomainError("F distribution needs positive degrees of freedom");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  // Upper tail as I_{d2/(d1 x + d2)}(d2/2, d1/2) so small p keep full precision.
  return incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df1 * x + df2));
}

double normal_range_cdf(double w, int k) {
  if (k < 2) throw DomainError("range distribution needs k >= 2");
  if (!(w > 0.0)) return 0.0;
  if (std::isinf(w)) return 1.0;
  // z is the sample maximum; the other k-1 values fall in [z - w, z].
  auto integrand = [w, k](double z) {
    const double mass = normal_mass(z - w, z);
    if (mass <= 0.0) return 0.0;
    return phi(z) * std::pow(mass, k - 1);
  };
  double total = integrate(integrand, -kZLimit, 0.0, kTol) + integrate(integrand, 0.0, kZLimit + w, kTol);
  return std::clamp(k * total, 0.0, 1.0);
}

double ptukey(double q, int k, double df) {
  if (k < 2) throw DomainError("studentized range needs k >= 2");
  if (!(df > 0.0)) throw DomainError("studentized range needs positive degrees of freedom");
  if (!(q > 0.0)) return 0.0;
  if (std::isinf(q)) return 1.0;
  if (std::isinf(df)) return normal_range_cdf(q, k);

  // s = sqrt(chi2_df / df); integrate its density against the range CDF
  // at q*s, over 12 chi-square standard deviations around the mean.
  const double spread = 12.0 * std::sqrt(2.0 * df);
  const double s_lo = std::sqrt(std::max(0.0, df - spread) / df);
  const double s_hi = std::sqrt((df + spread + 40.0) / df);
  const double log_norm = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::log(2.0);
  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double log_density = log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
    return std::exp(log_density) * normal_range_cdf(q * s, k);
  };
  // Split at the mode so the first pass already resolves the peak.
  const double mode = std::sqrt(std::max(df - 1.0, 0.0) / df);
  double total;
  if (mode > s_lo && mode < s_hi) {
    total = integrate(integrand, s_lo, mode, 1e-10) + integrate(integrand, mode, s_hi, 1e-10);
  } else {
    total = integrate(integrand, s_lo, s_hi, 1e-10);
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace futureyou::stats
