#include "futureyou/stats/tests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "futureyou/stats/distributions.hpp"
#include "futureyou/stats/special.hpp"

namespace futureyou::stats {
namespace {

// Sums of squares below this fraction of sum(x^2) are rounding noise.
constexpr double kRelativeZero = 1e-20;

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

double sum_sq_dev(const std::vector<double>& v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

double sum_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void require_groups(const SampleGroups& g, std::size_t min_size) {
  if (g.groups.size() < 2) throw TooFew("at least two groups are required");
  for (const auto& grp : g.groups) {
    if (grp.values.size() < min_size) {
      throw TooFew("group '" + grp.label + "' has " + std::to_string(grp.values.size()) + " values, needs " +
                   std::to_string(min_size));
    }
    for (double x : grp.values) {
      if (!std::isfinite(x)) throw DomainError("group '" + grp.label + "' contains a non-finite value");
    }
  }
}

double poly(const double* c, int n, double x) {
  double r = 0.0;
  for (int i = n - 1; i >= 0; --i) r = r * x + c[i];
  return r;
}

struct Ranked {
  std::vector<std::vector<double>> ranks;  // per group
  std::size_t n = 0;
  double tie_sum = 0.0;  // sum of t^3 - t over tie blocks
};

Ranked rank_groups(const SampleGroups& g) {
  std::vector<double> all;
  for (const auto& grp : g.groups) all.insert(all.end(), grp.values.begin(), grp.values.end());
  if (all.empty()) throw TooFew("no observations");
  const auto r = midranks(all);

  Ranked out;
  out.n = all.size();
  std::size_t pos = 0;
  for (const auto& grp : g.groups) {
    out.ranks.emplace_back(r.begin() + long(pos), r.begin() + long(pos + grp.values.size()));
    pos += grp.values.size();
  }
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j] == all[i]) ++j;
    const double t = double(j - i);
    out.tie_sum += t * t * t - t;
    i = j;
  }
  return out;
}

}  // namespace

std::string_view to_string(TestKind t) {
  switch (t) {
    case TestKind::shapiro_wilk:
      return "shapiro_wilk";
    case TestKind::levene:
      return "levene";
    case TestKind::anova_oneway:
      return "anova_oneway";
    case TestKind::welch_anova:
      return "welch_anova";
    case TestKind::kruskal_wallis:
      return "kruskal_wallis";
  }
  return "unknown";
}

std::string_view to_string(PosthocMethod m) { return m == PosthocMethod::tukey_hsd ? "tukey_hsd" : "dunn_bonferroni"; }

std::vector<double> midranks(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> r(values.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && values[idx[j]] == values[idx[i]]) ++j;
    const double rank = 0.5 * double(i + 1 + j);  // mean of i+1 .. j
    for (std::size_t t = i; t < j; ++t) r[idx[t]] = rank;
    i = j;
  }
  return r;
}

TestResult shapiro_wilk(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 3) throw TooFew("Shapiro-Wilk needs at least 3 values");
  if (n > 5000) throw TooMany("Shapiro-Wilk accepts at most 5000 values");
  for (double x : values) {
    if (!std::isfinite(x)) throw DomainError("Shapiro-Wilk input contains a non-finite value");
  }
  std::vector<double> x = values;
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (!(range > 0.0)) throw ZeroVariance();

  static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
  static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
  static constexpr double g[] = {-2.273, 0.459};

  const std::size_t half = n / 2;
  const double an = double(n);
  // a[i] weights the (i+1)-th largest value; the mirrored smallest gets -a[i].
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = -normal_quantile((double(i + 1) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = m[0] / ssumm2 + poly(c1, 6, rsn);
    std::size_t first;
    double fac;
    if (n > 5) {
      const double a2 = m[1] / ssumm2 + poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
      first = 2;
    } else {
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
      first = 1;
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] = m[i] / fac;
  }

  // W as the squared correlation between the ordered sample and the
  // coefficients, on range-scaled data.
  std::vector<double> coef(n, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    coef[n - 1 - i] = a[i];
    coef[i] = -a[i];
  }
  double sx = 0.0, sa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i] / range;
    sa += coef[i];
  }
  sx /= an;
  sa /= an;
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = coef[i] - sa;
    const double dx = x[i] / range - sx;
    ssa += da * da;
    ssx += dx * dx;
    sax += da * dx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  const double w = 1.0 - w1;

  TestResult r{TestKind::shapiro_wilk, w, an, 0.0, 1.0, {}};
  if (n == 3) {
    const double pw = 6.0 / M_PI * (std::asin(std::sqrt(w)) - M_PI / 3.0);
    r.p = std::clamp(pw, 0.0, 1.0);
    return r;
  }
  double y = std::log(w1);
  const double lxx = std::log(an);
  double mu, sigma;
  if (n <= 11) {
    const double gamma = poly(g, 2, an);
    if (y >= gamma) {
      r.p = 1e-99;
      return r;
    }
    y = -std::log(gamma - y);
    mu = poly(c3, 4, an);
    sigma = std::exp(poly(c4, 4, an));
  } else {
    mu = poly(c5, 4, lxx);
    sigma = std::exp(poly(c6, 3, lxx));
  }
  r.p = std::clamp(normal_sf((y - mu) / sigma), 0.0, 1.0);
  return r;
}

TestResult levene(const SampleGroups& groups, LeveneCenter center) {
  require_groups(groups, 2);
  SampleGroups dev{groups.measure_id, {}};
  double total_sq = 0.0;
  double dev_sq = 0.0;
  for (const auto& g : groups.groups) {
    const double c = center == LeveneCenter::mean ? mean(g.values) : median(g.values);
    Group d{g.label, {}};
    for (double x : g.values) {
      d.values.push_back(std::fabs(x - c));
      dev_sq += (x - c) * (x - c);
    }
    total_sq += sum_sq(g.values);
    dev.groups.push_back(std::move(d));
  }
  if (dev_sq <= kRelativeZero * total_sq) throw DegenerateGroups();
  TestResult r = anova_oneway(dev);
  r.test = TestKind::levene;
  return r;
}

TestResult anova_oneway(const SampleGroups& groups) {
  require_groups(groups, 2);
  const double k = double(groups.groups.size());
  double n_total = 0.0, grand_sum = 0.0, raw_sq = 0.0;
  for (const auto& g : groups.groups) {
    n_total += double(g.values.size());
    grand_sum += std::accumulate(g.values.begin(), g.values.end(), 0.0);
    raw_sq += sum_sq(g.values);
  }
  const double grand = grand_sum / n_total;
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups.groups) {
    const double m = mean(g.values);
    ssb += double(g.values.size()) * (m - grand) * (m - grand);
    ssw += sum_sq_dev(g.values, m);
  }
  TestResult r{TestKind::anova_oneway, 0.0, k - 1.0, n_total - k, 1.0, {}};
  const double noise = kRelativeZero * raw_sq;
  if (ssw <= noise) {
    if (ssb <= noise) {
      r.flag = "all_equal";
      return r;
    }
    r.statistic = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    r.flag = "zero_within_variance";
    return r;
  }
  r.statistic = (ssb / r.df1) / (ssw / r.df2);
  r.p = std::clamp(f_sf(r.statistic, r.df1, r.df2), 0.0, 1.0);
  return r;
}

TestResult welch_anova(const SampleGroups& groups) {
  require_groups(groups, 2);
  const double k = double(groups.groups.size());
  std::vector<double> w, m, n;
  std::size_t zero = 0;
  std::string zero_label;
  for (const auto& g : groups.groups) {
    const double gm = mean(g.values);
    const double ni = double(g.values.size());
    const double ss = sum_sq_dev(g.values, gm);
    if (ss <= kRelativeZero * sum_sq(g.values)) {
      if (zero++ == 0) zero_label = g.label;
      w.push_back(0.0);
    } else {
      w.push_back(ni / (ss / (ni - 1.0)));
    }
    m.push_back(gm);
    n.push_back(ni);
  }
  if (zero == groups.groups.size()) throw AllZeroVariance();
  if (zero > 0) throw ZeroGroupVariance(zero_label);

  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  double wmean = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) wmean += w[i] * m[i];
  wmean /= wsum;
  double a = 0.0, tmp = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    a += w[i] * (m[i] - wmean) * (m[i] - wmean);
    const double t = 1.0 - w[i] / wsum;
    tmp += t * t / (n[i] - 1.0);
  }
  a /= (k - 1.0);
  const double b = 1.0 + 2.0 * (k - 2.0) / (k * k - 1.0) * tmp;
  TestResult r{TestKind::welch_anova, a / b, k - 1.0, (k * k - 1.0) / (3.0 * tmp), 1.0, {}};
  r.p = std::clamp(f_sf(r.statistic, r.df1, r.df2), 0.0, 1.0);
  return r;
}

TestResult kruskal_wallis(const SampleGroups& groups) {
  require_groups(groups, 1);
  const Ranked rk = rank_groups(groups);
  const double n = double(rk.n);
  if (rk.n < 3) throw TooFew("Kruskal-Wallis needs at least 3 observations");
  const double correction = 1.0 - rk.tie_sum / (n * n * n - n);
  if (correction <= 0.0) throw AllTied();
  double s = 0.0;
  for (const auto& r : rk.ranks) {
    const double sum = std::accumulate(r.begin(), r.end(), 0.0);
    s += sum * sum / double(r.size());
  }
  double h = (12.0 / (n * (n + 1.0)) * s - 3.0 * (n + 1.0)) / correction;
  if (h < 0.0) h = 0.0;  // rounding when every mean rank is equal
  const double df = double(groups.groups.size()) - 1.0;
  return {TestKind::kruskal_wallis, h, df, 0.0, std::clamp(chi2_sf(h, df), 0.0, 1.0), {}};
}

std::vector<PairwiseComparison> dunn_bonferroni(const SampleGroups& groups) {
  require_groups(groups, 1);
  const Ranked rk = rank_groups(groups);
  const double n = double(rk.n);
  if (rk.n < 3) throw TooFew("Dunn's test needs at least 3 observations");
  if (rk.tie_sum >= n * n * n - n) throw AllTied();
  const double k = double(groups.groups.size());
  const double comparisons = k * (k - 1.0) / 2.0;
  const double base = n * (n + 1.0) / 12.0 - rk.tie_sum / (12.0 * (n - 1.0));

  std::vector<double> mean_rank;
  for (const auto& r : rk.ranks) mean_rank.push_back(mean(r));

  std::vector<PairwiseComparison> out;
  for (std::size_t i = 0; i < groups.groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.groups.size(); ++j) {
      const double na = double(groups.groups[i].values.size());
      const double nb = double(groups.groups[j].values.size());
      const double est = mean_rank[i] - mean_rank[j];
      const double z = est / std::sqrt(base * (1.0 / na + 1.0 / nb));
      const double p = 2.0 * normal_sf(std::fabs(z));
      out.push_back({groups.groups[i].label, groups.groups[j].label, est, z, std::min(1.0, p * comparisons),
                     PosthocMethod::dunn_bonferroni});
    }
  }
  return out;
}

std::vector<PairwiseComparison> tukey_hsd(const SampleGroups& groups) {
  require_groups(groups, 2);
  const int k = int(groups.groups.size());
  double n_total = 0.0, ssw = 0.0, raw_sq = 0.0;
  std::vector<double> means;
  for (const auto& g : groups.groups) {
    const double m = mean(g.values);
    means.push_back(m);
    ssw += sum_sq_dev(g.values, m);
    raw_sq += sum_sq(g.values);
    n_total += double(g.values.size());
  }
  if (ssw <= kRelativeZero * raw_sq) throw ZeroWithinVariance();
  const double df = n_total - k;
  const double msw = ssw / df;

  std::vector<PairwiseComparison> out;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const double na = double(groups.groups[i].values.size());
      const double nb = double(groups.groups[j].values.size());
      const double est = means[i] - means[j];
      const double q = std::fabs(est) / std::sqrt(0.5 * msw * (1.0 / na + 1.0 / nb));
      const double p = q == 0.0 ? 1.0 : 1.0 - ptukey(q, k, df);
      out.push_back({groups.groups[i].label, groups.groups[j].label, est, q, std::clamp(p, 0.0, 1.0),
                     PosthocMethod::tukey_hsd});
    }
  }
  return out;
}

}  // namespace futureyou::stats
