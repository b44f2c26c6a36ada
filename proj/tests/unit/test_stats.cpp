#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "futureyou/stats/analysis.hpp"
#include "futureyou/stats/distributions.hpp"
#include "futureyou/stats/special.hpp"
#include "futureyou/stats/tests.hpp"

using namespace futureyou::stats;

// Reference values below were produced by tests/oracles/stats_oracles.py
// (scipy 1.15, statsmodels 0.14) and frozen here.

namespace {

SampleGroups make(std::vector<std::vector<double>> values, std::string measure = "m") {
  SampleGroups g{std::move(measure), {}};
  for (std::size_t i = 0; i < values.size(); ++i) g.groups.push_back({"g" + std::to_string(i), std::move(values[i])});
  return g;
}

std::vector<double> grid50() {
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) v.push_back(double((i * 37) % 100 + 1) / 100.0);
  return v;
}

std::vector<double> skew30() {
  std::vector<double> v;
  for (int i = 0; i < 30; ++i) v.push_back(std::round(std::exp(0.35 * i) / 10.0 * 1e6) / 1e6);
  return v;
}

const std::vector<std::vector<double>> kLeveneB = {
    {4.2, 5.1, 3.9, 6.0, 5.5}, {2.0, 8.5, 1.1, 9.9}, {5.0, 5.2, 4.9, 5.1, 5.3, 4.8}};

const std::vector<std::vector<double>> kWelch4 = {{0.3, -1.2, 0.8, -0.5, 1.9, -2.2, 0.1, -0.9, 1.4, -0.4},
                                                  {0.2, 0.5, -0.1, 0.4, 0.0, 0.3, 0.6, -0.2},
                                                  {1.1, 2.5, -0.3, 0.9, 3.2, 1.7, 0.4, 2.0, 1.3},
                                                  {-0.6, -0.2, -0.9, 0.1, -0.4, -0.7, -0.3}};

const std::vector<std::vector<double>> kTies = {{1, 2, 2, 3, 5}, {2, 3, 3, 4, 6, 6}, {5, 5, 7, 8}};

const std::vector<std::vector<double>> kTukey3 = {
    {4.1, 5.2, 6.3, 5.0, 4.7}, {6.8, 7.1, 5.9, 7.7, 6.4, 7.0}, {5.1, 4.0, 6.2, 5.5}};

std::vector<std::vector<double>> scaled(std::vector<std::vector<double>> v, double c, double shift = 0.0) {
  for (auto& g : v)
    for (auto& x : g) x = c * x + shift;
  return v;
}

}  // namespace

TEST_CASE("special functions") {
  CHECK(normal_quantile(0.001) == doctest::Approx(-3.090232306167813).epsilon(1e-14));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  for (double p : {1e-12, 1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 1 - 1e-9}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(std::isinf(normal_quantile(0.0)));
  CHECK_THROWS_AS(normal_quantile(1.5), DomainError);

  CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(incomplete_beta(2.0, 3.0, 0.4) == doctest::Approx(0.5248).epsilon(1e-13));  // 6x^2 - 8x^3 + 3x^4
  CHECK(incomplete_beta(2.0, 3.0, 0.4, true) == doctest::Approx(0.4752).epsilon(1e-13));
}

TEST_CASE("incomplete gamma series and continued fraction agree") {
  for (double a : {0.5, 1.0, 3.5, 10.0, 50.0}) {
    for (double x : {a + 0.5, a + 1.0, a + 2.0, 1.5 * a + 2.0}) {
      const double p = gamma_p_series(a, x);
      const double q = gamma_q_continued_fraction(a, x);
      CHECK(p + q == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("distribution spot checks") {
  CHECK(f_cdf(2.5, 3, 40) == doctest::Approx(0.9267456479820503).epsilon(1e-10));
  CHECK(f_sf(8.835, 3, 181.6) == doctest::Approx(1.6938021915262773e-05).epsilon(1e-8));
  CHECK(chi2_sf(3.857142857142857, 1) == doctest::Approx(0.04953461343562649).epsilon(1e-10));
  CHECK(chi2_cdf(0.3, 7) == doctest::Approx(0.00010003738225207028).epsilon(1e-9));
  for (double x : {0.01, 0.5, 1.0, 3.0, 20.0}) {
    for (auto [d1, d2] : {std::pair{1.0, 1.0}, {3.0, 40.0}, {2.0, 7.5}, {10.0, 300.0}}) {
      CHECK(std::fabs(f_cdf(x, d1, d2) + f_sf(x, d1, d2) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("studentized range") {
  struct Case {
    double q;
    int k;
    double df;
    double expected;
  };
  const Case cases[] = {{3.5, 3, 12, 0.9300045147248164},  {1.0, 2, 5, 0.48891591956971947},
                        {2.0, 4, 20, 0.4945596545878861},  {4.2, 4, 340, 0.9832382882716276},
                        {0.5, 3, 3, 0.06513412295094398}, {6.0, 5, 10, 0.9884420436585487},
                        {3.0, 10, 60, 0.47958151572545166}, {5.0, 2, 1000, 0.9995744011748587},
                        {2.77, 2, 200, 0.9484602055344715}};
  for (const auto& c : cases) {
    CAPTURE(c.q);
    CAPTURE(c.k);
    CHECK(std::fabs(ptukey(c.q, c.k, c.df) - c.expected) < 1e-6);
  }
  CHECK(ptukey(0.0, 3, 10) == 0.0);
  CHECK(ptukey(-1.0, 3, 10) == 0.0);

  SUBCASE("k = 2 range has a closed form") {
    for (double w : {0.1, 0.7, 1.5, 3.0, 5.0}) {
      CHECK(normal_range_cdf(w, 2) == doctest::Approx(2.0 * normal_cdf(w / std::sqrt(2.0)) - 1.0).epsilon(1e-10));
    }
  }
  SUBCASE("monotone in q") {
    for (int k : {2, 4, 7}) {
      for (double df : {2.0, 15.0, 120.0}) {
        double prev = 0.0;
        for (double q = 0.05; q < 9.0; q += 0.35) {
          const double v = ptukey(q, k, df);
          CHECK(v >= prev - 1e-12);
          CHECK(v <= 1.0);
          prev = v;
        }
      }
    }
  }
}

TEST_CASE("shapiro_wilk against oracle") {
  auto r = shapiro_wilk(grid50());
  CHECK(r.statistic == doctest::Approx(0.9531565138789648).epsilon(1e-9));
  CHECK(std::fabs(r.p - 0.0460508107727951) < 1e-6);

  r = shapiro_wilk({1, 2, 4});
  CHECK(r.statistic == doctest::Approx(0.9642857142857142).epsilon(1e-9));
  CHECK(std::fabs(r.p - 0.6368868450289689) < 1e-6);

  r = shapiro_wilk({2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8});
  CHECK(r.statistic == doctest::Approx(0.9401366781979513).epsilon(1e-9));
  CHECK(std::fabs(r.p - 0.6399513746153818) < 1e-6);

  r = shapiro_wilk(skew30());
  CHECK(r.statistic == doctest::Approx(0.5567597615340512).epsilon(1e-9));
  CHECK(r.p == doctest::Approx(2.2524479117250047e-08).epsilon(1e-5));

  r = shapiro_wilk({148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236, 164});
  CHECK(r.statistic == doctest::Approx(0.7696890056883109).epsilon(1e-9));
  CHECK(std::fabs(r.p - 0.004324079675674995) < 1e-6);
}

TEST_CASE("shapiro_wilk errors") {
  CHECK_THROWS_AS(shapiro_wilk({2, 2, 2, 2}), ZeroVariance);
  CHECK_THROWS_AS(shapiro_wilk({1, 2}), TooFew);
  CHECK_THROWS_AS(shapiro_wilk(std::vector<double>(5001, 1.0)), TooMany);
}

TEST_CASE("levene") {
  auto r = levene(make({{1, 2, 3}, {2, 4, 6}}));
  CHECK(r.statistic == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.df1 == 1);
  CHECK(r.df2 == 4);
  CHECK(r.p == doctest::Approx(0.421648255176194).epsilon(1e-10));

  r = levene(make(kLeveneB));
  CHECK(r.statistic == doctest::Approx(106.42809290312157).epsilon(1e-10));
  CHECK(r.p == doctest::Approx(2.3102471283336523e-08).epsilon(1e-8));

  r = levene(make(kLeveneB), LeveneCenter::median);
  CHECK(r.statistic == doctest::Approx(88.56313921936966).epsilon(1e-10));
  CHECK(r.p == doctest::Approx(6.524935392544251e-08).epsilon(1e-8));

  CHECK(levene(make({{1, 5, 2}, {5, 2, 1}})).statistic == doctest::Approx(0.0));
  CHECK_THROWS_AS(levene(make({{5, 5}, {7, 7}})), DegenerateGroups);
}

TEST_CASE("anova_oneway") {
  auto r = anova_oneway(make({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}}));
  CHECK(r.statistic == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.df1 == 2);
  CHECK(r.df2 == 6);
  CHECK(r.p == doctest::Approx(0.125).epsilon(1e-10));

  r = anova_oneway(make(kLeveneB));
  CHECK(r.statistic == doctest::Approx(0.04231137563415621).epsilon(1e-10));
  CHECK(r.p == doctest::Approx(0.9587136072055341).epsilon(1e-10));

  r = anova_oneway(make({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}}));
  CHECK(r.statistic == 0.0);
  CHECK(r.p == doctest::Approx(1.0));

  r = anova_oneway(make({{2, 2, 2}, {2, 2, 2}}));
  CHECK(r.flag == "all_equal");
  CHECK(r.p == 1.0);

  r = anova_oneway(make({{1, 1, 1}, {4, 4, 4}}));
  CHECK(r.flag == "zero_within_variance");
  CHECK(std::isinf(r.statistic));
  CHECK(r.p == 0.0);

  CHECK_THROWS_AS(anova_oneway(make({{1}, {2, 3}})), TooFew);
}

TEST_CASE("two-group identities") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<double> a, b;
    const int na = 3 + rep % 7, nb = 4 + rep % 5;
    for (int i = 0; i < na; ++i) a.push_back(nd(rng));
    for (int i = 0; i < nb; ++i) b.push_back(2.0 * nd(rng) + 0.5);
    auto m = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / double(v.size());
    };
    auto var = [&](const std::vector<double>& v) {
      double mu = m(v), s = 0;
      for (double x : v) s += (x - mu) * (x - mu);
      return s / double(v.size() - 1);
    };
    const double pooled = ((na - 1) * var(a) + (nb - 1) * var(b)) / (na + nb - 2);
    const double t = (m(a) - m(b)) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    const double tw = (m(a) - m(b)) / std::sqrt(var(a) / na + var(b) / nb);
    CHECK(anova_oneway(make({a, b})).statistic == doctest::Approx(t * t).epsilon(1e-10));
    CHECK(welch_anova(make({a, b})).statistic == doctest::Approx(tw * tw).epsilon(1e-10));
  }
}

TEST_CASE("welch_anova") {
  auto r = welch_anova(make(kWelch4));
  CHECK(std::fabs(r.statistic - 9.723375949211915) < 1e-6);
  CHECK(r.df1 == 3);
  CHECK(std::fabs(r.df2 - 15.983886729588953) < 1e-6);
  CHECK(std::fabs(r.p - 0.0006865892020171304) < 1e-8);

  SUBCASE("equal variances and sizes") {
    // Equal weights make the Welch numerator the classic F; for k > 2 the
    // Welch denominator 1 + 2(k-2)/(k^2-1) * tmp still rescales it.
    auto g2 = make({{1, 2, 3, 4}, {3, 4, 5, 6}});
    CHECK(welch_anova(g2).statistic == doctest::Approx(anova_oneway(g2).statistic).epsilon(1e-9));
    auto g3 = make({{1, 2, 3, 4}, {3, 4, 5, 6}, {0, 1, 2, 3}});
    const double tmp = 3.0 * (2.0 / 3.0) * (2.0 / 3.0) / 3.0;
    const double b = 1.0 + 2.0 * 1.0 / 8.0 * tmp;
    CHECK(welch_anova(g3).statistic == doctest::Approx(anova_oneway(g3).statistic / b).epsilon(1e-9));
  }
  CHECK_THROWS_AS(welch_anova(make({{1, 1, 1}, {2, 2, 2}})), AllZeroVariance);
  CHECK_THROWS_AS(welch_anova(make({{1, 1, 1}, {2, 3, 4}})), ZeroGroupVariance);
}

TEST_CASE("kruskal_wallis") {
  auto r = kruskal_wallis(make({{1, 2, 3}, {4, 5, 6}}));
  CHECK(r.statistic == doctest::Approx(3.857142857142854).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.049534613435626915).epsilon(1e-10));

  r = kruskal_wallis(make(kTies));
  CHECK(r.statistic == doctest::Approx(6.6570383912248605).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.03584614691729364).epsilon(1e-10));

  CHECK(kruskal_wallis(make({{1, 2}, {1, 2}})).statistic == doctest::Approx(0.0));
  CHECK_THROWS_AS(kruskal_wallis(make({{3, 3, 3}, {3, 3}})), AllTied);
}

TEST_CASE("dunn_bonferroni") {
  auto c = dunn_bonferroni(make(kTies));
  REQUIRE(c.size() == 3);
  const double est[] = {-3.4, -7.65, -4.25};
  const double z[] = {-1.2703651005839955, -2.5801237162634014, -1.4896351221272124};
  const double p[] = {0.6118638260027276, 0.02962947759334908, 0.4089606055734647};
  for (int i = 0; i < 3; ++i) {
    CHECK(c[i].estimate == doctest::Approx(est[i]).epsilon(1e-12));
    CHECK(std::fabs(c[i].statistic - z[i]) < 1e-6);
    CHECK(std::fabs(c[i].p_adjusted - p[i]) < 1e-6);
    CHECK(c[i].method == PosthocMethod::dunn_bonferroni);
  }
  for (const auto& x : dunn_bonferroni(make({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}}))) CHECK(x.p_adjusted == 1.0);
}

TEST_CASE("tukey_hsd") {
  auto c = tukey_hsd(make(kTukey3));
  REQUIRE(c.size() == 3);
  const double est[] = {-1.756666666666666, -0.13999999999999968, 1.6166666666666663};
  const double q[] = {5.348680586353345, 0.3847820436225895, 4.6176299136619665};
  const double p[] = {0.0068209017609525135, 0.9601472871279779, 0.017226553299708236};
  for (int i = 0; i < 3; ++i) {
    CHECK(c[i].estimate == doctest::Approx(est[i]).epsilon(1e-12));
    CHECK(c[i].statistic == doctest::Approx(q[i]).epsilon(1e-10));
    CHECK(std::fabs(c[i].p_adjusted - p[i]) < 1e-4);
  }
  for (const auto& x : tukey_hsd(make({{1, 2, 3}, {1, 2, 3}}))) {
    CHECK(x.statistic == 0.0);
    CHECK(x.p_adjusted == 1.0);
  }
  CHECK(tukey_hsd(make({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}, {0, 1, 5}})).size() == 6);
  CHECK_THROWS_AS(tukey_hsd(make({{1, 1}, {2, 2}})), ZeroWithinVariance);
}

TEST_CASE("location-scale invariance") {
  for (double c : {0.01, 3.0, 250.0}) {
    CAPTURE(c);
    auto base = make(kTukey3);
    auto s = make(scaled(kTukey3, c, 0.0));
    CHECK(anova_oneway(s).statistic == doctest::Approx(anova_oneway(base).statistic).epsilon(1e-9));
    CHECK(anova_oneway(s).p == doctest::Approx(anova_oneway(base).p).epsilon(1e-9));
    CHECK(welch_anova(s).statistic == doctest::Approx(welch_anova(base).statistic).epsilon(1e-9));
    CHECK(levene(s).statistic == doctest::Approx(levene(base).statistic).epsilon(1e-9));
    CHECK(kruskal_wallis(s).statistic == doctest::Approx(kruskal_wallis(base).statistic).epsilon(1e-12));
    auto tb = tukey_hsd(base), ts = tukey_hsd(s);
    for (std::size_t i = 0; i < tb.size(); ++i) {
      CHECK(ts[i].statistic == doctest::Approx(tb[i].statistic).epsilon(1e-9));
      CHECK(ts[i].p_adjusted == doctest::Approx(tb[i].p_adjusted).epsilon(1e-9));
    }
    std::vector<double> flat;
    for (const auto& g : s.groups) flat.insert(flat.end(), g.values.begin(), g.values.end());
    std::vector<double> flat0;
    for (const auto& g : base.groups) flat0.insert(flat0.end(), g.values.begin(), g.values.end());
    CHECK(shapiro_wilk(flat).statistic == doctest::Approx(shapiro_wilk(flat0).statistic).epsilon(1e-12));
  }
}

TEST_CASE("p values stay in [0, 1] on random data") {
  std::mt19937_64 rng(11);
  std::exponential_distribution<double> ex(1.0);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<std::vector<double>> v(3);
    for (auto& g : v)
      for (int i = 0; i < 4 + rep % 5; ++i) g.push_back(std::floor(ex(rng) * 3.0));
    auto g = make(v);
    for (auto fn : {&anova_oneway, &kruskal_wallis}) {
      try {
        auto r = fn(g);
        CHECK(r.p >= 0.0);
        CHECK(r.p <= 1.0);
      } catch (const AllTied&) {
      }
    }
  }
}

TEST_CASE("analyze_measure routing") {
  SUBCASE("skewed groups take the nonparametric path") {
    auto s = skew30();
    auto g = make({{s.begin(), s.begin() + 10}, {s.begin() + 10, s.begin() + 20}, {s.begin() + 20, s.end()}});
    // Residuals of exponential growth within each block stay heavily skewed.
    auto r = analyze_measure(g);
    CHECK(r.path == AnalysisPath::nonparametric);
    CHECK(r.omnibus.test == TestKind::kruskal_wallis);
    CHECK(r.posthoc.size() == 3);
    CHECK(r.posthoc[0].method == PosthocMethod::dunn_bonferroni);
    CHECK_FALSE(r.homogeneity.has_value());
  }
  SUBCASE("unequal variances take the Welch path") {
    std::vector<double> a, b;
    // Pooled residuals of a 1:5 scale mixture stay Shapiro-Wilk normal at
    // this size while Levene rejects.
    for (int i = 0; i < 10; ++i) {
      const double z = normal_quantile((i + 0.5) / 10.0);
      a.push_back(z);
      b.push_back(5.0 * z + 0.3);
    }
    auto r = analyze_measure(make({a, b}));
    CHECK(r.path == AnalysisPath::welch);
    CHECK(r.omnibus.test == TestKind::welch_anova);
    CHECK(r.posthoc.at(0).method == PosthocMethod::tukey_hsd);
  }
  SUBCASE("equal variances take the classic path") {
    std::vector<std::vector<double>> v(3);
    for (int i = 0; i < 30; ++i) {
      const double z = normal_quantile((i + 0.5) / 30.0);
      v[0].push_back(z);
      v[1].push_back(z + 0.4);
      v[2].push_back(z - 0.2);
    }
    auto r = analyze_measure(make(v));
    CHECK(r.path == AnalysisPath::classic);
    CHECK(r.omnibus.test == TestKind::anova_oneway);
    CHECK(r.posthoc.size() == 3);
  }
  SUBCASE("constant data is flagged, not fatal") {
    auto r = analyze_measure(make({{1, 1, 1}, {1, 1, 1}}));
    CHECK(r.path == AnalysisPath::classic);
    CHECK(r.omnibus.p == 1.0);
    CHECK(std::find(r.flags.begin(), r.flags.end(), "normality_not_assessable") != r.flags.end());
    CHECK(r.posthoc.empty());

    r = analyze_measure(make({{1, 1, 1}, {3, 3, 3}}));
    CHECK(r.omnibus.p == 0.0);
    CHECK(std::find(r.flags.begin(), r.flags.end(), "zero_within_variance") != r.flags.end());
  }
  SUBCASE("per-group normality mode") {
    std::vector<std::vector<double>> v(2);
    for (int i = 0; i < 20; ++i) {
      v[0].push_back(normal_quantile((i + 0.5) / 20.0));
      v[1].push_back(normal_quantile((i + 0.5) / 20.0) + 1.0);
    }
    AnalysisOptions opt;
    opt.normality = NormalityMode::per_group;
    auto r = analyze_measure(make(v), opt);
    CHECK(r.normality.size() == 2);
    CHECK(r.path != AnalysisPath::nonparametric);
  }
  CHECK_THROWS_AS(analyze_measure(make({{1, 2}, {1, 2, 3}})), TooFew);
}

TEST_CASE("path is consistent with the recorded tests") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0, 1);
  std::exponential_distribution<double> ex(1.0);
  for (int rep = 0; rep < 40; ++rep) {
    std::vector<std::vector<double>> v(3);
    for (std::size_t gi = 0; gi < 3; ++gi) {
      for (int i = 0; i < 8 + rep % 6; ++i) {
        double x = rep % 3 == 0 ? ex(rng) : nd(rng) * (1.0 + double(gi) * (rep % 2 ? 3.0 : 0.0));
        v[gi].push_back(x);
      }
    }
    auto r = analyze_measure(make(v));
    switch (r.path) {
      case AnalysisPath::nonparametric:
        CHECK(r.omnibus.test == TestKind::kruskal_wallis);
        for (const auto& c : r.posthoc) CHECK(c.method == PosthocMethod::dunn_bonferroni);
        break;
      case AnalysisPath::welch:
        CHECK(r.omnibus.test == TestKind::welch_anova);
        for (const auto& c : r.posthoc) CHECK(c.method == PosthocMethod::tukey_hsd);
        break;
      case AnalysisPath::classic:
        CHECK(r.omnibus.test == TestKind::anova_oneway);
        for (const auto& c : r.posthoc) CHECK(c.method == PosthocMethod::tukey_hsd);
        break;
    }
  }
}
