#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"

namespace futureyou::stats {

struct Group {
  std::string label;
  std::vector<double> values;
};

struct SampleGroups {
  std::string measure_id;
  std::vector<Group> groups;
};

enum class TestKind { shapiro_wilk, levene, anova_oneway, welch_anova, kruskal_wallis };
std::string_view to_string(TestKind t);

struct TestResult {
  TestKind test = TestKind::anova_oneway;
  double statistic = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p = 1.0;
  // Set when the statistic is a degenerate limit ("zero_within_variance",
  // "all_equal"); empty otherwise.
  std::string flag;
};

enum class PosthocMethod { tukey_hsd, dunn_bonferroni };
std::string_view to_string(PosthocMethod m);

struct PairwiseComparison {
  std::string group_a;
  std::string group_b;
  double estimate = 0.0;   // mean (Tukey) or mean-rank (Dunn) of a minus b
  double statistic = 0.0;  // q for Tukey, z for Dunn
  double p_adjusted = 1.0;
  PosthocMethod method = PosthocMethod::tukey_hsd;
};

class TooFew : public Error {
 public:
  using Error::Error;
};
class TooMany : public Error {
 public:
  using Error::Error;
};
class ZeroVariance : public Error {
 public:
  ZeroVariance() : Error("all values are equal") {}
};
class DegenerateGroups : public Error {
 public:
  DegenerateGroups() : Error("every absolute deviation is zero") {}
};
class ZeroWithinVariance : public Error {
 public:
  ZeroWithinVariance() : Error("within-group variance is zero") {}
};
class AllZeroVariance : public Error {
 public:
  AllZeroVariance() : Error("every group has zero variance") {}
};
// Welch weights n/s^2 are undefined when only some groups are constant.
class ZeroGroupVariance : public Error {
 public:
  explicit ZeroGroupVariance(const std::string& label) : Error("group '" + label + "' has zero variance") {}
};
class AllTied : public Error {
 public:
  AllTied() : Error("all values are tied") {}
};

// Royston's algorithm (AS R94). 3 <= n <= 5000.
TestResult shapiro_wilk(const std::vector<double>& values);

enum class LeveneCenter { mean, median };

TestResult levene(const SampleGroups& groups, LeveneCenter center = LeveneCenter::mean);

// MSW = 0 is reported, not thrown: F = inf and p = 0 with flag
// "zero_within_variance", or F = 0 and p = 1 with flag "all_equal".
TestResult anova_oneway(const SampleGroups& groups);

TestResult welch_anova(const SampleGroups& groups);

TestResult kruskal_wallis(const SampleGroups& groups);

std::vector<PairwiseComparison> dunn_bonferroni(const SampleGroups& groups);

std::vector<PairwiseComparison> tukey_hsd(const SampleGroups& groups);

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(const std::vector<double>& values);

}  // namespace futureyou::stats
