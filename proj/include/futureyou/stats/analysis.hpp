#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "futureyou/stats/tests.hpp"
#include "json.hpp"

namespace futureyou::stats {

enum class AnalysisPath { nonparametric, welch, classic };
std::string_view to_string(AnalysisPath p);

enum class NormalityMode {
  pooled_residuals,  // one test on value - group mean across all groups
  per_group,         // one test per group; any rejection counts
};

struct AnalysisOptions {
  double alpha = 0.05;
  NormalityMode normality = NormalityMode::pooled_residuals;
  LeveneCenter levene_center = LeveneCenter::mean;
};

struct AnalysisResult {
  std::string measure_id;
  std::vector<TestResult> normality;
  std::optional<TestResult> homogeneity;
  TestResult omnibus;
  std::vector<PairwiseComparison> posthoc;
  AnalysisPath path = AnalysisPath::classic;
  // Degenerate-data notes, e.g. "normality_not_assessable".
  std::vector<std::string> flags;
  bool normal = true;
  bool homogeneous = true;  // meaningful unless path is nonparametric
};

// Shapiro-Wilk gate, then Kruskal-Wallis + Dunn, or Levene followed by
// Welch or classic ANOVA, each with Tukey HSD. Groups need >= 3 values.
AnalysisResult analyze_measure(const SampleGroups& groups, const AnalysisOptions& options = {});

nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const PairwiseComparison& c);
nlohmann::json to_json(const AnalysisResult& r);

}  // namespace futureyou::stats
