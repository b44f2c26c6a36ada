#include "futureyou/stats/analysis.hpp"

#include <cmath>
#include <numeric>

namespace futureyou::stats {
namespace {

nlohmann::json number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return nullptr;
  return x;
}

void assess_normality(const SampleGroups& groups, const AnalysisOptions& options, AnalysisResult& out) {
  if (options.normality == NormalityMode::pooled_residuals) {
    std::vector<double> residuals;
    for (const auto& g : groups.groups) {
      const double m = std::accumulate(g.values.begin(), g.values.end(), 0.0) / double(g.values.size());
      for (double x : g.values) residuals.push_back(x - m);
    }
    try {
      out.normality.push_back(shapiro_wilk(residuals));
      out.normal = out.normality.back().p >= options.alpha;
    } catch (const ZeroVariance&) {
      out.flags.push_back("normality_not_assessable");
    }
    return;
  }
  for (const auto& g : groups.groups) {
    try {
      out.normality.push_back(shapiro_wilk(g.values));
      if (out.normality.back().p < options.alpha) out.normal = false;
    } catch (const ZeroVariance&) {
      out.flags.push_back("normality_not_assessable:" + g.label);
    }
  }
}

void run_tukey(const SampleGroups& groups, AnalysisResult& out) {
  try {
    out.posthoc = tukey_hsd(groups);
  } catch (const ZeroWithinVariance&) {
    out.flags.push_back("posthoc_skipped_zero_within_variance");
  }
}

}  // namespace

std::string_view to_string(AnalysisPath p) {
  switch (p) {
    case AnalysisPath::nonparametric:
      return "nonparametric";
    case AnalysisPath::welch:
      return "welch";
    case AnalysisPath::classic:
      return "classic";
  }
  return "classic";
}

AnalysisResult analyze_measure(const SampleGroups& groups, const AnalysisOptions& options) {
  if (groups.groups.size() < 2) throw TooFew("analysis needs at least two groups");
  for (const auto& g : groups.groups) {
    if (g.values.size() < 3) {
      throw TooFew("group '" + g.label + "' has " + std::to_string(g.values.size()) + " values, needs 3");
    }
  }

  AnalysisResult out;
  out.measure_id = groups.measure_id;
  assess_normality(groups, options, out);

  if (!out.normal) {
    out.path = AnalysisPath::nonparametric;
    try {
      out.omnibus = kruskal_wallis(groups);
      out.posthoc = dunn_bonferroni(groups);
    } catch (const AllTied&) {
      out.omnibus = {TestKind::kruskal_wallis, 0.0, double(groups.groups.size() - 1), 0.0, 1.0, "all_tied"};
      out.flags.push_back("all_tied");
    }
    return out;
  }

  try {
    out.homogeneity = levene(groups, options.levene_center);
    out.homogeneous = out.homogeneity->p >= options.alpha;
  } catch (const DegenerateGroups&) {
    out.flags.push_back("homogeneity_not_assessable");
  }

  if (!out.homogeneous) {
    try {
      out.omnibus = welch_anova(groups);
      out.path = AnalysisPath::welch;
      run_tukey(groups, out);
      return out;
    } catch (const ZeroGroupVariance&) {
      out.flags.push_back("welch_undefined_zero_group_variance");
    }
  }
  out.path = AnalysisPath::classic;
  out.omnibus = anova_oneway(groups);
  if (!out.omnibus.flag.empty()) out.flags.push_back(out.omnibus.flag);
  run_tukey(groups, out);
  return out;
}

nlohmann::json to_json(const TestResult& r) {
  nlohmann::json j = {{"test", to_string(r.test)},
                      {"statistic", number(r.statistic)},
                      {"df1", r.df1},
                      {"df2", r.df2},
                      {"p", r.p}};
  if (!r.flag.empty()) j["flag"] = r.flag;
  return j;
}

nlohmann::json to_json(const PairwiseComparison& c) {
  return {{"group_a", c.group_a},     {"group_b", c.group_b}, {"estimate", c.estimate},
          {"statistic", c.statistic}, {"p_adjusted", c.p_adjusted}, {"method", to_string(c.method)}};
}

nlohmann::json to_json(const AnalysisResult& r) {
  nlohmann::json normality = nlohmann::json::array();
  for (const auto& t : r.normality) normality.push_back(to_json(t));
  nlohmann::json posthoc = nlohmann::json::array();
  for (const auto& c : r.posthoc) posthoc.push_back(to_json(c));
  return {{"measure_id", r.measure_id},
          {"path", to_string(r.path)},
          {"normal", r.normal},
          {"homogeneous", r.homogeneous},
          {"normality", std::move(normality)},
          {"homogeneity", r.homogeneity ? to_json(*r.homogeneity) : nlohmann::json(nullptr)},
          {"omnibus", to_json(r.omnibus)},
          {"posthoc", std::move(posthoc)},
          {"flags", r.flags}};
}

}  // namespace futureyou::stats
