#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"
#include "futureyou/measures.hpp"
#include "futureyou/stats/analysis.hpp"
#include "futureyou/time_util.hpp"
#include "json.hpp"

namespace futureyou::harness {

enum class Condition { future_you, control, chat, questionnaire };

// Report column order.
inline constexpr std::array<Condition, 4> kReportConditions = {Condition::future_you, Condition::chat,
                                                               Condition::questionnaire, Condition::control};

std::string_view to_string(Condition c);
Condition condition_from_string(std::string_view s);
std::string_view display_name(Condition c);  // "Future You", "Chat", ...
std::string_view description(Condition c);

class InvalidCondition : public Error {
 public:
  using Error::Error;
};

class ZeroWeights : public Error {
 public:
  ZeroWeights() : Error("condition weights must be non-negative and sum to a positive value") {}
};

using ConditionWeights = std::map<Condition, double>;
ConditionWeights equal_weights();

// Deterministic in (participant_id, seed); frequencies follow the weights.
Condition assign_condition(std::string_view participant_id, const ConditionWeights& weights, std::uint64_t seed);

struct TimeBounds {
  std::chrono::minutes min;
  std::chrono::minutes max;
};

std::optional<TimeBounds> session_time_bounds(Condition c);

struct ParticipantRecord {
  std::string participant_id;
  Condition condition = Condition::control;
  std::optional<measures::ScaleBattery> pre;
  std::optional<measures::ScaleBattery> post;
  bool attention_passed = true;
  bool technical_issue = false;
  bool min_time_violation = false;  // recorded, never an exclusion reason
  std::map<std::string, std::string> demographics;
  std::optional<TimePoint> started_at;
  std::optional<TimePoint> finished_at;

  // post requires pre. Throws InvalidRecord.
  void validate() const;
};

class InvalidRecord : public Error {
 public:
  using Error::Error;
};

struct ExcludedRecord {
  ParticipantRecord record;
  std::string reason;  // "attention_check", "technical_issue", or both joined by '+'
};

struct ExclusionResult {
  std::vector<ParticipantRecord> kept;
  std::vector<ExcludedRecord> excluded;
};

ExclusionResult apply_exclusions(const std::vector<ParticipantRecord>& records);

// One participant's post-minus-pre measures plus the flags exported with them.
struct ParticipantDeltas {
  std::string participant_id;
  Condition condition = Condition::control;
  bool attention_passed = true;
  bool technical_issue = false;
  bool min_time_violation = false;
  measures::DeltaScores deltas;
};

// Throws InvalidRecord when pre or post is missing.
ParticipantDeltas participant_deltas(const ParticipantRecord& record,
                                     const measures::Instrument& instrument = measures::Instrument::defaults());

// Same rule as apply_exclusions, on exported rows.
std::vector<ParticipantDeltas> drop_excluded(const std::vector<ParticipantDeltas>& rows);

// Column order: participant_id, condition, attention_passed,
// technical_issue, min_time_violation, then the measure ids in report order.
std::vector<std::string> deltas_csv_header();
std::string write_deltas_csv(const std::vector<ParticipantDeltas>& rows);
std::vector<ParticipantDeltas> read_deltas_csv(std::string_view text);

class InsufficientGroups : public Error {
 public:
  using Error::Error;
};

struct ConditionSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
};

struct ReportRow {
  std::string measure_id;
  std::string label;
  stats::AnalysisResult analysis;
  std::array<ConditionSummary, 4> by_condition;  // kReportConditions order

  double f_statistic() const { return analysis.omnibus.statistic; }
  double p() const { return analysis.omnibus.p; }
  std::string homogeneity() const;  // "Yes", "No", or "n/a" on the rank-based path
  std::string anova_type() const;   // "One-way", "Welch", or "Kruskal-Wallis"
  std::string stars() const;
};

std::string significance_stars(double p);
std::string format_p(double p);                   // 4 decimals, scientific below 1e-4
std::string format_statistic(double f);           // 3 decimals
std::string format_mean_sd(const ConditionSummary& s);  // "-0.63 ± 1.20"

// Measure, Homogeneity, ANOVA Type, F-statistic, p-value, then one
// "M ± SD" cell per condition.
std::vector<std::string> report_cells(const ReportRow& row);

struct ReportOptions {
  stats::AnalysisOptions analysis;
};

// Rows follow measures::kMeasureIds. Exclusions are not applied here.
std::vector<ReportRow> build_report(const std::vector<ParticipantDeltas>& rows, const ReportOptions& options = {});
std::vector<ReportRow> build_report(const std::vector<ParticipantRecord>& records, const ReportOptions& options = {},
                                    const measures::Instrument& instrument = measures::Instrument::defaults());

std::string render_text(const std::vector<ReportRow>& rows);
nlohmann::json to_json(const std::vector<ReportRow>& rows);

}  // namespace futureyou::harness
