#include "futureyou/experiment_harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "futureyou/csv.hpp"
#include "futureyou/strings.hpp"

namespace futureyou::harness {
namespace {

constexpr std::array<Condition, 4> kAssignmentOrder = {Condition::future_you, Condition::control, Condition::chat,
                                                       Condition::questionnaire};

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s, std::size_t line, const std::string& column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw csv::ParseError("line " + std::to_string(line) + ": '" + column + "' is not a number");
  }
  return v;
}

bool parse_bool(const std::string& s, std::size_t line, const std::string& column) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw csv::ParseError("line " + std::to_string(line) + ": '" + column + "' is not a boolean");
}

ConditionSummary summarize(const std::vector<double>& v) {
  ConditionSummary s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / double(v.size() - 1));
  }
  return s;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t len = utf8_length(s);
  return len >= width ? s : s + std::string(width - len, ' ');
}

}  // namespace

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::future_you:
      return "future_you";
    case Condition::control:
      return "control";
    case Condition::chat:
      return "chat";
    case Condition::questionnaire:
      return "questionnaire";
  }
  return "control";
}

Condition condition_from_string(std::string_view s) {
  for (auto c : kAssignmentOrder) {
    if (to_string(c) == s) return c;
  }
  throw InvalidCondition("unknown condition '" + std::string(s) + "'");
}

std::string_view display_name(Condition c) {
  switch (c) {
    case Condition::future_you:
      return "Future You";
    case Condition::control:
      return "Control";
    case Condition::chat:
      return "Chat";
    case Condition::questionnaire:
      return "Questionnaire";
  }
  return "Control";
}

std::string_view description(Condition c) {
  switch (c) {
    case Condition::future_you:
      return "Life-story survey, aged portrait, then a chat with the generated future self.";
    case Condition::control:
      return "Pre and post questionnaires only.";
    case Condition::chat:
      return "Chat with a generic assistant; no life-story survey or persona.";
    case Condition::questionnaire:
      return "Life-story survey without any chat.";
  }
  return "";
}

ConditionWeights equal_weights() {
  return {{Condition::future_you, 1.0}, {Condition::control, 1.0}, {Condition::chat, 1.0},
          {Condition::questionnaire, 1.0}};
}

Condition assign_condition(std::string_view participant_id, const ConditionWeights& weights, std::uint64_t seed) {
  double total = 0.0;
  for (const auto& [c, w] : weights) {
    if (!(w >= 0.0) || std::isinf(w)) throw ZeroWeights();
    total += w;
  }
  if (!(total > 0.0)) throw ZeroWeights();

  const std::uint64_t h = splitmix64(fnv1a64(participant_id) ^ splitmix64(seed));
  const double u = double(h >> 11) * 0x1.0p-53 * total;
  double acc = 0.0;
  Condition last = kAssignmentOrder.front();
  for (auto c : kAssignmentOrder) {
    auto it = weights.find(c);
    if (it == weights.end() || it->second == 0.0) continue;
    acc += it->second;
    last = c;
    if (u < acc) return c;
  }
  return last;
}

std::optional<TimeBounds> session_time_bounds(Condition c) {
  if (c == Condition::future_you) return TimeBounds{std::chrono::minutes(10), std::chrono::minutes(30)};
  return std::nullopt;
}

void ParticipantRecord::validate() const {
  if (participant_id.empty()) throw InvalidRecord("participant id is empty");
  if (post && !pre) throw InvalidRecord("participant '" + participant_id + "' has a post battery without a pre battery");
  if (pre && pre->phase != measures::BatteryPhase::pre) {
    throw InvalidRecord("participant '" + participant_id + "' pre battery is tagged post");
  }
  if (post && post->phase != measures::BatteryPhase::post) {
    throw InvalidRecord("participant '" + participant_id + "' post battery is tagged pre");
  }
}

ExclusionResult apply_exclusions(const std::vector<ParticipantRecord>& records) {
  ExclusionResult out;
  for (const auto& r : records) {
    std::string reason;
    if (!r.attention_passed) reason = "attention_check";
    if (r.technical_issue) reason += reason.empty() ? "technical_issue" : "+technical_issue";
    if (reason.empty()) {
      out.kept.push_back(r);
    } else {
      out.excluded.push_back({r, std::move(reason)});
    }
  }
  return out;
}

ParticipantDeltas participant_deltas(const ParticipantRecord& record, const measures::Instrument& instrument) {
  record.validate();
  if (!record.pre || !record.post) {
    throw InvalidRecord("participant '" + record.participant_id + "' lacks a complete pre/post pair");
  }
  return {record.participant_id,     record.condition,
          record.attention_passed,   record.technical_issue,
          record.min_time_violation, measures::delta(*record.pre, *record.post, instrument)};
}

std::vector<ParticipantDeltas> drop_excluded(const std::vector<ParticipantDeltas>& rows) {
  std::vector<ParticipantDeltas> out;
  for (const auto& r : rows) {
    if (r.attention_passed && !r.technical_issue) out.push_back(r);
  }
  return out;
}

std::vector<std::string> deltas_csv_header() {
  std::vector<std::string> h = {"participant_id", "condition", "attention_passed", "technical_issue",
                                "min_time_violation"};
  for (auto id : measures::kMeasureIds) h.emplace_back(id);
  return h;
}

std::string write_deltas_csv(const std::vector<ParticipantDeltas>& rows) {
  std::string out = csv::format_row(deltas_csv_header());
  for (const auto& r : rows) {
    csv::Row row = {r.participant_id, std::string(to_string(r.condition)), r.attention_passed ? "true" : "false",
                    r.technical_issue ? "true" : "false", r.min_time_violation ? "true" : "false"};
    for (auto id : measures::kMeasureIds) row.push_back(shortest(r.deltas.at(id)));
    out += csv::format_row(row);
  }
  return out;
}

std::vector<ParticipantDeltas> read_deltas_csv(std::string_view text) {
  csv::Table table(csv::parse(text));
  for (const auto& col : deltas_csv_header()) {
    if (table.column(col) < 0) throw csv::ParseError("deltas CSV lacks column '" + col + "'");
  }
  std::vector<ParticipantDeltas> rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::size_t line = i + 2;
    ParticipantDeltas d;
    d.participant_id = table.cell(i, "participant_id");
    try {
      d.condition = condition_from_string(table.cell(i, "condition"));
    } catch (const InvalidCondition& e) {
      throw csv::ParseError("line " + std::to_string(line) + ": " + e.what());
    }
    d.attention_passed = parse_bool(table.cell(i, "attention_passed"), line, "attention_passed");
    d.technical_issue = parse_bool(table.cell(i, "technical_issue"), line, "technical_issue");
    d.min_time_violation = parse_bool(table.cell(i, "min_time_violation"), line, "min_time_violation");
    for (auto id : measures::kMeasureIds) {
      std::string col(id);
      d.deltas.per_measure[col] = parse_double(table.cell(i, col), line, col);
    }
    rows.push_back(std::move(d));
  }
  return rows;
}

std::string ReportRow::homogeneity() const {
  if (analysis.path == stats::AnalysisPath::nonparametric) return "n/a";
  return analysis.homogeneous ? "Yes" : "No";
}

std::string ReportRow::anova_type() const {
  switch (analysis.path) {
    case stats::AnalysisPath::nonparametric:
      return "Kruskal-Wallis";
    case stats::AnalysisPath::welch:
      return "Welch";
    case stats::AnalysisPath::classic:
      return "One-way";
  }
  return "One-way";
}

std::string ReportRow::stars() const { return significance_stars(p()); }

std::string significance_stars(double p) {
  if (p < 0.0001) return "****";
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::string format_p(double p) {
  if (p >= 0.0001) return fmt::format("{:.4f}", p);
  return fmt::format("{:.2e}", p);
}

std::string format_statistic(double f) {
  if (std::isinf(f)) return "inf";
  return fmt::format("{:.3f}", f);
}

std::string format_mean_sd(const ConditionSummary& s) { return fmt::format("{:.2f} ± {:.2f}", s.mean, s.sd); }

std::vector<std::string> report_cells(const ReportRow& row) {
  std::vector<std::string> cells = {row.label, row.homogeneity(), row.anova_type(), format_statistic(row.f_statistic()),
                                    format_p(row.p()) + row.stars()};
  for (const auto& s : row.by_condition) cells.push_back(format_mean_sd(s));
  return cells;
}

std::vector<ReportRow> build_report(const std::vector<ParticipantDeltas>& rows, const ReportOptions& options) {
  std::map<Condition, std::size_t> counts;
  for (const auto& r : rows) ++counts[r.condition];
  for (auto c : kReportConditions) {
    if (counts[c] < 3) {
      throw InsufficientGroups("condition '" + std::string(to_string(c)) + "' has " + std::to_string(counts[c]) +
                               " records; at least 3 are needed");
    }
  }

  std::vector<ReportRow> report;
  for (auto id : measures::kMeasureIds) {
    std::string measure(id);
    stats::SampleGroups groups{measure, {}};
    ReportRow row;
    row.measure_id = measure;
    row.label = std::string(measures::measure_label(id));
    for (std::size_t ci = 0; ci < kReportConditions.size(); ++ci) {
      const Condition c = kReportConditions[ci];
      stats::Group g{std::string(to_string(c)), {}};
      for (const auto& r : rows) {
        if (r.condition == c) g.values.push_back(r.deltas.at(measure));
      }
      row.by_condition[ci] = summarize(g.values);
      groups.groups.push_back(std::move(g));
    }
    row.analysis = stats::analyze_measure(groups, options.analysis);
    report.push_back(std::move(row));
  }
  return report;
}

std::vector<ReportRow> build_report(const std::vector<ParticipantRecord>& records, const ReportOptions& options,
                                    const measures::Instrument& instrument) {
  std::vector<ParticipantDeltas> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(participant_deltas(r, instrument));
  return build_report(rows, options);
}

std::string render_text(const std::vector<ReportRow>& rows) {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header = {"Measure", "Homogeneity", "ANOVA Type", "F-statistic", "p-value"};
  for (auto c : kReportConditions) header.emplace_back(display_name(c));
  table.push_back(header);
  for (const auto& r : rows) table.push_back(report_cells(r));

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], utf8_length(line[i]));
  }
  std::string out;
  for (std::size_t li = 0; li < table.size(); ++li) {
    std::string line;
    for (std::size_t i = 0; i < table[li].size(); ++i) {
      if (i > 0) line += "  ";
      line += i + 1 == table[li].size() ? table[li][i] : pad(table[li][i], widths[i]);
    }
    out += line + "\n";
    if (li == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      total += 2 * (widths.size() - 1);
      out += std::string(total, '-') + "\n";
    }
  }
  out += "* p<0.05; ** p<0.01; *** p<0.001; **** p<0.0001\n";
  return out;
}

nlohmann::json to_json(const std::vector<ReportRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json conds = nlohmann::json::object();
    for (std::size_t i = 0; i < kReportConditions.size(); ++i) {
      const auto& s = r.by_condition[i];
      conds[std::string(to_string(kReportConditions[i]))] = {{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}};
    }
    out.push_back({{"measure_id", r.measure_id},
                   {"label", r.label},
                   {"homogeneity", r.homogeneity()},
                   {"anova_type", r.anova_type()},
                   {"f_statistic", std::isinf(r.f_statistic()) ? nlohmann::json("inf") : nlohmann::json(r.f_statistic())},
                   {"p", r.p()},
                   {"stars", r.stars()},
                   {"cells", report_cells(r)},
                   {"conditions", std::move(conds)},
                   {"analysis", stats::to_json(r.analysis)}});
  }
  return out;
}

}  // namespace futureyou::harness
