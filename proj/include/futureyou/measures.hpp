#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"
#include "json.hpp"

namespace futureyou::measures {

enum class BatteryPhase { pre, post };

std::string_view to_string(BatteryPhase p);
BatteryPhase battery_phase_from_string(std::string_view s);

enum class Administered { pre_and_post, post_only };

struct ScaleItem {
  std::string item_id;
  std::string prompt_text;
  bool reverse_scored = false;
  std::optional<std::string> subscale;

  bool operator==(const ScaleItem&) const = default;
};

struct ScaleDefinition {
  std::string scale_id;
  std::string title;
  std::vector<ScaleItem> items;
  Administered administered = Administered::pre_and_post;

  bool operator==(const ScaleDefinition&) const = default;
};

// Instructed-response item ("please select 2") shown at `position` within
// the flattened item order of each administered battery.
struct AttentionCheck {
  std::string item_id;
  std::string prompt_text;
  int expected = 1;
  int position = 0;

  bool operator==(const AttentionCheck&) const = default;
};

inline constexpr int kMinResponse = 1;
inline constexpr int kMaxResponse = 7;

class DefinitionError : public Error {
 public:
  using Error::Error;
};

class IncompleteBattery : public Error {
 public:
  explicit IncompleteBattery(std::vector<std::string> missing);
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

class OutOfRange : public Error {
 public:
  OutOfRange(std::string item_id, int value)
      : Error("response " + std::to_string(value) + " for '" + item_id + "' is outside 1..7"),
        item_id_(std::move(item_id)) {}
  const std::string& item_id() const { return item_id_; }

 private:
  std::string item_id_;
};

struct BatteryItem {
  std::string item_id;
  std::string prompt_text;
  bool attention_check = false;
};

// The full questionnaire: scales plus embedded attention checks.
class Instrument {
 public:
  static constexpr int kFormatVersion = 1;

  static const Instrument& defaults();
  static Instrument from_json(const nlohmann::json& j);
  static Instrument load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const std::vector<ScaleDefinition>& scales() const { return scales_; }
  const std::vector<AttentionCheck>& attention_checks() const { return checks_; }
  const ScaleDefinition& scale(std::string_view scale_id) const;

  // Presentation order for one phase, attention checks spliced in.
  std::vector<BatteryItem> items_for(BatteryPhase phase) const;
  // Every item id the instrument knows, in a stable order (for CSV columns).
  std::vector<std::string> all_item_ids() const;

 private:
  Instrument(std::vector<ScaleDefinition> scales, std::vector<AttentionCheck> checks);
  std::vector<ScaleDefinition> scales_;
  std::vector<AttentionCheck> checks_;
};

struct ScaleBattery {
  BatteryPhase phase = BatteryPhase::pre;
  std::map<std::string, int> responses;

  bool operator==(const ScaleBattery&) const = default;
};

// Every administered item for the phase is present and within 1..7.
void validate_battery(const ScaleBattery& battery, const Instrument& instrument = Instrument::defaults());

// Mean of the item values after reverse scoring (8 - x), optionally
// restricted to one subscale.
double score_scale(const ScaleBattery& battery, const ScaleDefinition& def,
                   std::optional<std::string_view> subscale = std::nullopt);

// Reverse-corrected value of a single item.
double item_score(const ScaleBattery& battery, const ScaleDefinition& def, std::string_view item_id);

bool attention_passed(const ScaleBattery& battery, const Instrument& instrument = Instrument::defaults());

// Post-minus-pre measures, in report order.
inline constexpr std::array<std::string_view, 15> kMeasureIds = {
    "positive_emotion", "negative_emotion", "anxious",         "overwhelmed",
    "unmotivated",      "agency",           "optimism",        "fscq_similarity",
    "fscq_vividness",   "fscq_positivity",  "fsc_overall",     "future_consideration",
    "self_esteem",      "self_reflection",  "insight"};

// Display label used in the report ("Δ Negative Emotion").
std::string_view measure_label(std::string_view measure_id);

struct DeltaScores {
  std::map<std::string, double> per_measure;
  double at(std::string_view id) const;
};

// Composite values of every measure for one battery.
std::map<std::string, double> measure_scores(const ScaleBattery& battery,
                                             const Instrument& instrument = Instrument::defaults());

DeltaScores delta(const ScaleBattery& pre, const ScaleBattery& post,
                  const Instrument& instrument = Instrument::defaults());

// FSCQ prompts grouped by subscale (similarity, vividness, positivity).
std::map<std::string, std::vector<std::string>> fscq_item_texts(const Instrument& instrument = Instrument::defaults());

// Raw responses, one CSV row per participant and phase:
// participant_id,phase,<item ids...>. Items not administered in a phase
// are left blank.
struct ResponseRow {
  std::string participant_id;
  ScaleBattery battery;

  bool operator==(const ResponseRow&) const = default;
};

std::string write_responses_csv(const std::vector<ResponseRow>& rows,
                                const Instrument& instrument = Instrument::defaults());
// Throws csv::ParseError on malformed cells.
std::vector<ResponseRow> read_responses_csv(std::string_view text);

}  // namespace futureyou::measures
