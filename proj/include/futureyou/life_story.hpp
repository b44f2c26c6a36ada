#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"
#include "json.hpp"

namespace futureyou::life_story {

enum class Phase { present, future };

std::string_view to_string(Phase p);
Phase phase_from_string(std::string_view s);

inline constexpr int kMinAge = 18;
inline constexpr int kMaxAge = 59;
inline constexpr int kFutureSelfAge = 60;

// Every placeholder of the base interview prompt, in template order of
// first appearance. The questionnaire must cover exactly this set.
inline constexpr std::array<std::string_view, 15> kProfileFields = {
    "name",          "career",       "pronoun_and_sexual_orientation",
    "place",         "people_in_life", "low_point",
    "turning_point", "life_project", "proud",
    "age",           "professional_accomplish", "financial_accomplish",
    "family_accomplish", "where_to_live", "daily_life"};

struct QuestionSpec {
  std::string id;
  Phase phase = Phase::present;
  std::string prompt_text;
  std::string example_answer;
  bool required = true;
  int min_length = 1;

  bool operator==(const QuestionSpec&) const = default;
};

struct LifeStoryProfile {
  std::string name;
  int age = 0;
  std::string pronoun_and_sexual_orientation;
  std::string place;
  std::string people_in_life;
  std::string low_point;
  std::string turning_point;
  std::string proud;
  std::string life_project;
  std::string career;
  std::string professional_accomplish;
  std::string financial_accomplish;
  std::string family_accomplish;
  std::string where_to_live;
  std::string daily_life;

  // placeholder -> value, age rendered as a decimal integer.
  std::map<std::string, std::string> bindings() const;
  // Same keys as bindings(); feeding this back through validate_profile
  // reproduces the profile.
  std::map<std::string, std::string> to_answers() const { return bindings(); }

  bool operator==(const LifeStoryProfile&) const = default;
};

void to_json(nlohmann::json& j, const LifeStoryProfile& p);
void from_json(const nlohmann::json& j, LifeStoryProfile& p);

class MissingAnswer : public Error {
 public:
  MissingAnswer(std::string id, const std::string& detail)
      : Error("missing answer for '" + id + "'" + (detail.empty() ? "" : ": " + detail)), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class InvalidAge : public Error {
 public:
  explicit InvalidAge(const std::string& raw)
      : Error("age must be a whole number between " + std::to_string(kMinAge) + " and " +
              std::to_string(kMaxAge) + ", got '" + raw + "'") {}
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Versioned questionnaire. Wording is configurable; the id set is not.
class QuestionSchema {
 public:
  static constexpr int kFormatVersion = 1;

  static const QuestionSchema& default_schema();
  static QuestionSchema from_json(const nlohmann::json& j);
  static QuestionSchema load(const std::filesystem::path& path);

  nlohmann::json to_json() const;

  const std::vector<QuestionSpec>& all() const { return questions_; }
  std::vector<QuestionSpec> questions(Phase phase) const;
  const QuestionSpec* find(std::string_view id) const;

 private:
  explicit QuestionSchema(std::vector<QuestionSpec> questions);

  std::vector<QuestionSpec> questions_;
};

// Ordered questions of one phase from the default schema.
std::vector<QuestionSpec> question_schema(Phase phase);

// Trims every answer, enforces required/min_length and parses the age.
LifeStoryProfile validate_profile(const std::map<std::string, std::string>& raw_answers,
                                  const QuestionSchema& schema = QuestionSchema::default_schema());

}  // namespace futureyou::life_story
