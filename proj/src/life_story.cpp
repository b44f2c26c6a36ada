#include "futureyou/life_story.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "futureyou/strings.hpp"

namespace futureyou::life_story {
namespace {

// Default wording. Only the ids are load-bearing; the text is a
// reconstruction of a Life Story Interview style questionnaire.
std::vector<QuestionSpec> default_questions() {
  using P = Phase;
  return {
      {"name", P::present, "What is your first name?", "e.g., Alex", true, 1},
      {"age", P::present, "How old are you?", "e.g., 24", true, 1},
      {"pronoun_and_sexual_orientation", P::present, "What are your pronouns and sexual orientation?",
       "e.g., she/her and bisexual", true, 1},
      {"place", P::present, "Where are you from?", "e.g., Boston, Massachusetts", true, 1},
      {"people_in_life", P::present, "Who are the most important people in your life right now?",
       "e.g., my younger sister Maya and my best friend from college", true, 1},
      {"low_point", P::present,
       "Think back over your life so far. Describe a low point, a time when you felt especially bad, "
       "and what happened.",
       "e.g., failing my first year of university and having to retake classes", true, 1},
      {"turning_point", P::present,
       "Describe a turning point, an episode that changed how you understand yourself or your life.",
       "e.g., I volunteered at a summer camp and realized I love helping kids learn", true, 1},
      {"proud", P::present, "What is something you have done that you are proud of?",
       "e.g., I organized a fundraiser for my local animal shelter", true, 1},
      {"career", P::future, "At age 60, what career would you like to have had?",
       "e.g., high school biology teacher", true, 1},
      {"professional_accomplish", P::future,
       "What professional accomplishments would you like to achieve by the time you are 60?",
       "e.g., I would like to be a full-time high school biology teacher in Boston", true, 1},
      {"financial_accomplish", P::future, "What would you like your financial situation to be at 60?",
       "e.g., owning a small house and having enough saved to travel", true, 1},
      {"family_accomplish", P::future, "What would you like your family life to look like at 60?",
       "e.g., a loving partner and two grown children who visit often", true, 1},
      {"life_project", P::future, "What significant project would you like to dedicate your life to?",
       "e.g., a community garden that teaches kids about nature", true, 1},
      {"where_to_live", P::future, "Where would you like to be living at 60?",
       "e.g., a quiet house near the coast in Maine", true, 1},
      {"daily_life", P::future, "Describe what you would like an ordinary day to look like when you are 60.",
       "e.g., morning walks with my dog, gardening, and tutoring students in the afternoon", true, 1},
  };
}

void check_schema(const std::vector<QuestionSpec>& qs) {
  std::set<std::string> ids;
  for (const auto& q : qs) {
    if (!ids.insert(q.id).second) throw SchemaError("duplicate question id '" + q.id + "'");
    if (q.min_length < 0) throw SchemaError("negative min_length for '" + q.id + "'");
  }
  std::set<std::string> fields(kProfileFields.begin(), kProfileFields.end());
  if (ids != fields) {
    std::string msg = "question ids must be exactly the profile placeholders;";
    for (const auto& f : fields)
      if (!ids.count(f)) msg += " missing '" + f + "'";
    for (const auto& id : ids)
      if (!fields.count(id)) msg += " unexpected '" + id + "'";
    throw SchemaError(msg);
  }
  for (const auto& q : qs) {
    if (!q.required) throw SchemaError("question '" + q.id + "' feeds the persona template and must be required");
  }
}

int parse_age(const std::string& raw) {
  int age = 0;
  const char* first = raw.data();
  const char* last = raw.data() + raw.size();
  auto [ptr, ec] = std::from_chars(first, last, age);
  if (ec != std::errc{} || ptr != last || raw.empty()) throw InvalidAge(raw);
  if (age < kMinAge || age > kMaxAge) throw InvalidAge(raw);
  return age;
}

}  // namespace

std::string_view to_string(Phase p) { return p == Phase::present ? "present" : "future"; }

Phase phase_from_string(std::string_view s) {
  if (s == "present") return Phase::present;
  if (s == "future") return Phase::future;
  throw SchemaError("unknown phase '" + std::string(s) + "'");
}

std::map<std::string, std::string> LifeStoryProfile::bindings() const {
  return {
      {"name", name},
      {"age", std::to_string(age)},
      {"pronoun_and_sexual_orientation", pronoun_and_sexual_orientation},
      {"place", place},
      {"people_in_life", people_in_life},
      {"low_point", low_point},
      {"turning_point", turning_point},
      {"proud", proud},
      {"life_project", life_project},
      {"career", career},
      {"professional_accomplish", professional_accomplish},
      {"financial_accomplish", financial_accomplish},
      {"family_accomplish", family_accomplish},
      {"where_to_live", where_to_live},
      {"daily_life", daily_life},
  };
}

void to_json(nlohmann::json& j, const LifeStoryProfile& p) {
  j = nlohmann::json::object();
  for (const auto& [k, v] : p.bindings()) j[k] = v;
  j["age"] = p.age;
}

void from_json(const nlohmann::json& j, LifeStoryProfile& p) {
  std::map<std::string, std::string> answers;
  for (auto it = j.begin(); it != j.end(); ++it) {
    answers[it.key()] = it->is_string() ? it->get<std::string>() : it->dump();
  }
  p = validate_profile(answers);
}

QuestionSchema::QuestionSchema(std::vector<QuestionSpec> questions) : questions_(std::move(questions)) {
  check_schema(questions_);
}

const QuestionSchema& QuestionSchema::default_schema() {
  static const QuestionSchema schema(default_questions());
  return schema;
}

QuestionSchema QuestionSchema::from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kFormatVersion)
      throw SchemaError("unsupported question schema version " + j.at("version").dump());
    std::vector<QuestionSpec> qs;
    for (const auto& item : j.at("questions")) {
      QuestionSpec q;
      q.id = item.at("id").get<std::string>();
      q.phase = phase_from_string(item.at("phase").get<std::string>());
      q.prompt_text = item.at("prompt").get<std::string>();
      q.example_answer = item.value("example", "");
      q.required = item.value("required", true);
      q.min_length = item.value("min_length", 1);
      qs.push_back(std::move(q));
    }
    return QuestionSchema(std::move(qs));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed question schema: ") + e.what());
  }
}

QuestionSchema QuestionSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open question schema " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json QuestionSchema::to_json() const {
  nlohmann::json qs = nlohmann::json::array();
  for (const auto& q : questions_) {
    qs.push_back({{"id", q.id},
                  {"phase", to_string(q.phase)},
                  {"prompt", q.prompt_text},
                  {"example", q.example_answer},
                  {"required", q.required},
                  {"min_length", q.min_length}});
  }
  return {{"version", kFormatVersion}, {"questions", qs}};
}

std::vector<QuestionSpec> QuestionSchema::questions(Phase phase) const {
  std::vector<QuestionSpec> out;
  std::copy_if(questions_.begin(), questions_.end(), std::back_inserter(out),
               [phase](const QuestionSpec& q) { return q.phase == phase; });
  return out;
}

const QuestionSpec* QuestionSchema::find(std::string_view id) const {
  auto it = std::find_if(questions_.begin(), questions_.end(), [id](const QuestionSpec& q) { return q.id == id; });
  return it == questions_.end() ? nullptr : &*it;
}

std::vector<QuestionSpec> question_schema(Phase phase) { return QuestionSchema::default_schema().questions(phase); }

LifeStoryProfile validate_profile(const std::map<std::string, std::string>& raw_answers,
                                  const QuestionSchema& schema) {
  std::map<std::string, std::string> clean;
  for (const auto& q : schema.all()) {
    auto it = raw_answers.find(q.id);
    std::string value = it == raw_answers.end() ? std::string{} : std::string(trim(it->second));
    if (value.empty()) throw MissingAnswer(q.id, "");
    if (utf8_length(value) < static_cast<std::size_t>(q.min_length)) {
      throw MissingAnswer(q.id, "answer shorter than " + std::to_string(q.min_length) + " characters");
    }
    clean[q.id] = std::move(value);
  }

  LifeStoryProfile p;
  p.name = clean["name"];
  p.age = parse_age(clean["age"]);
  p.pronoun_and_sexual_orientation = clean["pronoun_and_sexual_orientation"];
  p.place = clean["place"];
  p.people_in_life = clean["people_in_life"];
  p.low_point = clean["low_point"];
  p.turning_point = clean["turning_point"];
  p.proud = clean["proud"];
  p.life_project = clean["life_project"];
  p.career = clean["career"];
  p.professional_accomplish = clean["professional_accomplish"];
  p.financial_accomplish = clean["financial_accomplish"];
  p.family_accomplish = clean["family_accomplish"];
  p.where_to_live = clean["where_to_live"];
  p.daily_life = clean["daily_life"];
  return p;
}

}  // namespace futureyou::life_story
