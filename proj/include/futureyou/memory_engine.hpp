#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"
#include "futureyou/life_story.hpp"
#include "futureyou/llm_gateway.hpp"
#include "json.hpp"

namespace futureyou::memory {

// The interview prompt that seeds every persona. `{field}` markers are
// the LifeStoryProfile fields.
extern const std::string_view kBasePromptTemplate;
inline constexpr std::string_view kBasePromptPrefix = "The following is the interview of ";

struct BasePrompt {
  std::string text;
  std::map<std::string, std::string> placeholder_bindings;

  bool operator==(const BasePrompt&) const = default;
};

BasePrompt render_base_prompt(const life_story::LifeStoryProfile& profile);

class UnknownTopic : public Error {
 public:
  explicit UnknownTopic(const std::string& topic) : Error("unknown memory topic '" + topic + "'") {}
};

class CatalogError : public Error {
 public:
  using Error::Error;
};

struct ProbingTopic {
  std::string id;
  std::vector<std::string> prompt_templates;  // placeholders as in kBasePromptTemplate
};

// Ordered topic set with the probing prompt(s) appended to each answer.
class ProbingCatalog {
 public:
  static constexpr int kFormatVersion = 1;

  static const ProbingCatalog& defaults();
  static ProbingCatalog from_json(const nlohmann::json& j);
  static ProbingCatalog load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const std::vector<ProbingTopic>& topics() const { return topics_; }
  const ProbingTopic* find(std::string_view id) const;

 private:
  explicit ProbingCatalog(std::vector<ProbingTopic> topics);
  std::vector<ProbingTopic> topics_;
};

std::vector<std::string> probing_questions(std::string_view topic_id, const life_story::LifeStoryProfile& profile,
                                           const ProbingCatalog& catalog = ProbingCatalog::defaults());

struct MemoryFragment {
  std::string topic_id;
  std::string probing_prompt;
  std::string generated_text;
  int order_index = 0;

  bool operator==(const MemoryFragment&) const = default;
};

class BackendError : public Error {
 public:
  BackendError(std::string topic_id, const std::string& detail)
      : Error("memory generation failed for topic '" + topic_id + "': " + detail), topic_id_(std::move(topic_id)) {}
  const std::string& topic_id() const { return topic_id_; }

 private:
  std::string topic_id_;
};

struct GenerationOptions {
  int retries = 2;        // extra attempts per prompt
  int max_in_flight = 4;  // 1 means strictly sequential
  double temperature = llm::kMemoryTemperature;
  int max_output_tokens = 400;
};

// One fragment per (topic, probing prompt). Requests may complete in any
// order; order_index always follows catalog order. All-or-nothing.
std::vector<MemoryFragment> generate_fragments(const life_story::LifeStoryProfile& profile,
                                               const llm::ChatBackend& backend, const GenerationOptions& options = {},
                                               const ProbingCatalog& catalog = ProbingCatalog::defaults());

struct FutureMemory {
  BasePrompt base;
  std::vector<MemoryFragment> fragments;  // kept fragments, by order_index
  std::string assembled_text;
  std::vector<std::string> warnings;

  bool operator==(const FutureMemory&) const = default;
};

struct AssemblyOptions {
  std::size_t context_budget = 6000;  // code points
  std::string delimiter = "\n\n";
};

class EmptyFragments : public Error {
 public:
  EmptyFragments() : Error("cannot assemble a backstory from zero memory fragments") {}
};

class InvalidFragments : public Error {
 public:
  using Error::Error;
};

// base ⧺ delim ⧺ f0 ⧺ delim ⧺ f1 ... Whole fragments are dropped from the
// tail while the result exceeds the budget; each drop adds a warning.
FutureMemory assemble_backstory(const BasePrompt& base, std::vector<MemoryFragment> fragments,
                                const AssemblyOptions& options = {});

inline constexpr int kPersonaFormatVersion = 1;

nlohmann::json to_json(const FutureMemory& memory);
FutureMemory future_memory_from_json(const nlohmann::json& j);

}  // namespace futureyou::memory
