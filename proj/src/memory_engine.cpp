#include "futureyou/memory_engine.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "futureyou/strings.hpp"
#include "futureyou/text_template.hpp"

namespace futureyou::memory {

const std::string_view kBasePromptTemplate =
    "The following is the interview of {name}, who is a successful {career}. {name}'s pronoun and sexual orientation are {pronoun_and_sexual_orientation}. {name} is from {place}. The most important people in {name}'s life are: “{people_in_life}”. Right now, {name} is 60 years old and can share insightful stories and experiences, give definitive advice and life lessons as {name} reflects on life. In the past, the most important low point in {name}'s life was “{low_point}”. {name} also experienced a turning point in their life when “{turning_point}”. {name} has dedicated their life to a significant life project called “{life_project}”. {name} is also proud of great things that the young {name} has done: “{proud}”. In the past, when {name} was {age} years old, {name} had many dreams and hopes for the future. {age}-year-old {name} has said “{professional_accomplish}, {financial_accomplish}, and {family_accomplish}”. Right now, {name} is living in {where_to_live} and having the following daily life: {daily_life}.";

namespace {

std::vector<ProbingTopic> default_topics() {
  return {
      {"career",
       {"{name} once said about the future: “{professional_accomplish}” {name} went on to become a successful "
        "{career}. Now {name} is 60 years old. Speaking as {name} in the first person and in the past tense, "
        "tell a rewarding story from your career and another memorable moment from your working life."}},
      {"family",
       {"When {name} was {age} years old, {name} hoped for this family life: “{family_accomplish}” Now {name} is "
        "60 years old. Speaking as {name} in the first person and in the past tense, describe one of the happiest "
        "memories with your family from the last 30 years."}},
      {"finances",
       {"When {name} was {age} years old, {name} described the financial future {name} wanted: "
        "“{financial_accomplish}” Now {name} is 60 years old. Speaking as {name} in the first person and in the "
        "past tense, describe how your finances developed over the years and a decision you are glad you made."}},
      {"life_project",
       {"{name} dedicated their life to a significant life project called “{life_project}”. Now {name} is 60 "
        "years old. Speaking as {name} in the first person and in the past tense, describe how you first became "
        "involved in this project and a moment when it made a real difference to someone."}},
      {"daily_life",
       {"{name} now lives in {where_to_live} and once described the daily life {name} wanted at 60: "
        "“{daily_life}” Speaking as {name} at 60 years old, in the first person and in the past tense, describe "
        "how you came to live this way and a small moment from an ordinary day that you cherish."}},
      {"low_point",
       {"The most important low point in {name}'s life was “{low_point}”. Now {name} is 60 years old. Speaking "
        "as {name} in the first person and in the past tense, remember how you got through that time and what "
        "it taught you."}},
      {"turning_point",
       {"{name} experienced a turning point in their life when “{turning_point}”. Now {name} is 60 years old. "
        "Speaking as {name} in the first person and in the past tense, remember how this turning point shaped "
        "the decades that followed."}},
  };
}

void check_topics(const std::vector<ProbingTopic>& topics) {
  if (topics.empty()) throw CatalogError("probing catalog has no topics");
  const std::set<std::string_view> fields(life_story::kProfileFields.begin(), life_story::kProfileFields.end());
  std::set<std::string> ids;
  for (const auto& t : topics) {
    if (!ids.insert(t.id).second) throw CatalogError("duplicate topic '" + t.id + "'");
    if (t.prompt_templates.empty()) throw CatalogError("topic '" + t.id + "' has no probing prompt");
    for (const auto& p : t.prompt_templates) {
      for (const auto& name : template_placeholders(p)) {
        if (!fields.count(name)) throw CatalogError("topic '" + t.id + "' uses unknown placeholder {" + name + "}");
      }
    }
  }
}

struct Job {
  std::string topic_id;
  std::string prompt;
};

std::string generate_one(const Job& job, const BasePrompt& base, const llm::ChatBackend& backend,
                         const GenerationOptions& options) {
  llm::CompletionRequest request;
  request.system_context = base.text;
  request.messages.push_back({llm::Role::user, job.prompt});
  request.temperature = options.temperature;
  request.max_output_tokens = options.max_output_tokens;

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    try {
      auto result = backend.complete(request);
      if (result.finish_reason != llm::FinishReason::error && !trim(result.text).empty()) {
        return std::string(trim(result.text));
      }
      last_error = "backend returned no usable text";
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw BackendError(job.topic_id, last_error);
}

}  // namespace

BasePrompt render_base_prompt(const life_story::LifeStoryProfile& profile) {
  BasePrompt out;
  out.placeholder_bindings = profile.bindings();
  out.text = render_template(kBasePromptTemplate, out.placeholder_bindings);
  return out;
}

ProbingCatalog::ProbingCatalog(std::vector<ProbingTopic> topics) : topics_(std::move(topics)) {
  check_topics(topics_);
}

const ProbingCatalog& ProbingCatalog::defaults() {
  static const ProbingCatalog catalog(default_topics());
  return catalog;
}

ProbingCatalog ProbingCatalog::from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kFormatVersion) {
      throw CatalogError("unsupported probing catalog version " + j.at("version").dump());
    }
    std::vector<ProbingTopic> topics;
    for (const auto& t : j.at("topics")) {
      topics.push_back({t.at("id").get<std::string>(), t.at("prompts").get<std::vector<std::string>>()});
    }
    return ProbingCatalog(std::move(topics));
  } catch (const nlohmann::json::exception& e) {
    throw CatalogError(std::string("malformed probing catalog: ") + e.what());
  }
}

ProbingCatalog ProbingCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("cannot open probing catalog " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw CatalogError(path.string() + " is not valid JSON");
  return from_json(j);
}

nlohmann::json ProbingCatalog::to_json() const {
  nlohmann::json topics = nlohmann::json::array();
  for (const auto& t : topics_) topics.push_back({{"id", t.id}, {"prompts", t.prompt_templates}});
  return {{"version", kFormatVersion}, {"topics", topics}};
}

const ProbingTopic* ProbingCatalog::find(std::string_view id) const {
  auto it = std::find_if(topics_.begin(), topics_.end(), [id](const ProbingTopic& t) { return t.id == id; });
  return it == topics_.end() ? nullptr : &*it;
}

std::vector<std::string> probing_questions(std::string_view topic_id, const life_story::LifeStoryProfile& profile,
                                           const ProbingCatalog& catalog) {
  const ProbingTopic* topic = catalog.find(topic_id);
  if (topic == nullptr) throw UnknownTopic(std::string(topic_id));
  const auto bindings = profile.bindings();
  std::vector<std::string> out;
  out.reserve(topic->prompt_templates.size());
  for (const auto& t : topic->prompt_templates) out.push_back(render_template(t, bindings));
  return out;
}

std::vector<MemoryFragment> generate_fragments(const life_story::LifeStoryProfile& profile,
                                               const llm::ChatBackend& backend, const GenerationOptions& options,
                                               const ProbingCatalog& catalog) {
  const BasePrompt base = render_base_prompt(profile);
  std::vector<Job> jobs;
  for (const auto& topic : catalog.topics()) {
    for (auto& prompt : probing_questions(topic.id, profile, catalog)) jobs.push_back({topic.id, std::move(prompt)});
  }

  std::vector<std::optional<std::string>> texts(jobs.size());
  std::vector<std::optional<BackendError>> failures(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        texts[i] = generate_one(jobs[i], base, backend, options);
      } catch (const BackendError& e) {
        failures[i] = e;
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.max_in_flight, 1, jobs.size());
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  // Every job runs to completion so the reported topic does not depend on
  // scheduling: it is the first failure in catalog order.
  for (auto& f : failures) {
    if (f) throw *f;
  }

  std::vector<MemoryFragment> out;
  out.reserve(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    out.push_back({jobs[i].topic_id, jobs[i].prompt, std::move(*texts[i]), static_cast<int>(i)});
  }
  return out;
}

FutureMemory assemble_backstory(const BasePrompt& base, std::vector<MemoryFragment> fragments,
                                const AssemblyOptions& options) {
  if (fragments.empty()) throw EmptyFragments();
  std::sort(fragments.begin(), fragments.end(),
            [](const MemoryFragment& a, const MemoryFragment& b) { return a.order_index < b.order_index; });
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    if (fragments[i].order_index != static_cast<int>(i)) {
      throw InvalidFragments("fragment order_index values must be unique and contiguous from 0");
    }
    if (fragments[i].generated_text.empty()) {
      throw InvalidFragments("fragment " + std::to_string(i) + " has no generated text");
    }
  }

  FutureMemory out;
  out.base = base;
  const std::size_t delim_len = utf8_length(options.delimiter);
  std::size_t length = utf8_length(base.text);
  if (length > options.context_budget) {
    out.warnings.push_back("base prompt alone exceeds the context budget of " +
                           std::to_string(options.context_budget) + " characters");
  }
  std::size_t kept = 0;
  for (; kept < fragments.size(); ++kept) {
    const std::size_t next_len = length + delim_len + utf8_length(fragments[kept].generated_text);
    if (next_len > options.context_budget) break;
    length = next_len;
  }
  for (std::size_t i = kept; i < fragments.size(); ++i) {
    out.warnings.push_back("dropped memory fragment " + std::to_string(i) + " (" + fragments[i].topic_id +
                           ") to fit the context budget");
  }
  fragments.resize(kept);

  out.assembled_text = base.text;
  for (const auto& f : fragments) {
    out.assembled_text += options.delimiter;
    out.assembled_text += f.generated_text;
  }
  out.fragments = std::move(fragments);
  return out;
}

nlohmann::json to_json(const FutureMemory& memory) {
  nlohmann::json fragments = nlohmann::json::array();
  for (const auto& f : memory.fragments) {
    fragments.push_back({{"topic_id", f.topic_id},
                         {"probing_prompt", f.probing_prompt},
                         {"generated_text", f.generated_text},
                         {"order_index", f.order_index}});
  }
  return {{"version", kPersonaFormatVersion},
          {"base", {{"text", memory.base.text}, {"bindings", memory.base.placeholder_bindings}}},
          {"fragments", fragments},
          {"assembled_text", memory.assembled_text},
          {"warnings", memory.warnings}};
}

FutureMemory future_memory_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kPersonaFormatVersion) {
      throw CatalogError("unsupported persona record version " + j.at("version").dump());
    }
    FutureMemory m;
    m.base.text = j.at("base").at("text").get<std::string>();
    m.base.placeholder_bindings = j.at("base").at("bindings").get<std::map<std::string, std::string>>();
    for (const auto& f : j.at("fragments")) {
      m.fragments.push_back({f.at("topic_id").get<std::string>(), f.at("probing_prompt").get<std::string>(),
                             f.at("generated_text").get<std::string>(), f.at("order_index").get<int>()});
    }
    m.assembled_text = j.at("assembled_text").get<std::string>();
    m.warnings = j.value("warnings", std::vector<std::string>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CatalogError(std::string("malformed persona record: ") + e.what());
  }
}

}  // namespace futureyou::memory
