#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "futureyou/image_codec.hpp"
#include "futureyou/life_story.hpp"
#include "futureyou/llm_gateway.hpp"
#include "futureyou/measures.hpp"
#include "futureyou/time_util.hpp"
#include "json.hpp"

namespace fixtures {

inline std::map<std::string, std::string> ada_answers() {
  return {{"name", "Ada"},
          {"age", "25"},
          {"pronoun_and_sexual_orientation", "she/her, straight"},
          {"place", "Boston"},
          {"people_in_life", "my brother Leo and my friend Sam"},
          {"low_point", "failing my first chemistry exam"},
          {"turning_point", "I volunteered at a summer science camp"},
          {"proud", "tutoring kids in my neighbourhood"},
          {"life_project", "a school garden program"},
          {"career", "biology teacher"},
          {"professional_accomplish", "I would like to be a full-time high school biology teacher in Boston"},
          {"financial_accomplish", "owning a small house"},
          {"family_accomplish", "two kids who love nature"},
          {"where_to_live", "a house near the coast"},
          {"daily_life", "morning walks and tutoring in the afternoon"}};
}

inline futureyou::life_story::LifeStoryProfile ada() {
  return futureyou::life_story::validate_profile(ada_answers());
}

// Delegates to the stub unless `fail_when` says otherwise. Counts calls.
class ScriptedBackend final : public futureyou::llm::ChatBackend {
 public:
  using Predicate = std::function<bool(const futureyou::llm::CompletionRequest&, int call)>;

  explicit ScriptedBackend(Predicate fail_when = {}) : fail_when_(std::move(fail_when)) {}

  futureyou::llm::CompletionResult complete(const futureyou::llm::CompletionRequest& request) const override {
    const int call = calls_++;
    Predicate fail_when;
    {
      std::lock_guard lock(mu_);
      fail_when = fail_when_;
    }
    if (fail_when && fail_when(request, call)) throw futureyou::llm::Timeout("scripted failure", 1);
    return futureyou::llm::stub_complete(request);
  }

  int calls() const { return calls_; }
  void set_failure(Predicate p) {
    std::lock_guard lock(mu_);
    fail_when_ = std::move(p);
  }

 private:
  mutable std::mutex mu_;
  Predicate fail_when_;
  mutable std::atomic<int> calls_{0};
};

// Clock that only moves when told to.
class ManualClock {
 public:
  explicit ManualClock(futureyou::TimePoint start = futureyou::parse_rfc3339("2024-03-04T09:00:00.000Z"))
      : now_(std::make_shared<std::atomic<long long>>(start.time_since_epoch().count())) {}

  futureyou::Clock clock() const {
    auto now = now_;
    return [now] { return futureyou::TimePoint(std::chrono::milliseconds(now->load())); };
  }
  void advance(std::chrono::milliseconds d) { *now_ += d.count(); }

 private:
  std::shared_ptr<std::atomic<long long>> now_;
};

inline std::vector<std::uint8_t> portrait_png(int w = 256, int h = 256) {
  futureyou::image::RgbImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3)};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>((i * 7) % 251);
  return futureyou::image::encode_png(img);
}

// Survey responses with every item at `value` and the attention checks passed.
inline nlohmann::json responses(futureyou::measures::BatteryPhase phase, int value) {
  const auto& inst = futureyou::measures::Instrument::defaults();
  nlohmann::json j = nlohmann::json::object();
  for (const auto& item : inst.items_for(phase)) j[item.item_id] = value;
  for (const auto& c : inst.attention_checks()) j[c.item_id] = c.expected;
  return j;
}

}  // namespace fixtures
