#include "futureyou/service/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "futureyou/image_codec.hpp"
#include "futureyou/life_story.hpp"
#include "futureyou/llm_gateway.hpp"
#include "futureyou/service/service.hpp"
#include "futureyou/strings.hpp"

namespace futureyou::service {
namespace {

template <std::size_t N>
const std::string& pick(const std::array<std::string, N>& options, std::mt19937_64& rng) {
  return options[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

// Expected post-minus-pre shift of one raw item, before reverse scoring.
double item_shift(harness::Condition c, const measures::ScaleDefinition& scale, const measures::ScaleItem& item) {
  double shift = 0.0;
  const bool negative_emotion = scale.scale_id == "eac_emotion" && item.subscale == "negative";
  switch (c) {
    case harness::Condition::future_you:
      if (scale.scale_id == "fscq") shift = 0.5;
      if (negative_emotion) shift = -0.6;
      if (scale.scale_id == "hope_agency") shift = 0.2;
      break;
    case harness::Condition::chat:
      if (negative_emotion) shift = -0.4;
      if (scale.scale_id == "hope_agency") shift = 0.2;
      break;
    case harness::Condition::questionnaire:
      if (scale.scale_id == "fscq") shift = 0.25;
      break;
    case harness::Condition::control:
      break;
  }
  return item.reverse_scored ? -shift : shift;
}

int clamp_response(double v) {
  return std::clamp(static_cast<int>(std::lround(v)), measures::kMinResponse, measures::kMaxResponse);
}

std::vector<std::uint8_t> synthetic_portrait(std::uint64_t tag) {
  image::RgbImage img{160, 160, std::vector<std::uint8_t>(160 * 160 * 3)};
  const auto base = static_cast<int>(tag % 97);
  for (int y = 0; y < 160; ++y) {
    for (int x = 0; x < 160; ++x) {
      auto* px = &img.pixels[(static_cast<std::size_t>(y) * 160 + x) * 3];
      px[0] = static_cast<std::uint8_t>((x + base) % 256);
      px[1] = static_cast<std::uint8_t>((y * 2 + base) % 256);
      px[2] = static_cast<std::uint8_t>((x + y + base * 2) % 256);
    }
  }
  return image::encode_png(img);
}

const std::array<std::string, 8> kUserLines = {
    "What does an ordinary morning look like for you?",
    "Was it hard to leave the job I have now?",
    "What do you wish I would start doing this year?",
    "How did you get through the low points?",
    "Who is still around from my life right now?",
    "What are you most proud of?",
    "Do you ever regret the choices we made?",
    "What should I stop worrying about?",
};

}  // namespace

std::map<std::string, std::string> synthetic_answers(std::mt19937_64& rng) {
  static const std::array<std::string, 6> names = {"Alex", "Sam", "Priya", "Jordan", "Mei", "Tomas"};
  static const std::array<std::string, 4> pronouns = {"she/her, straight", "he/him, gay", "they/them, queer",
                                                      "he/him, straight"};
  static const std::array<std::string, 4> places = {"Boston", "a small town in Ohio", "Lisbon", "Nairobi"};
  static const std::array<std::string, 3> people = {"my sister and two close friends", "my partner and our dog",
                                                    "my parents and my roommate"};
  static const std::array<std::string, 3> lows = {"failing my first exam in college", "losing my grandmother",
                                                  "a year of feeling stuck at work"};
  static const std::array<std::string, 3> turns = {"moving to a new city on my own", "starting therapy",
                                                   "taking a gap year"};
  static const std::array<std::string, 3> projects = {"becoming a good teacher", "building a small company",
                                                      "learning to be patient"};
  static const std::array<std::string, 3> prouds = {"finishing my degree", "running a marathon",
                                                    "looking after my brother"};
  static const std::array<std::string, 4> careers = {"a teacher", "a nurse", "a software engineer", "a carpenter"};
  static const std::array<std::string, 3> prof = {"running my own school", "leading a research team",
                                                  "teaching hundreds of apprentices"};
  static const std::array<std::string, 3> fin = {"owning a home outright", "never worrying about rent",
                                                 "saving enough to travel"};
  static const std::array<std::string, 3> fam = {"raising two kids", "staying close to my siblings",
                                                 "hosting family dinners every week"};
  static const std::array<std::string, 3> where = {"a house by the sea", "the city I grew up in", "a quiet farm"};
  static const std::array<std::string, 3> days = {"gardening, reading and long walks",
                                                  "volunteering and cooking for friends",
                                                  "painting in the mornings and visiting family"};
  const int age = std::uniform_int_distribution<int>(life_story::kMinAge, 35)(rng);
  return {{"name", pick(names, rng)},
          {"age", std::to_string(age)},
          {"pronoun_and_sexual_orientation", pick(pronouns, rng)},
          {"place", pick(places, rng)},
          {"people_in_life", pick(people, rng)},
          {"low_point", pick(lows, rng)},
          {"turning_point", pick(turns, rng)},
          {"life_project", pick(projects, rng)},
          {"proud", pick(prouds, rng)},
          {"career", pick(careers, rng)},
          {"professional_accomplish", pick(prof, rng)},
          {"financial_accomplish", pick(fin, rng)},
          {"family_accomplish", pick(fam, rng)},
          {"where_to_live", pick(where, rng)},
          {"daily_life", pick(days, rng)}};
}

measures::ScaleBattery synthetic_battery(measures::BatteryPhase phase, std::mt19937_64& rng,
                                         const measures::Instrument& instrument) {
  std::normal_distribution<double> noise(4.2, 1.3);
  measures::ScaleBattery b{phase, {}};
  for (const auto& item : instrument.items_for(phase)) b.responses[item.item_id] = clamp_response(noise(rng));
  for (const auto& check : instrument.attention_checks()) b.responses[check.item_id] = check.expected;
  return b;
}

measures::ScaleBattery synthetic_followup(const measures::ScaleBattery& pre, harness::Condition condition,
                                          std::mt19937_64& rng, const measures::Instrument& instrument) {
  std::normal_distribution<double> noise(0.0, 0.8);
  std::normal_distribution<double> fresh(4.2, 1.3);
  measures::ScaleBattery b{measures::BatteryPhase::post, {}};
  for (const auto& scale : instrument.scales()) {
    for (const auto& item : scale.items) {
      auto it = pre.responses.find(item.item_id);
      const double start = it != pre.responses.end() ? it->second : fresh(rng);
      b.responses[item.item_id] = clamp_response(start + item_shift(condition, scale, item) + noise(rng));
    }
  }
  for (const auto& check : instrument.attention_checks()) b.responses[check.item_id] = check.expected;
  return b;
}

SimulationResult simulate_study(const SimulationOptions& options) {
  if (options.flagged > options.participants) throw Error("more flagged participants than participants");
  const auto& instrument = measures::Instrument::defaults();
  ServiceOptions service_options;
  service_options.seed = options.seed;
  service_options.weights = options.weights;
  service_options.generation.max_in_flight = 1;

  auto store = std::make_shared<MemoryEventStore>();
  Service service(service_options, store, std::make_shared<llm::StubBackend>(), std::make_shared<aging::ImageStore>(),
                  fixed_step_clock(parse_rfc3339("2024-03-04T09:00:00.000Z"), std::chrono::seconds(30)));

  std::mt19937_64 picker(splitmix64(options.seed ^ 0x5f1a66edULL));
  std::vector<std::size_t> ranks(options.participants);
  std::iota(ranks.begin(), ranks.end(), 0);
  std::shuffle(ranks.begin(), ranks.end(), picker);
  std::vector<int> flag(options.participants, 0);  // 0 none, 1 attention, 2 technical
  for (std::size_t r = 0; r < options.flagged; ++r) flag[ranks[r]] = r % 2 == 0 ? 1 : 2;

  const auto& checks = instrument.attention_checks();
  for (std::size_t i = 0; i < options.participants; ++i) {
    std::mt19937_64 rng(splitmix64(options.seed + 0x9e37ULL * (i + 1)));
    const auto env = service.create_session();
    const auto& id = env.session_id;
    service.advance_stage(id, {{"stage", "consent"},
                               {"consent", true},
                               {"demographics", {{"age_band", rng() % 2 ? "18-24" : "25-35"}}}});
    const auto pre = synthetic_battery(measures::BatteryPhase::pre, rng, instrument);
    nlohmann::json pre_json(pre.responses);
    service.advance_stage(id, {{"stage", "pre_survey"}, {"responses", pre_json}});

    auto stage = service.envelope(id).stage;
    if (stage == Stage::life_story) {
      service.advance_stage(id, {{"stage", "life_story"}, {"answers", synthetic_answers(rng)}});
      stage = service.envelope(id).stage;
    }
    if (stage == Stage::portrait) {
      service.upload_portrait(id, synthetic_portrait(rng()));
      service.advance_stage(id, {{"stage", "portrait"}});
      service.advance_stage(id, {{"stage", "aging"}});
      stage = service.envelope(id).stage;
    }
    if (stage == Stage::chat) {
      while (!service.messages_since(id, 0).finish_eligible) {
        service.post_message(id, kUserLines[rng() % kUserLines.size()]);
      }
      for (int extra = static_cast<int>(rng() % 2); extra > 0; --extra) {
        service.post_message(id, kUserLines[rng() % kUserLines.size()]);
      }
      service.advance_stage(id, {{"stage", "chat"}});
    }

    auto post = synthetic_followup(pre, env.condition, rng, instrument);
    if (flag[i] == 1 && !checks.empty()) {
      const auto& check = checks[rng() % checks.size()];
      post.responses[check.item_id] = check.expected == measures::kMaxResponse ? check.expected - 1 : check.expected + 1;
    }
    nlohmann::json post_json(post.responses);
    service.advance_stage(id, {{"stage", "post_survey"}, {"responses", post_json}, {"technical_issue", flag[i] == 2}});
  }

  return {service.records(), service.export_dataset(), store};
}

}  // namespace futureyou::service
