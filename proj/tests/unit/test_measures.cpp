#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "futureyou/measures.hpp"
#include "futureyou/service/simulate.hpp"

using namespace futureyou;
using namespace futureyou::measures;

namespace {

// Every administered item for the phase at `value`, attention checks answered correctly.
ScaleBattery uniform(BatteryPhase phase, int value, const Instrument& inst = Instrument::defaults()) {
  ScaleBattery b{phase, {}};
  for (const auto& item : inst.items_for(phase)) b.responses[item.item_id] = value;
  for (const auto& c : inst.attention_checks()) b.responses[c.item_id] = c.expected;
  return b;
}

}  // namespace

TEST_CASE("default instrument layout") {
  const auto& inst = Instrument::defaults();
  CHECK(inst.scales().size() == 9);
  CHECK(inst.scale("perceived_realism").administered == Administered::post_only);
  CHECK_THROWS_AS(inst.scale("nope"), DefinitionError);

  const auto pre = inst.items_for(BatteryPhase::pre);
  const auto post = inst.items_for(BatteryPhase::post);
  CHECK(post.size() == pre.size() + 3);
  for (const auto& check : inst.attention_checks()) {
    REQUIRE(check.position < static_cast<int>(pre.size()));
    CHECK(pre[check.position].item_id == check.item_id);
    CHECK(pre[check.position].attention_check);
    CHECK(post[check.position].item_id == check.item_id);
  }
  const auto ids = inst.all_item_ids();
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == ids.size());
}

TEST_CASE("instrument json round trip, and the shipped file equals the defaults") {
  const auto& inst = Instrument::defaults();
  const auto back = Instrument::from_json(inst.to_json());
  CHECK(back.scales() == inst.scales());
  CHECK(back.attention_checks() == inst.attention_checks());

  std::ifstream in(std::filesystem::path(FUTUREYOU_DATA_DIR) / "instruments.json");
  CHECK(nlohmann::json::parse(in) == inst.to_json());
}

TEST_CASE("instrument validation") {
  auto j = Instrument::defaults().to_json();
  j["scales"][1]["items"][0]["id"] = "happy";  // duplicate id
  CHECK_THROWS_AS(Instrument::from_json(j), DefinitionError);
  j = Instrument::defaults().to_json();
  j["attention_checks"][0]["expected"] = 9;
  CHECK_THROWS_AS(Instrument::from_json(j), DefinitionError);
  j = Instrument::defaults().to_json();
  j["scales"][0]["items"] = nlohmann::json::array();
  CHECK_THROWS_AS(Instrument::from_json(j), DefinitionError);
}

TEST_CASE("scale scores with reverse scoring") {
  const auto& inst = Instrument::defaults();
  auto b = uniform(BatteryPhase::pre, 4);
  // opt_4 is reverse scored: 1 counts as 7.
  b.responses["opt_1"] = 7;
  b.responses["opt_2"] = 7;
  b.responses["opt_3"] = 7;
  b.responses["opt_4"] = 1;
  b.responses["opt_5"] = 7;
  CHECK(score_scale(b, inst.scale("state_optimism")) == doctest::Approx(7.0));
  // ins_2 and ins_3 reverse: (2 + (8-6) + (8-5) + 4) / 4
  b.responses["ins_1"] = 2;
  b.responses["ins_2"] = 6;
  b.responses["ins_3"] = 5;
  b.responses["ins_4"] = 4;
  CHECK(score_scale(b, inst.scale("sris_insight")) == doctest::Approx(2.75));
  CHECK(item_score(b, inst.scale("sris_insight"), "ins_2") == doctest::Approx(2.0));
  CHECK(item_score(b, inst.scale("sris_insight"), "ins_1") == doctest::Approx(2.0));
  b.responses["anxious"] = 6;
  b.responses["sad"] = 1;
  // negative subscale: anxious 6, overwhelmed 4, unmotivated 4, sad 1, stressed 4
  CHECK(score_scale(b, inst.scale("eac_emotion"), "negative") == doctest::Approx(19.0 / 5.0));
  CHECK_THROWS_AS(score_scale(b, inst.scale("eac_emotion"), "missing"), DefinitionError);
}

TEST_CASE("reverse scoring maps x to 8 - x on the whole range") {
  const auto& inst = Instrument::defaults();
  for (int v = 1; v <= 7; ++v) {
    const auto b = uniform(BatteryPhase::pre, v);
    CHECK(item_score(b, inst.scale("rosenberg_self_esteem"), "rse_2") == doctest::Approx(8 - v));
    CHECK(item_score(b, inst.scale("rosenberg_self_esteem"), "rse_1") == doctest::Approx(v));
  }
}

TEST_CASE("battery validation") {
  auto b = uniform(BatteryPhase::pre, 3);
  CHECK_NOTHROW(validate_battery(b));
  b.responses["calm"] = 0;
  try {
    validate_battery(b);
    FAIL("expected OutOfRange");
  } catch (const OutOfRange& e) {
    CHECK(e.item_id() == "calm");
  }
  b.responses["calm"] = 8;
  CHECK_THROWS_AS(validate_battery(b), OutOfRange);
  b = uniform(BatteryPhase::pre, 3);
  b.responses.erase("rse_10");
  b.responses.erase("attn_2");
  try {
    validate_battery(b);
    FAIL("expected IncompleteBattery");
  } catch (const IncompleteBattery& e) {
    CHECK(e.missing() == std::vector<std::string>{"attn_2", "rse_10"});
  }
  // Post-only items are required after, not before.
  b = uniform(BatteryPhase::pre, 3);
  CHECK_NOTHROW(validate_battery(b));
  auto post = uniform(BatteryPhase::post, 3);
  post.responses.erase("real_1");
  CHECK_THROWS_AS(validate_battery(post), IncompleteBattery);
}

TEST_CASE("attention checks") {
  auto b = uniform(BatteryPhase::pre, 5);
  CHECK(attention_passed(b));
  b.responses["attn_1"] = 3;
  CHECK_FALSE(attention_passed(b));
  b = uniform(BatteryPhase::pre, 5);
  b.responses.erase("attn_2");
  CHECK_FALSE(attention_passed(b));
}

TEST_CASE("deltas are post minus pre and fsc is the subscale mean") {
  const auto pre = uniform(BatteryPhase::pre, 3);
  auto post = uniform(BatteryPhase::post, 3);
  for (auto id : {"fscq_sim_1", "fscq_sim_2", "fscq_sim_3"}) post.responses[id] = 6;
  post.responses["anxious"] = 1;
  const auto d = delta(pre, post);
  CHECK(d.per_measure.size() == kMeasureIds.size());
  CHECK(d.at("fscq_similarity") == doctest::Approx(3.0));
  CHECK(d.at("fscq_vividness") == doctest::Approx(0.0));
  CHECK(d.at("fsc_overall") == doctest::Approx(1.0));
  CHECK(d.at("anxious") == doctest::Approx(-2.0));
  CHECK(d.at("negative_emotion") == doctest::Approx(-0.4));
  CHECK(d.at("insight") == doctest::Approx(0.0));
  CHECK_THROWS_AS(d.at("realism"), DefinitionError);
}

TEST_CASE("identical batteries have zero deltas for random inputs") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 200; ++i) {
    const auto pre = service::synthetic_battery(BatteryPhase::pre, rng);
    CHECK_NOTHROW(validate_battery(pre));
    auto post = pre;
    post.phase = BatteryPhase::post;
    for (const auto& item : Instrument::defaults().scale("perceived_realism").items) post.responses[item.item_id] = 4;
    for (const auto& [id, v] : delta(pre, post).per_measure) CHECK(v == doctest::Approx(0.0));
    for (const auto& [id, v] : measure_scores(pre)) {
      CHECK(v >= 1.0);
      CHECK(v <= 7.0);
    }
  }
}

TEST_CASE("labels and fscq texts") {
  CHECK(measure_label("negative_emotion") == "Δ Negative Emotion");
  CHECK(measure_label("fsc_overall") == "Δ Future Self-Continuity");
  const auto texts = fscq_item_texts();
  CHECK(texts.size() == 3);
  CHECK(texts.at("similarity").size() == 3);
}

TEST_CASE("responses csv round trip") {
  std::mt19937_64 rng(4);
  std::vector<ResponseRow> rows;
  for (int i = 0; i < 20; ++i) {
    auto pre = service::synthetic_battery(BatteryPhase::pre, rng);
    rows.push_back({"p" + std::to_string(i), pre});
    rows.push_back({"p" + std::to_string(i), service::synthetic_followup(pre, harness::Condition::chat, rng)});
  }
  const auto text = write_responses_csv(rows);
  CHECK(read_responses_csv(text) == rows);
  CHECK(write_responses_csv(read_responses_csv(text)) == text);
  CHECK_THROWS(read_responses_csv("participant_id,phase,happy\np1,pre,abc\n"));
}
