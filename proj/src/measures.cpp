#include "futureyou/measures.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>

#include "futureyou/csv.hpp"

namespace futureyou::measures {
namespace {

const std::set<std::string> kFscqSubscales = {"similarity", "vividness", "positivity"};
const std::set<std::string> kEmotionSubscales = {"positive", "negative"};
const std::vector<std::string> kNamedEmotions = {"anxious", "overwhelmed", "unmotivated"};
const std::vector<std::string> kRequiredScales = {"eac_emotion",  "state_optimism", "sris_reflection",
                                                  "sris_insight", "fscq",           "hope_agency",
                                                  "cfc",          "rosenberg_self_esteem", "perceived_realism"};

ScaleItem item(std::string id, std::string text, bool reverse = false, std::optional<std::string> sub = {}) {
  return {std::move(id), std::move(text), reverse, std::move(sub)};
}

// Abridged inventories. Item counts and wording are configurable through
// the instrument file; only ids, subscale tags and reverse flags are used
// by scoring.
std::vector<ScaleDefinition> default_scales() {
  std::vector<ScaleDefinition> s;

  auto emo = [](const char* id, const char* word, const char* sub) {
    return item(id, std::string("Right now, I feel ") + word + ".", false, std::string(sub));
  };
  s.push_back({"eac_emotion",
               "Emotion and Arousal Checklist (abridged)",
               {emo("happy", "happy", "positive"), emo("calm", "calm", "positive"),
                emo("hopeful", "hopeful", "positive"), emo("energetic", "energetic", "positive"),
                emo("content", "content", "positive"), emo("anxious", "anxious", "negative"),
                emo("overwhelmed", "overwhelmed", "negative"), emo("unmotivated", "unmotivated", "negative"),
                emo("sad", "sad", "negative"), emo("stressed", "stressed", "negative")},
               Administered::pre_and_post});

  s.push_back({"state_optimism",
               "State Optimism Measure",
               {item("opt_1", "I am feeling optimistic about my future."),
                item("opt_2", "Right now, I expect more good things than bad to happen to me."),
                item("opt_3", "At this moment, I am feeling confident about how things will turn out."),
                item("opt_4", "Right now it is hard for me to feel hopeful about what lies ahead.", true),
                item("opt_5", "I feel that things are going to work out for me.")},
               Administered::pre_and_post});

  s.push_back({"sris_reflection",
               "Self-Reflection (SRIS)",
               {item("refl_1", "I often take time to think about why I feel the way I do."),
                item("refl_2", "It is important to me to understand my own thoughts."),
                item("refl_3", "I rarely spend time reflecting on myself.", true),
                item("refl_4", "I enjoy examining what goes on in my mind.")},
               Administered::pre_and_post});

  s.push_back({"sris_insight",
               "Insight (SRIS)",
               {item("ins_1", "I usually know why I react to things the way I do."),
                item("ins_2", "I am often unsure about what I really feel.", true),
                item("ins_3", "My own behavior often puzzles me.", true),
                item("ins_4", "I have a clear sense of what my feelings mean.")},
               Administered::pre_and_post});

  auto sim = std::string("similarity");
  auto viv = std::string("vividness");
  auto pos = std::string("positivity");
  s.push_back(
      {"fscq",
       "Future Self-Continuity Questionnaire",
       {item("fscq_sim_1", "How similar are you now to what you will be like when you are 60 years old?", false, sim),
        item("fscq_sim_2", "How similar are your values now to the values you will hold when you are 60 years old?",
             false, sim),
        item("fscq_sim_3",
             "How similar is your personality now to what your personality will be like when you are 60 years old?",
             false, sim),
        item("fscq_viv_1", "How vividly can you imagine what you will be like in 10 years from now?", false, viv),
        item("fscq_viv_2", "How clearly can you picture your daily life 10 years from now?", false, viv),
        item("fscq_viv_3", "How easily can you imagine the person you will be 10 years from now?", false, viv),
        item("fscq_pos_1", "How much do you like who you will be in 10 years from now?", false, pos),
        item("fscq_pos_2", "How positively do you feel about the person you will be 10 years from now?", false, pos),
        item("fscq_pos_3", "How much do you look forward to being the person you will be 10 years from now?", false,
             pos)},
       Administered::pre_and_post});

  s.push_back({"hope_agency",
               "Adult Hope Scale (agency)",
               {item("agency_1", "I energetically pursue my goals."),
                item("agency_2", "My past experiences have prepared me well for my future."),
                item("agency_3", "I have been pretty successful in life."),
                item("agency_4", "I meet the goals that I set for myself.")},
               Administered::pre_and_post});

  s.push_back({"cfc",
               "Consideration of Future Consequences",
               {item("cfc_1", "I think about how things might be in the future and try to influence them now."),
                item("cfc_2", "I am willing to give up happiness now to reach outcomes I want later."),
                item("cfc_3", "I only act to satisfy immediate concerns and let the future take care of itself.",
                     true),
                item("cfc_4", "My convenience right now matters more to me than distant consequences.", true),
                item("cfc_5", "I take warnings about bad outcomes seriously even if they are years away.")},
               Administered::pre_and_post});

  s.push_back({"rosenberg_self_esteem",
               "Rosenberg Self-Esteem Scale",
               {item("rse_1", "On the whole, I am satisfied with myself."),
                item("rse_2", "At times I think I am no good at all.", true),
                item("rse_3", "I feel that I have a number of good qualities."),
                item("rse_4", "I am able to do things as well as most other people."),
                item("rse_5", "I feel I do not have much to be proud of.", true),
                item("rse_6", "I certainly feel useless at times.", true),
                item("rse_7", "I feel that I am a person of worth."),
                item("rse_8", "I wish I could have more respect for myself.", true),
                item("rse_9", "All in all, I am inclined to feel that I am a failure.", true),
                item("rse_10", "I take a positive attitude toward myself.")},
               Administered::pre_and_post});

  s.push_back({"perceived_realism",
               "Perceived Realism",
               {item("real_1", "The character I talked to felt like a realistic version of my future self."),
                item("real_2", "The character's life story felt believable."),
                item("real_3", "The character's responses felt artificial.", true)},
               Administered::post_only});
  return s;
}

std::vector<AttentionCheck> default_checks() {
  return {{"attn_1", "To show you are reading carefully, please select 2 for this statement.", 2, 8},
          {"attn_2", "Please select 6 for this statement.", 6, 30}};
}

void check_instrument(const std::vector<ScaleDefinition>& scales, const std::vector<AttentionCheck>& checks) {
  std::set<std::string> scale_ids, item_ids;
  for (const auto& def : scales) {
    if (!scale_ids.insert(def.scale_id).second) throw DefinitionError("duplicate scale '" + def.scale_id + "'");
    if (def.items.empty()) throw DefinitionError("scale '" + def.scale_id + "' has no items");
    for (const auto& it : def.items) {
      if (it.item_id.empty()) throw DefinitionError("empty item id in scale '" + def.scale_id + "'");
      if (!item_ids.insert(it.item_id).second) throw DefinitionError("duplicate item id '" + it.item_id + "'");
    }
  }
  for (const auto& id : kRequiredScales) {
    if (!scale_ids.count(id)) throw DefinitionError("instrument lacks scale '" + id + "'");
  }
  for (const auto& def : scales) {
    if (def.scale_id == "fscq" || def.scale_id == "eac_emotion") {
      const auto& allowed = def.scale_id == "fscq" ? kFscqSubscales : kEmotionSubscales;
      std::set<std::string> seen;
      for (const auto& it : def.items) {
        if (!it.subscale || !allowed.count(*it.subscale)) {
          throw DefinitionError("item '" + it.item_id + "' has an invalid subscale for " + def.scale_id);
        }
        seen.insert(*it.subscale);
      }
      if (seen != allowed) throw DefinitionError("scale '" + def.scale_id + "' is missing a subscale");
    }
    if (def.scale_id == "eac_emotion") {
      for (const auto& name : kNamedEmotions) {
        auto found = std::find_if(def.items.begin(), def.items.end(),
                                  [&](const ScaleItem& it) { return it.item_id == name; });
        if (found == def.items.end()) throw DefinitionError("emotion checklist lacks item '" + name + "'");
        if (found->reverse_scored) throw DefinitionError("item '" + name + "' must not be reverse scored");
      }
    }
  }
  for (const auto& c : checks) {
    if (!item_ids.insert(c.item_id).second) throw DefinitionError("duplicate item id '" + c.item_id + "'");
    if (c.expected < kMinResponse || c.expected > kMaxResponse) {
      throw DefinitionError("attention check '" + c.item_id + "' expects a value outside 1..7");
    }
    if (c.position < 0) throw DefinitionError("attention check '" + c.item_id + "' has a negative position");
  }
}

Administered administered_from_string(const std::string& s) {
  if (s == "pre_and_post") return Administered::pre_and_post;
  if (s == "post_only") return Administered::post_only;
  throw DefinitionError("unknown administration '" + s + "'");
}

bool in_phase(const ScaleDefinition& def, BatteryPhase phase) {
  return def.administered == Administered::pre_and_post || phase == BatteryPhase::post;
}

int lookup(const ScaleBattery& battery, const std::string& item_id) {
  auto it = battery.responses.find(item_id);
  if (it == battery.responses.end()) throw IncompleteBattery({item_id});
  if (it->second < kMinResponse || it->second > kMaxResponse) throw OutOfRange(item_id, it->second);
  return it->second;
}

double corrected(const ScaleItem& it, int raw) { return it.reverse_scored ? 8.0 - raw : double(raw); }

const std::map<std::string_view, std::string_view>& labels() {
  static const std::map<std::string_view, std::string_view> m = {
      {"positive_emotion", "Δ Positive Emotion"},
      {"negative_emotion", "Δ Negative Emotion"},
      {"anxious", "Δ Anxious"},
      {"overwhelmed", "Δ Overwhelmed"},
      {"unmotivated", "Δ Unmotivated"},
      {"agency", "Δ Agency"},
      {"optimism", "Δ Optimism"},
      {"fscq_similarity", "Δ FSCQ 1 (Similarity)"},
      {"fscq_vividness", "Δ FSCQ 2 (Vividness)"},
      {"fscq_positivity", "Δ FSCQ 3 (Positivity)"},
      {"fsc_overall", "Δ Future Self-Continuity"},
      {"future_consideration", "Δ Future Consideration"},
      {"self_esteem", "Δ Self-Esteem"},
      {"self_reflection", "Δ Self-Reflection"},
      {"insight", "Δ Insight"},
  };
  return m;
}

}  // namespace

IncompleteBattery::IncompleteBattery(std::vector<std::string> missing)
    : Error([&] {
        std::string msg = "battery is missing responses for:";
        for (const auto& m : missing) msg += " " + m;
        return msg;
      }()),
      missing_(std::move(missing)) {}

std::string_view to_string(BatteryPhase p) { return p == BatteryPhase::pre ? "pre" : "post"; }

BatteryPhase battery_phase_from_string(std::string_view s) {
  if (s == "pre") return BatteryPhase::pre;
  if (s == "post") return BatteryPhase::post;
  throw DefinitionError("unknown battery phase '" + std::string(s) + "'");
}

Instrument::Instrument(std::vector<ScaleDefinition> scales, std::vector<AttentionCheck> checks)
    : scales_(std::move(scales)), checks_(std::move(checks)) {
  check_instrument(scales_, checks_);
  std::stable_sort(checks_.begin(), checks_.end(),
                   [](const AttentionCheck& a, const AttentionCheck& b) { return a.position < b.position; });
}

const Instrument& Instrument::defaults() {
  static const Instrument instrument(default_scales(), default_checks());
  return instrument;
}

Instrument Instrument::from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kFormatVersion) {
      throw DefinitionError("unsupported instrument version " + j.at("version").dump());
    }
    std::vector<ScaleDefinition> scales;
    for (const auto& js : j.at("scales")) {
      ScaleDefinition def;
      def.scale_id = js.at("id").get<std::string>();
      def.title = js.value("title", def.scale_id);
      def.administered = administered_from_string(js.value("administered", "pre_and_post"));
      for (const auto& ji : js.at("items")) {
        ScaleItem it;
        it.item_id = ji.at("id").get<std::string>();
        it.prompt_text = ji.at("prompt").get<std::string>();
        it.reverse_scored = ji.value("reverse", false);
        if (ji.contains("subscale") && !ji.at("subscale").is_null()) it.subscale = ji.at("subscale").get<std::string>();
        def.items.push_back(std::move(it));
      }
      scales.push_back(std::move(def));
    }
    std::vector<AttentionCheck> checks;
    if (j.contains("attention_checks")) {
      for (const auto& jc : j.at("attention_checks")) {
        checks.push_back({jc.at("id").get<std::string>(), jc.at("prompt").get<std::string>(),
                          jc.at("expected").get<int>(), jc.at("position").get<int>()});
      }
    }
    return Instrument(std::move(scales), std::move(checks));
  } catch (const nlohmann::json::exception& e) {
    throw DefinitionError(std::string("malformed instrument file: ") + e.what());
  }
}

Instrument Instrument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DefinitionError("cannot open instrument file " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DefinitionError("instrument file is not JSON: " + path.string());
  return from_json(j);
}

nlohmann::json Instrument::to_json() const {
  nlohmann::json scales = nlohmann::json::array();
  for (const auto& def : scales_) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : def.items) {
      nlohmann::json ji = {{"id", it.item_id}, {"prompt", it.prompt_text}, {"reverse", it.reverse_scored}};
      if (it.subscale) ji["subscale"] = *it.subscale;
      items.push_back(std::move(ji));
    }
    scales.push_back({{"id", def.scale_id},
                      {"title", def.title},
                      {"administered", def.administered == Administered::post_only ? "post_only" : "pre_and_post"},
                      {"items", std::move(items)}});
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : checks_) {
    checks.push_back({{"id", c.item_id}, {"prompt", c.prompt_text}, {"expected", c.expected}, {"position", c.position}});
  }
  return {{"version", kFormatVersion}, {"scales", std::move(scales)}, {"attention_checks", std::move(checks)}};
}

const ScaleDefinition& Instrument::scale(std::string_view scale_id) const {
  for (const auto& def : scales_) {
    if (def.scale_id == scale_id) return def;
  }
  throw DefinitionError("unknown scale '" + std::string(scale_id) + "'");
}

std::vector<BatteryItem> Instrument::items_for(BatteryPhase phase) const {
  std::vector<BatteryItem> out;
  for (const auto& def : scales_) {
    if (!in_phase(def, phase)) continue;
    for (const auto& it : def.items) out.push_back({it.item_id, it.prompt_text, false});
  }
  // Ascending insertion puts each check at exactly its configured index.
  for (const auto& c : checks_) {
    auto pos = std::min<std::size_t>(static_cast<std::size_t>(c.position), out.size());
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), {c.item_id, c.prompt_text, true});
  }
  return out;
}

std::vector<std::string> Instrument::all_item_ids() const {
  std::vector<std::string> ids;
  for (const auto& b : items_for(BatteryPhase::post)) ids.push_back(b.item_id);
  return ids;
}

void validate_battery(const ScaleBattery& battery, const Instrument& instrument) {
  std::vector<std::string> missing;
  for (const auto& b : instrument.items_for(battery.phase)) {
    auto it = battery.responses.find(b.item_id);
    if (it == battery.responses.end()) {
      missing.push_back(b.item_id);
    } else if (it->second < kMinResponse || it->second > kMaxResponse) {
      throw OutOfRange(b.item_id, it->second);
    }
  }
  if (!missing.empty()) throw IncompleteBattery(std::move(missing));
}

double score_scale(const ScaleBattery& battery, const ScaleDefinition& def, std::optional<std::string_view> subscale) {
  std::vector<std::string> missing;
  double sum = 0.0;
  int count = 0;
  for (const auto& it : def.items) {
    if (subscale && (!it.subscale || *it.subscale != *subscale)) continue;
    auto r = battery.responses.find(it.item_id);
    if (r == battery.responses.end()) {
      missing.push_back(it.item_id);
      continue;
    }
    if (r->second < kMinResponse || r->second > kMaxResponse) throw OutOfRange(it.item_id, r->second);
    sum += corrected(it, r->second);
    ++count;
  }
  if (!missing.empty()) throw IncompleteBattery(std::move(missing));
  if (count == 0) {
    throw DefinitionError("scale '" + def.scale_id + "' has no items" +
                          (subscale ? " in subscale '" + std::string(*subscale) + "'" : std::string()));
  }
  return sum / count;
}

double item_score(const ScaleBattery& battery, const ScaleDefinition& def, std::string_view item_id) {
  for (const auto& it : def.items) {
    if (it.item_id == item_id) return corrected(it, lookup(battery, it.item_id));
  }
  throw DefinitionError("scale '" + def.scale_id + "' has no item '" + std::string(item_id) + "'");
}

bool attention_passed(const ScaleBattery& battery, const Instrument& instrument) {
  for (const auto& c : instrument.attention_checks()) {
    auto it = battery.responses.find(c.item_id);
    if (it == battery.responses.end() || it->second != c.expected) return false;
  }
  return true;
}

std::string_view measure_label(std::string_view measure_id) {
  auto it = labels().find(measure_id);
  if (it == labels().end()) throw DefinitionError("unknown measure '" + std::string(measure_id) + "'");
  return it->second;
}

double DeltaScores::at(std::string_view id) const {
  auto it = per_measure.find(std::string(id));
  if (it == per_measure.end()) throw DefinitionError("no delta for measure '" + std::string(id) + "'");
  return it->second;
}

std::map<std::string, double> measure_scores(const ScaleBattery& battery, const Instrument& instrument) {
  const auto& emotion = instrument.scale("eac_emotion");
  const auto& fscq = instrument.scale("fscq");
  std::map<std::string, double> m;
  m["positive_emotion"] = score_scale(battery, emotion, "positive");
  m["negative_emotion"] = score_scale(battery, emotion, "negative");
  for (const auto& name : kNamedEmotions) m[name] = item_score(battery, emotion, name);
  m["agency"] = score_scale(battery, instrument.scale("hope_agency"));
  m["optimism"] = score_scale(battery, instrument.scale("state_optimism"));
  m["fscq_similarity"] = score_scale(battery, fscq, "similarity");
  m["fscq_vividness"] = score_scale(battery, fscq, "vividness");
  m["fscq_positivity"] = score_scale(battery, fscq, "positivity");
  m["fsc_overall"] = (m["fscq_similarity"] + m["fscq_vividness"] + m["fscq_positivity"]) / 3.0;
  m["future_consideration"] = score_scale(battery, instrument.scale("cfc"));
  m["self_esteem"] = score_scale(battery, instrument.scale("rosenberg_self_esteem"));
  m["self_reflection"] = score_scale(battery, instrument.scale("sris_reflection"));
  m["insight"] = score_scale(battery, instrument.scale("sris_insight"));
  return m;
}

DeltaScores delta(const ScaleBattery& pre, const ScaleBattery& post, const Instrument& instrument) {
  auto a = measure_scores(pre, instrument);
  auto b = measure_scores(post, instrument);
  DeltaScores d;
  for (auto id : kMeasureIds) {
    std::string key(id);
    d.per_measure[key] = b.at(key) - a.at(key);
  }
  return d;
}

std::map<std::string, std::vector<std::string>> fscq_item_texts(const Instrument& instrument) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& it : instrument.scale("fscq").items) out[*it.subscale].push_back(it.prompt_text);
  return out;
}

std::string write_responses_csv(const std::vector<ResponseRow>& rows, const Instrument& instrument) {
  auto ids = instrument.all_item_ids();
  std::set<std::string> known(ids.begin(), ids.end());
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.battery.responses) {
      if (known.insert(k).second) ids.push_back(k);
    }
  }
  csv::Row header = {"participant_id", "phase"};
  header.insert(header.end(), ids.begin(), ids.end());
  std::string out = csv::format_row(header);
  for (const auto& r : rows) {
    csv::Row row = {r.participant_id, std::string(to_string(r.battery.phase))};
    for (const auto& id : ids) {
      auto it = r.battery.responses.find(id);
      row.push_back(it == r.battery.responses.end() ? "" : std::to_string(it->second));
    }
    out += csv::format_row(row);
  }
  return out;
}

std::vector<ResponseRow> read_responses_csv(std::string_view text) {
  csv::Table table(csv::parse(text));
  if (table.column("participant_id") != 0 || table.column("phase") != 1) {
    throw csv::ParseError("responses CSV must start with participant_id,phase");
  }
  const auto& header = table.header();
  std::vector<ResponseRow> rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table.row(i);
    ResponseRow r;
    r.participant_id = row[0];
    if (row[1] == "pre") {
      r.battery.phase = BatteryPhase::pre;
    } else if (row[1] == "post") {
      r.battery.phase = BatteryPhase::post;
    } else {
      throw csv::ParseError("row " + std::to_string(i + 2) + ": unknown phase '" + row[1] + "'");
    }
    for (std::size_t c = 2; c < header.size(); ++c) {
      const std::string& cell = row[c];
      if (cell.empty()) continue;
      int v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw csv::ParseError("row " + std::to_string(i + 2) + ": '" + header[c] + "' is not an integer");
      }
      r.battery.responses[header[c]] = v;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace futureyou::measures
