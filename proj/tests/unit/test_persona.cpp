#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "futureyou/life_story.hpp"
#include "futureyou/memory_engine.hpp"
#include "futureyou/strings.hpp"
#include "futureyou/text_template.hpp"

using namespace futureyou;
using namespace futureyou::life_story;
using namespace futureyou::memory;

namespace {

bool contains(const std::string& hay, std::string_view needle) { return hay.find(needle) != std::string::npos; }

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("question schema partitions present and future") {
  const auto present = question_schema(Phase::present);
  const auto future = question_schema(Phase::future);
  CHECK(std::all_of(present.begin(), present.end(), [](const QuestionSpec& q) { return q.phase == Phase::present; }));
  CHECK(std::all_of(future.begin(), future.end(), [](const QuestionSpec& q) { return q.phase == Phase::future; }));
  CHECK(present.size() + future.size() == kProfileFields.size());

  auto has = [](const std::vector<QuestionSpec>& qs, std::string_view id) {
    return std::any_of(qs.begin(), qs.end(), [&](const QuestionSpec& q) { return q.id == id; });
  };
  CHECK(has(present, "low_point"));
  CHECK(has(present, "turning_point"));
  CHECK(has(present, "proud"));
  CHECK(has(future, "professional_accomplish"));
  CHECK(has(future, "financial_accomplish"));
  CHECK(has(future, "family_accomplish"));
  for (const auto& q : QuestionSchema::default_schema().all()) {
    CHECK_FALSE(q.prompt_text.empty());
    CHECK(q.example_answer.rfind("e.g., ", 0) == 0);
  }
}

TEST_CASE("question schema covers exactly the template placeholders") {
  const auto names = template_placeholders(kBasePromptTemplate);
  std::set<std::string> from_template(names.begin(), names.end());
  std::set<std::string> fields(kProfileFields.begin(), kProfileFields.end());
  CHECK(from_template == fields);
  CHECK(names.size() == 15);
}

TEST_CASE("validate_profile maps answers") {
  const auto p = validate_profile(fixtures::ada_answers());
  CHECK(p.name == "Ada");
  CHECK(p.age == 25);
  CHECK(p.career == "biology teacher");
}

TEST_CASE("validate_profile trims and rejects blank answers") {
  auto answers = fixtures::ada_answers();
  answers["name"] = "  Ada \n";
  CHECK(validate_profile(answers).name == "Ada");

  answers.erase("low_point");
  try {
    validate_profile(answers);
    FAIL("expected MissingAnswer");
  } catch (const MissingAnswer& e) {
    CHECK(e.id() == "low_point");
  }
  answers = fixtures::ada_answers();
  answers["proud"] = "   ";
  CHECK_THROWS_AS(validate_profile(answers), MissingAnswer);
}

TEST_CASE("validate_profile age rules") {
  auto answers = fixtures::ada_answers();
  for (const char* bad : {"sixty", "25.5", "17", "60", "-3", "25 years"}) {
    answers["age"] = bad;
    CHECK_THROWS_AS(validate_profile(answers), InvalidAge);
  }
  answers["age"] = " 18 ";
  CHECK(validate_profile(answers).age == 18);
  answers["age"] = "59";
  CHECK(validate_profile(answers).age == 59);
}

TEST_CASE("profile round trips through answers and json") {
  const auto p = fixtures::ada();
  CHECK(validate_profile(p.to_answers()) == p);
  nlohmann::json j = p;
  CHECK(j.get<LifeStoryProfile>() == p);
}

TEST_CASE("schema json round trip and validation") {
  const auto& schema = QuestionSchema::default_schema();
  CHECK(QuestionSchema::from_json(schema.to_json()).all() == schema.all());

  auto j = schema.to_json();
  j["questions"].erase(0);
  CHECK_THROWS_AS(QuestionSchema::from_json(j), SchemaError);

  j = schema.to_json();
  j["questions"][0]["required"] = false;
  CHECK_THROWS_AS(QuestionSchema::from_json(j), SchemaError);
}

TEST_CASE("shipped content files equal the built-in defaults") {
  const std::filesystem::path data = FUTUREYOU_DATA_DIR;
  CHECK(nlohmann::json::parse(read(data / "question_schema.json")) == QuestionSchema::default_schema().to_json());
  CHECK(nlohmann::json::parse(read(data / "probing_topics.json")) == ProbingCatalog::defaults().to_json());
  CHECK(QuestionSchema::load(data / "question_schema.json").all() == QuestionSchema::default_schema().all());
}

TEST_CASE("base prompt rendering") {
  const auto base = render_base_prompt(fixtures::ada());
  CHECK(base.text.rfind("The following is the interview of Ada, who is a successful biology teacher.", 0) == 0);
  CHECK(contains(base.text, "when Ada was 25 years old"));
  CHECK(contains(base.text, "Right now, Ada is 60 years old"));
  CHECK(contains(base.text, "25-year-old Ada has said"));
  CHECK_FALSE(has_placeholder_marker(base.text));
  CHECK(base.placeholder_bindings.size() == 15);
  CHECK(base.placeholder_bindings.at("age") == "25");
  CHECK(render_base_prompt(fixtures::ada()) == base);
}

TEST_CASE("answers containing braces stay literal") {
  auto answers = fixtures::ada_answers();
  answers["daily_life"] = "writing {name} on a whiteboard";
  const auto base = render_base_prompt(validate_profile(answers));
  CHECK(contains(base.text, "daily life: writing {name} on a whiteboard."));
}

TEST_CASE("probing catalog has the seven topics") {
  const auto& topics = ProbingCatalog::defaults().topics();
  std::vector<std::string> ids;
  for (const auto& t : topics) ids.push_back(t.id);
  CHECK(ids == std::vector<std::string>{"career", "family", "finances", "life_project", "daily_life", "low_point",
                                        "turning_point"});
}

TEST_CASE("probing questions embed the answer and ask for a first-person memory") {
  const auto p = fixtures::ada();
  const auto qs = probing_questions("career", p);
  REQUIRE(qs.size() >= 1);
  CHECK(contains(qs[0], p.professional_accomplish));
  CHECK(contains(qs[0], "first person"));
  CHECK(contains(qs[0], "60 years old"));
  CHECK(probing_questions("career", p) == qs);
  CHECK_THROWS_AS(probing_questions("hobbies2", p), UnknownTopic);
  for (const auto& t : ProbingCatalog::defaults().topics()) {
    for (const auto& q : probing_questions(t.id, p)) CHECK_FALSE(has_placeholder_marker(q));
  }
}

TEST_CASE("probing catalog json validation") {
  auto j = ProbingCatalog::defaults().to_json();
  CHECK(ProbingCatalog::from_json(j).to_json() == j);
  j["topics"][0]["prompts"] = nlohmann::json::array({"Tell me about {hobby}"});
  CHECK_THROWS_AS(ProbingCatalog::from_json(j), CatalogError);
}

TEST_CASE("generate_fragments with the stub backend") {
  const auto p = fixtures::ada();
  llm::StubBackend stub;
  const auto fragments = generate_fragments(p, stub);
  REQUIRE(fragments.size() == 7);
  const auto base = render_base_prompt(p);
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    CHECK(fragments[i].order_index == static_cast<int>(i));
    llm::CompletionRequest r;
    r.system_context = base.text;
    r.messages = {{llm::Role::user, fragments[i].probing_prompt}};
    CHECK(fragments[i].generated_text == llm::stub_complete(r).text);
  }
  CHECK(fragments[0].topic_id == "career");
}

TEST_CASE("parallel and sequential generation assemble identically") {
  const auto p = fixtures::ada();
  llm::StubBackend stub;
  GenerationOptions seq;
  seq.max_in_flight = 1;
  GenerationOptions par;
  par.max_in_flight = 7;
  const auto a = assemble_backstory(render_base_prompt(p), generate_fragments(p, stub, seq));
  const auto b = assemble_backstory(render_base_prompt(p), generate_fragments(p, stub, par));
  CHECK(a == b);
}

TEST_CASE("generation is all or nothing and names the failing topic") {
  const auto p = fixtures::ada();
  fixtures::ScriptedBackend backend([](const llm::CompletionRequest& r, int) {
    return contains(r.messages.back().text, "family life");
  });
  GenerationOptions opts;
  opts.retries = 1;
  try {
    generate_fragments(p, backend, opts);
    FAIL("expected BackendError");
  } catch (const memory::BackendError& e) {
    CHECK(e.topic_id() == "family");
  }
  // 6 healthy prompts once, the failing one twice.
  CHECK(backend.calls() == 8);
}

TEST_CASE("assemble_backstory concatenation and ordering") {
  BasePrompt base{"BASE", {}};
  std::vector<MemoryFragment> frags = {{"b", "q", "second", 1}, {"a", "q", "first", 0}};
  const auto m = assemble_backstory(base, frags);
  CHECK(m.assembled_text == "BASE\n\nfirst\n\nsecond");
  CHECK(m.fragments[0].topic_id == "a");
  CHECK(m.warnings.empty());
  CHECK_THROWS_AS(assemble_backstory(base, {}), EmptyFragments);
  CHECK_THROWS_AS(assemble_backstory(base, {{"a", "q", "x", 0}, {"b", "q", "y", 2}}), InvalidFragments);
  CHECK_THROWS_AS(assemble_backstory(base, {{"a", "q", "", 0}}), InvalidFragments);
}

TEST_CASE("assemble_backstory drops whole fragments past the budget") {
  BasePrompt base{"0123456789", {}};
  std::vector<MemoryFragment> frags = {{"a", "q", "aaaa", 0}, {"b", "q", "bbbb", 1}, {"c", "q", "cccc", 2}};
  AssemblyOptions opts;
  opts.context_budget = 10 + 6 + 6;
  const auto m = assemble_backstory(base, frags, opts);
  CHECK(m.assembled_text == "0123456789\n\naaaa\n\nbbbb");
  CHECK(utf8_length(m.assembled_text) <= opts.context_budget);
  REQUIRE(m.warnings.size() == 1);
  CHECK(contains(m.warnings[0], "(c)"));
}

TEST_CASE("future memory json round trip") {
  llm::StubBackend stub;
  const auto p = fixtures::ada();
  const auto m = assemble_backstory(render_base_prompt(p), generate_fragments(p, stub));
  const auto j = memory::to_json(m);
  CHECK(j.at("version") == kPersonaFormatVersion);
  CHECK(future_memory_from_json(j) == m);
}

TEST_CASE("random profiles always render completely") {
  std::mt19937_64 rng(11);
  const std::vector<std::string> alphabet = {"a", "b", "c", " ", "X", "{", "}", "_", "-", "é", "世", ",", ".", "\""};
  auto random_text = [&] {
    std::uniform_int_distribution<std::size_t> len(1, 30), pick(0, alphabet.size() - 1);
    std::string s = "x";
    for (auto n = len(rng); n > 0; --n) s += alphabet[pick(rng)];
    return s;
  };
  for (int i = 0; i < 200; ++i) {
    auto answers = fixtures::ada_answers();
    for (auto& [k, v] : answers) {
      if (k != "age") v = random_text();
    }
    const auto base = render_base_prompt(validate_profile(answers));
    CHECK(base.text.rfind(kBasePromptPrefix, 0) == 0);
    for (const auto& [k, v] : base.placeholder_bindings) CHECK(contains(base.text, v));
  }
}
