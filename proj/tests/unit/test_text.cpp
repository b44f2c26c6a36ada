#include <chrono>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "doctest.h"
#include "futureyou/csv.hpp"
#include "futureyou/strings.hpp"
#include "futureyou/text_template.hpp"
#include "futureyou/time_util.hpp"

using namespace futureyou;

TEST_CASE("placeholders are listed once in order of first appearance") {
  CHECK(template_placeholders("{b} and {a} then {b} {not-valid} {} {Upper}") == std::vector<std::string>{"b", "a"});
  CHECK(template_placeholders("no markers").empty());
  CHECK(template_placeholders("{x_1}{y2}") == std::vector<std::string>{"x_1", "y2"});
}

TEST_CASE("render substitutes every placeholder") {
  CHECK(render_template("Hi {name}, {name}!", {{"name", "Ana"}}) == "Hi Ana, Ana!");
  CHECK(render_template("{a}{b}", {{"a", "1"}, {"b", "2"}}) == "12");
  CHECK(render_template("", {}) == "");
}

TEST_CASE("render copies non-placeholder braces verbatim") {
  CHECK(render_template("{ spaced } {A} {a-b} {", {}) == "{ spaced } {A} {a-b} {");
  CHECK(render_template("}{x}{", {{"x", "v"}}) == "}v{");
}

TEST_CASE("bound values are never rescanned") {
  CHECK(render_template("{a}", {{"a", "{b}"}, {"b", "no"}}) == "{b}");
  CHECK(render_template("{a} {b}", {{"a", "{b}"}, {"b", "x"}}) == "{b} x");
}

TEST_CASE("missing binding names the placeholder") {
  try {
    render_template("Hello {who}", {{"other", "x"}});
    FAIL("expected UnboundPlaceholder");
  } catch (const UnboundPlaceholder& e) {
    CHECK(e.name() == "who");
  }
}

TEST_CASE("extra bindings are ignored") { CHECK(render_template("{a}", {{"a", "1"}, {"z", "2"}}) == "1"); }

TEST_CASE("placeholder marker detection") {
  CHECK(has_placeholder_marker("left {over}"));
  CHECK_FALSE(has_placeholder_marker("left { over }"));
  CHECK_FALSE(has_placeholder_marker("{Caps} {}"));
}

TEST_CASE("trim and utf8 helpers") {
  CHECK(trim("  a b \t\n") == "a b");
  CHECK(trim("   ").empty());
  const std::string s = "héllo→世界";
  CHECK(utf8_length(s) == 8);
  CHECK(utf8_prefix(s, 2) == "hé");
  CHECK(utf8_prefix(s, 6) == "héllo→");
  CHECK(utf8_prefix(s, 100) == s);
  CHECK(utf8_prefix(s, 0).empty());
}

TEST_CASE("hash helpers are stable") {
  // FNV-1a 64 reference vectors.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  // SplitMix64 first outputs for state 0 (the finalizer applied to 0 and
  // to the first increment).
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(hex64(255) == "00000000000000ff");
}

TEST_CASE("csv escape and parse round trip") {
  const csv::Row row = {"plain", "with,comma", "with \"quote\"", "multi\nline", "", "trail "};
  const auto text = csv::format_row(row);
  CHECK(text == "plain,\"with,comma\",\"with \"\"quote\"\"\",\"multi\nline\",,trail \n");
  const auto parsed = csv::parse(text);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0] == row);
}

TEST_CASE("csv parse accepts CRLF and skips blank lines") {
  const auto rows = csv::parse("a,b\r\n1,2\r\n\r\n3,4");
  REQUIRE(rows.size() == 3);
  CHECK(rows[2] == csv::Row{"3", "4"});
}

TEST_CASE("csv parse rejects malformed quoting") {
  CHECK_THROWS_AS(csv::parse("a,\"open\n"), csv::ParseError);
  CHECK_THROWS_AS(csv::parse("ab\"c\n"), csv::ParseError);
}

TEST_CASE("csv table lookup by header") {
  csv::Table t(csv::parse("x,y\n1,2\n3,4\n"));
  CHECK(t.size() == 2);
  CHECK(t.column("y") == 1);
  CHECK(t.column("z") == -1);
  CHECK(t.cell(1, "x") == "3");
}

TEST_CASE("rfc3339 formatting and parsing") {
  const auto t = parse_rfc3339("2024-03-04T09:05:07.123Z");
  CHECK(to_rfc3339(t) == "2024-03-04T09:05:07.123Z");
  CHECK(t.time_since_epoch().count() == 1709543107123LL);
  CHECK(to_rfc3339(TimePoint{}) == "1970-01-01T00:00:00.000Z");
  CHECK_THROWS_AS(parse_rfc3339("2024-03-04 09:05:07Z"), TimeFormatError);
  CHECK_THROWS_AS(parse_rfc3339("2024-13-04T09:05:07.000Z"), TimeFormatError);
  CHECK_THROWS_AS(parse_rfc3339(""), TimeFormatError);
}

TEST_CASE("rfc3339 round trips random instants") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long long> ms(0, 4102444800000LL);
  for (int i = 0; i < 2000; ++i) {
    const TimePoint t{std::chrono::milliseconds(ms(rng))};
    CHECK(parse_rfc3339(to_rfc3339(t)) == t);
  }
}

TEST_CASE("fixed step clock advances per call, also across threads") {
  auto clock = fixed_step_clock(parse_rfc3339("2024-01-01T00:00:00.000Z"), std::chrono::seconds(2));
  CHECK(to_rfc3339(clock()) == "2024-01-01T00:00:00.000Z");
  CHECK(to_rfc3339(clock()) == "2024-01-01T00:00:02.000Z");

  std::vector<std::thread> threads;
  std::vector<std::vector<TimePoint>> seen(4);
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 250; ++i) seen[t].push_back(clock());
    });
  }
  for (auto& th : threads) th.join();
  std::set<TimePoint> all;
  for (const auto& v : seen) all.insert(v.begin(), v.end());
  CHECK(all.size() == 1000);
}
