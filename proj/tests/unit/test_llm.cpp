#include <atomic>
#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#include "doctest.h"
#include "futureyou/llm_gateway.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace futureyou::llm;
using namespace std::chrono_literals;

namespace {

// Local chat-completions endpoint whose behaviour each test scripts.
class FakeProvider {
 public:
  FakeProvider() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      handler_(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeProvider() {
    server_.stop();
    thread_.join();
  }

  BackendConfig config(int retries = 0) const {
    BackendConfig c;
    c.provider = "openai";
    c.endpoint_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    c.model_name = "test-model";
    c.timeout = 2000ms;
    c.retries = retries;
    c.backoff_base = 10ms;
    return c;
  }

  std::function<void(const httplib::Request&, httplib::Response&)> handler_;
  std::atomic<int> hits_{0};
  std::string last_auth_;
  std::string last_body_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string completion(const std::string& text, const std::string& reason = "stop") {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}, {"finish_reason", reason}}}}}
      .dump();
}

int closed_port() {
  httplib::Server s;
  return s.bind_to_any_port("127.0.0.1");  // released when `s` goes away
}

CompletionRequest hello() {
  CompletionRequest r;
  r.system_context = "You are a helpful persona speaking as yourself at sixty.";
  r.messages = {{Role::user, "hello"}};
  return r;
}

}  // namespace

TEST_CASE("stub echoes the last user message and a context prefix") {
  const auto r = stub_complete(hello());
  CHECK(r.text.find("hello") != std::string::npos);
  CHECK(r.text.find("You are a helpful persona speaking as yo") != std::string::npos);
  CHECK(r.text.find("You are a helpful persona speaking as you") == std::string::npos);
  CHECK(r.finish_reason == FinishReason::stop);
  CHECK(stub_complete(hello()).text == r.text);
}

TEST_CASE("stub with no messages derives from the context only") {
  CompletionRequest r;
  r.system_context = "context only";
  const auto out = stub_complete(r);
  CHECK(out.text.find("context only") != std::string::npos);
  CHECK_FALSE(out.text.empty());
}

TEST_CASE("stub is referentially transparent on random requests") {
  std::mt19937 rng(5);
  for (int i = 0; i < 300; ++i) {
    CompletionRequest r;
    r.system_context = std::string(rng() % 80, 'a' + static_cast<char>(rng() % 26));
    const int n = static_cast<int>(rng() % 5);
    for (int k = 0; k < n; ++k) {
      r.messages.push_back({k % 2 == 0 ? Role::user : Role::assistant, std::to_string(rng())});
    }
    const auto a = stub_complete(r);
    const auto b = stub_complete(r);
    CHECK(a.text == b.text);
    CHECK_FALSE(a.text.empty());
  }
}

TEST_CASE("complete routes stub configs to the stub") {
  BackendConfig c;
  CHECK(complete(c, hello()).text == stub_complete(hello()).text);
}

TEST_CASE("request and config validation") {
  auto r = hello();
  r.messages.push_back({Role::user, "again"});
  CHECK_THROWS_AS(r.validate(), InvalidRequest);
  r = hello();
  r.temperature = 2.5;
  CHECK_THROWS_AS(r.validate(), InvalidRequest);
  r = hello();
  r.max_output_tokens = 0;
  CHECK_THROWS_AS(r.validate(), InvalidRequest);

  BackendConfig c;
  c.timeout = 0ms;
  CHECK_THROWS_AS(c.validate(), InvalidRequest);
  c = {};
  c.retries = -1;
  CHECK_THROWS_AS(c.validate(), InvalidRequest);
  c = {};
  c.provider = "openai";
  CHECK_THROWS_AS(c.validate(), InvalidRequest);
  c.provider = "mystery";
  c.endpoint_url = "http://x";
  CHECK_THROWS_AS(c.validate(), InvalidRequest);
}

TEST_CASE("http backend sends the chat-completions shape") {
  FakeProvider fake;
  fake.handler_ = [](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion("hi from sixty"), "application/json");
  };
  ::setenv("FUTUREYOU_TEST_KEY", "sk-test", 1);
  auto config = fake.config();
  config.api_key_env = "FUTUREYOU_TEST_KEY";
  const auto out = complete(config, hello());
  CHECK(out.text == "hi from sixty");
  CHECK(out.finish_reason == FinishReason::stop);
  CHECK(fake.last_auth_ == "Bearer sk-test");
  const auto body = nlohmann::json::parse(fake.last_body_);
  CHECK(body["model"] == "test-model");
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][1] == nlohmann::json{{"role", "user"}, {"content", "hello"}});
  CHECK(body["max_tokens"] == 512);
  ::unsetenv("FUTUREYOU_TEST_KEY");
}

TEST_CASE("missing api key variable is an auth failure before any request") {
  FakeProvider fake;
  auto config = fake.config();
  config.api_key_env = "FUTUREYOU_UNSET_KEY_VARIABLE";
  ::unsetenv("FUTUREYOU_UNSET_KEY_VARIABLE");
  CHECK_THROWS_AS(complete(config, hello()), AuthFailure);
  CHECK(fake.hits_ == 0);
}

TEST_CASE("length finish reason is reported") {
  FakeProvider fake;
  fake.handler_ = [](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion("cut", "length"), "application/json");
  };
  CHECK(complete(fake.config(), hello()).finish_reason == FinishReason::length);
}

TEST_CASE("response missing text is malformed, without retries") {
  FakeProvider fake;
  fake.handler_ = [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[{"message":{"role":"assistant"}}]})", "application/json");
  };
  try {
    complete(fake.config(2), hello());
    FAIL("expected MalformedResponse");
  } catch (const MalformedResponse& e) {
    CHECK(e.attempts() == 1);
  }
  CHECK(fake.hits_ == 1);

  fake.handler_ = [](const httplib::Request&, httplib::Response& res) { res.set_content("<html>", "text/html"); };
  CHECK_THROWS_AS(complete(fake.config(), hello()), MalformedResponse);
}

TEST_CASE("401 is an auth failure") {
  FakeProvider fake;
  fake.handler_ = [](const httplib::Request&, httplib::Response& res) { res.status = 401; };
  CHECK_THROWS_AS(complete(fake.config(3), hello()), AuthFailure);
  CHECK(fake.hits_ == 1);
}

TEST_CASE("5xx is retried, then reported with its status") {
  FakeProvider fake;
  fake.handler_ = [](const httplib::Request&, httplib::Response& res) { res.status = 503; };
  try {
    complete(fake.config(1), hello());
    FAIL("expected HttpStatusError");
  } catch (const HttpStatusError& e) {
    CHECK(e.status() == 503);
    CHECK(e.attempts() == 2);
  }
  CHECK(fake.hits_ == 2);
}

TEST_CASE("a transient failure followed by success succeeds") {
  FakeProvider fake;
  fake.handler_ = [&fake](const httplib::Request&, httplib::Response& res) {
    if (fake.hits_ == 1) {
      res.status = 500;
    } else {
      res.set_content(completion("second time"), "application/json");
    }
  };
  CHECK(complete(fake.config(1), hello()).text == "second time");
  CHECK(fake.hits_ == 2);
}

TEST_CASE("unreachable endpoint with retries=1 times out after 2 attempts") {
  BackendConfig c;
  c.provider = "openai";
  c.endpoint_url = "http://127.0.0.1:" + std::to_string(closed_port()) + "/v1/chat/completions";
  c.timeout = 500ms;
  c.retries = 1;
  c.backoff_base = 10ms;
  try {
    complete(c, hello());
    FAIL("expected Timeout");
  } catch (const Timeout& e) {
    CHECK(e.attempts() == 2);
  }
}

TEST_CASE("slow provider is bounded by the timeout") {
  FakeProvider fake;
  fake.handler_ = [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(1500ms);
    res.set_content(completion("late"), "application/json");
  };
  auto c = fake.config(1);
  c.timeout = 300ms;
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(complete(c, hello()), Timeout);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  // timeout x attempts + backoff, with slack for scheduling.
  CHECK(elapsed < 300ms * 2 + 10ms + 400ms);
}
