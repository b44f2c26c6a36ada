#include "futureyou/service/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace futureyou::service {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"server", {"host", "port", "data_dir", "fsync", "web_root"}},
      {"backend", {"provider", "endpoint_url", "model_name", "api_key_env", "timeout_ms", "retries", "backoff_ms"}},
      {"aging", {"provider", "endpoint_url", "timeout_ms"}},
      {"experiment",
       {"seed", "weight_future_you", "weight_control", "weight_chat", "weight_questionnaire", "alpha", "normality",
        "levene_center", "allow_condition_override"}},
      {"chat", {"finish_threshold", "counting", "window_messages", "request_budget", "temperature",
                "max_output_tokens"}},
      {"memory", {"max_in_flight", "retries", "context_budget", "temperature", "max_output_tokens"}},
      {"content", {"question_schema", "probing_topics", "instruments"}},
  };
  return keys;
}

template <typename T>
T get(const pt::ptree& tree, const std::string& path, T fallback) {
  auto v = tree.get_optional<std::string>(path);
  if (!v || v->empty()) return fallback;
  try {
    return tree.get<T>(path);
  } catch (const pt::ptree_error&) {
    throw ConfigError("invalid value '" + *v + "' for " + path);
  }
}

bool get_bool(const pt::ptree& tree, const std::string& path, bool fallback) {
  const auto v = get<std::string>(tree, path, "");
  if (v.empty()) return fallback;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean '" + v + "' for " + path);
}

}  // namespace

ServiceConfig parse_config(std::string_view ini_text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(ini_text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }

  for (const auto& [section, body] : tree) {
    if (section == "backend" && body.count("api_key")) {
      throw ConfigError("backend.api_key is not accepted; name an environment variable with api_key_env");
    }
    auto it = allowed_keys().find(section);
    if (it == allowed_keys().end()) throw ConfigError("unknown config section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("unexpected value for section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown config key " + section + "." + key);
    }
  }

  ServiceConfig c;
  auto& s = c.server;
  s.host = get<std::string>(tree, "server.host", s.host);
  s.port = get<int>(tree, "server.port", s.port);
  s.data_dir = get<std::string>(tree, "server.data_dir", s.data_dir.string());
  s.fsync = get_bool(tree, "server.fsync", s.fsync);
  s.web_root = get<std::string>(tree, "server.web_root", "");
  if (s.port < 0 || s.port > 65535) throw ConfigError("server.port must be within 0..65535");

  auto& b = c.backend;
  b.provider = get<std::string>(tree, "backend.provider", b.provider);
  b.endpoint_url = get<std::string>(tree, "backend.endpoint_url", b.endpoint_url);
  b.model_name = get<std::string>(tree, "backend.model_name", b.model_name);
  b.api_key_env = get<std::string>(tree, "backend.api_key_env", b.api_key_env);
  b.timeout = std::chrono::milliseconds(get<long long>(tree, "backend.timeout_ms", b.timeout.count()));
  b.retries = get<int>(tree, "backend.retries", b.retries);
  b.backoff_base = std::chrono::milliseconds(get<long long>(tree, "backend.backoff_ms", b.backoff_base.count()));
  try {
    b.validate();
  } catch (const llm::InvalidRequest& e) {
    throw ConfigError(e.what());
  }

  auto& o = c.options;
  o.aging.provider = get<std::string>(tree, "aging.provider", o.aging.provider);
  o.aging.endpoint_url = get<std::string>(tree, "aging.endpoint_url", o.aging.endpoint_url);
  o.aging.timeout = std::chrono::milliseconds(get<long long>(tree, "aging.timeout_ms", o.aging.timeout.count()));
  if (o.aging.provider != "stub" && o.aging.provider != "external") {
    throw ConfigError("aging.provider must be stub or external");
  }
  if (o.aging.provider == "external" && o.aging.endpoint_url.empty()) {
    throw ConfigError("aging.endpoint_url is required for the external provider");
  }

  o.seed = get<std::uint64_t>(tree, "experiment.seed", o.seed);
  for (auto cond : harness::kReportConditions) {
    const std::string key = "experiment.weight_" + std::string(harness::to_string(cond));
    o.weights[cond] = get<double>(tree, key, o.weights[cond]);
    if (!(o.weights[cond] >= 0.0)) throw ConfigError(key + " must be non-negative");
  }
  double total = 0.0;
  for (const auto& [cond, w] : o.weights) total += w;
  if (!(total > 0.0)) throw ConfigError("condition weights must sum to a positive value");

  c.allow_condition_override = get_bool(tree, "experiment.allow_condition_override", false);
  o.analysis.alpha = get<double>(tree, "experiment.alpha", o.analysis.alpha);
  if (!(o.analysis.alpha > 0.0 && o.analysis.alpha < 1.0)) throw ConfigError("experiment.alpha must be within (0, 1)");
  const auto normality = get<std::string>(tree, "experiment.normality", "pooled_residuals");
  if (normality == "pooled_residuals") {
    o.analysis.normality = stats::NormalityMode::pooled_residuals;
  } else if (normality == "per_group") {
    o.analysis.normality = stats::NormalityMode::per_group;
  } else {
    throw ConfigError("experiment.normality must be pooled_residuals or per_group");
  }
  const auto center = get<std::string>(tree, "experiment.levene_center", "mean");
  if (center == "mean") {
    o.analysis.levene_center = stats::LeveneCenter::mean;
  } else if (center == "median") {
    o.analysis.levene_center = stats::LeveneCenter::median;
  } else {
    throw ConfigError("experiment.levene_center must be mean or median");
  }

  o.chat.finish_threshold = get<int>(tree, "chat.finish_threshold", o.chat.finish_threshold);
  if (o.chat.finish_threshold < 0) throw ConfigError("chat.finish_threshold must be non-negative");
  const auto counting = get<std::string>(tree, "chat.counting", "messages");
  if (counting == "messages") {
    o.chat.counting = chat::ExchangeCounting::messages;
  } else if (counting == "pairs") {
    o.chat.counting = chat::ExchangeCounting::pairs;
  } else {
    throw ConfigError("chat.counting must be messages or pairs");
  }
  o.chat.window_messages = get<std::size_t>(tree, "chat.window_messages", o.chat.window_messages);
  o.chat.request_budget = get<std::size_t>(tree, "chat.request_budget", o.chat.request_budget);
  o.chat.temperature = get<double>(tree, "chat.temperature", o.chat.temperature);
  o.chat.max_output_tokens = get<int>(tree, "chat.max_output_tokens", o.chat.max_output_tokens);

  o.generation.max_in_flight = get<int>(tree, "memory.max_in_flight", o.generation.max_in_flight);
  o.generation.retries = get<int>(tree, "memory.retries", o.generation.retries);
  o.generation.temperature = get<double>(tree, "memory.temperature", o.generation.temperature);
  o.generation.max_output_tokens = get<int>(tree, "memory.max_output_tokens", o.generation.max_output_tokens);
  o.assembly.context_budget = get<std::size_t>(tree, "memory.context_budget", o.assembly.context_budget);
  if (o.generation.max_in_flight < 1) throw ConfigError("memory.max_in_flight must be at least 1");
  if (o.generation.retries < 0) throw ConfigError("memory.retries must be non-negative");

  c.content.question_schema = get<std::string>(tree, "content.question_schema", "");
  c.content.probing_topics = get<std::string>(tree, "content.probing_topics", "");
  c.content.instruments = get<std::string>(tree, "content.instruments", "");
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto config = parse_config(ss.str());
  // Relative paths in the file resolve against its directory.
  const auto base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(config.server.data_dir);
  resolve(config.server.web_root);
  resolve(config.content.question_schema);
  resolve(config.content.probing_topics);
  resolve(config.content.instruments);
  return config;
}

}  // namespace futureyou::service
