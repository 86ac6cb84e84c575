#include "litesearch/config.hpp"

#include <cstdlib>
#include <fstream>

#include "litesearch/hash.hpp"

namespace litesearch {

namespace {

ExpansionStrategy parse_expansion(const std::string& name) {
  if (name == "incremental") return ExpansionStrategy::incremental;
  if (name == "batch") return ExpansionStrategy::batch;
  throw ParseError("unknown expansion strategy: " + name);
}

ProgressMode parse_progress_mode(const std::string& name) {
  if (name == "none") return ProgressMode::none;
  if (name == "step_number") return ProgressMode::step_number;
  if (name == "token_number") return ProgressMode::token_number;
  throw ParseError("unknown progress mode: " + name);
}

std::string expansion_name(ExpansionStrategy s) {
  return s == ExpansionStrategy::incremental ? "incremental" : "batch";
}

std::string progress_mode_name(ProgressMode m) {
  switch (m) {
    case ProgressMode::none: return "none";
    case ProgressMode::step_number: return "step_number";
    case ProgressMode::token_number: return "token_number";
  }
  return "none";
}

}  // namespace

AppConfig config_from_json(const nlohmann::json& j) {
  AppConfig config;
  if (j.contains("search")) {
    const auto& s = j.at("search");
    SearchConfig& sc = config.search;
    sc.max_iterations = s.value("max_iterations", sc.max_iterations);
    sc.budget_cap = s.value("budget_cap", sc.budget_cap);
    sc.progress_weight = s.value("progress_weight", sc.progress_weight);
    sc.answer_threshold = s.value("answer_threshold", sc.answer_threshold);
    sc.target_accuracy = s.value("target_accuracy", sc.target_accuracy);
    if (s.contains("expansion")) {
      sc.expansion = parse_expansion(s.at("expansion").get<std::string>());
    }
    if (s.contains("progress_mode")) {
      sc.progress_mode = parse_progress_mode(s.at("progress_mode").get<std::string>());
    }
    if (s.contains("ablations")) {
      const auto& a = s.at("ablations");
      sc.ablations.static_budget = a.value("static_budget", false);
      sc.ablations.no_depth_penalty = a.value("no_depth_penalty", false);
      sc.ablations.no_greedy_calibration = a.value("no_greedy_calibration", false);
    }
    sc.value_floor = s.value("value_floor", sc.value_floor);
    sc.value_ceiling = s.value("value_ceiling", sc.value_ceiling);
    sc.max_depth = s.value("max_depth", sc.max_depth);
    sc.temperature = s.value("temperature", sc.temperature);
    sc.max_step_tokens = s.value("max_step_tokens", sc.max_step_tokens);
    if (sc.value_floor >= sc.value_ceiling) {
      throw ParseError("value_floor must be below value_ceiling");
    }
    if (sc.answer_threshold <= 0.0 || sc.answer_threshold >= 1.0 ||
        sc.target_accuracy <= 0.0 || sc.target_accuracy >= 1.0) {
      throw ParseError("answer_threshold and target_accuracy must lie in (0, 1)");
    }
  }
  if (j.contains("backends")) {
    const auto& b = j.at("backends");
    std::string kind = b.value("kind", "synthetic");
    if (kind == "synthetic") {
      config.backend_kind = AppConfig::BackendKind::synthetic;
    } else if (kind == "http") {
      config.backend_kind = AppConfig::BackendKind::http;
    } else {
      throw ParseError("unknown backend kind: " + kind);
    }
    config.http.policy_url = b.value("policy_url", "");
    config.http.value_url = b.value("value_url", "");
    std::string style = b.value("api_style", "native");
    if (style == "native") {
      config.http.api_style = HttpBackendConfig::ApiStyle::native;
    } else if (style == "openai_chat") {
      config.http.api_style = HttpBackendConfig::ApiStyle::openai_chat;
    } else {
      throw ParseError("unknown api_style: " + style);
    }
    config.http.model = b.value("model", "");
    config.http.timeout_s = b.value("timeout_s", config.http.timeout_s);
    if (b.contains("retry")) {
      const auto& r = b.at("retry");
      config.http.retry.max_retries = r.value("max_retries", 3);
      config.http.retry.initial_backoff_ms = r.value("initial_backoff_ms", 200);
      config.http.retry.multiplier = r.value("multiplier", 2.0);
    }
    config.demonstrations_path = b.value("demonstrations", "");
    config.shots = b.value("shots", config.shots);
    config.value_instruction = b.value("value_instruction", config.value_instruction);
  }
  config.seed = j.value("seed", config.seed);
  return config;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config ") + path + ": " + e.what());
  }
  AppConfig config = config_from_json(j);
  apply_env_overrides(config);
  return config;
}

nlohmann::json config_to_json(const AppConfig& config) {
  const SearchConfig& sc = config.search;
  nlohmann::json search{
      {"max_iterations", sc.max_iterations},
      {"budget_cap", sc.budget_cap},
      {"progress_weight", sc.progress_weight},
      {"answer_threshold", sc.answer_threshold},
      {"target_accuracy", sc.target_accuracy},
      {"expansion", expansion_name(sc.expansion)},
      {"progress_mode", progress_mode_name(sc.progress_mode)},
      {"ablations",
       {{"static_budget", sc.ablations.static_budget},
        {"no_depth_penalty", sc.ablations.no_depth_penalty},
        {"no_greedy_calibration", sc.ablations.no_greedy_calibration}}},
      {"value_floor", sc.value_floor},
      {"value_ceiling", sc.value_ceiling},
      {"max_depth", sc.max_depth},
      {"temperature", sc.temperature},
      {"max_step_tokens", sc.max_step_tokens},
  };
  nlohmann::json backends{
      {"kind", config.backend_kind == AppConfig::BackendKind::http ? "http" : "synthetic"},
      {"policy_url", config.http.policy_url},
      {"value_url", config.http.value_url},
      {"api_style", config.http.api_style == HttpBackendConfig::ApiStyle::openai_chat
                        ? "openai_chat"
                        : "native"},
      {"model", config.http.model},
      {"timeout_s", config.http.timeout_s},
      {"demonstrations", config.demonstrations_path},
      {"shots", config.shots},
      {"value_instruction", config.value_instruction},
  };
  return nlohmann::json{{"search", std::move(search)},
                        {"backends", std::move(backends)},
                        {"seed", config.seed}};
}

void apply_env_overrides(AppConfig& config) {
  if (const char* v = std::getenv("LITESEARCH_POLICY_URL")) config.http.policy_url = v;
  if (const char* v = std::getenv("LITESEARCH_VALUE_URL")) config.http.value_url = v;
  if (const char* v = std::getenv("LITESEARCH_API_KEY")) config.http.api_key = v;
}

bench::BackendSet make_backends(const AppConfig& config,
                                std::shared_ptr<synthetic::SyntheticSuite> suite) {
  bench::BackendSet set;
  set.value_instruction = config.value_instruction;
  if (config.backend_kind == AppConfig::BackendKind::synthetic) {
    if (!suite) {
      throw InvalidInputError("synthetic backends need a synthetic suite (--synthetic)");
    }
    set.policy = std::make_shared<synthetic::SyntheticPolicy>(suite);
    set.value = std::make_shared<synthetic::SyntheticValue>(
        suite, suite->sigma(), mix(suite->seed(), kStreamValueNoise));
    return set;
  }
  if (config.http.policy_url.empty()) {
    throw InvalidInputError("http backend needs policy_url (config or env)");
  }
  set.policy = std::make_shared<HttpPolicyBackend>(config.http);
  if (!config.http.value_url.empty()) {
    set.value = std::make_shared<HttpValueBackend>(config.http);
  }
  if (config.demonstrations_path.empty()) {
    throw InvalidInputError("http backend needs a demonstrations file");
  }
  set.demonstrations = load_demonstrations(config.demonstrations_path);
  if (set.demonstrations.empty()) {
    throw InvalidInputError("demonstrations file is empty");
  }
  if (static_cast<int>(set.demonstrations.size()) > config.shots) {
    set.demonstrations.resize(static_cast<size_t>(config.shots));
  }
  return set;
}

}  // namespace litesearch
