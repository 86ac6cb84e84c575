#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "litesearch/bench.hpp"
#include "litesearch/http_backend.hpp"
#include "litesearch/synthetic.hpp"

namespace litesearch {

/**
 * Application configuration: the search knobs plus backend wiring.
 * Environment variables LITESEARCH_POLICY_URL, LITESEARCH_VALUE_URL and
 * LITESEARCH_API_KEY override endpoint URLs and the API key only.
 */
struct AppConfig {
  SearchConfig search;
  enum class BackendKind { synthetic, http } backend_kind = BackendKind::synthetic;
  HttpBackendConfig http;
  std::string demonstrations_path;
  int shots = 8;
  std::string value_instruction =
      "Assess the partial solution and estimate the probability that it "
      "reaches the correct final answer.";
  uint64_t seed = 0;
};

AppConfig load_config(const std::string& path);
AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const AppConfig& config);

/// Applies the environment overrides documented above.
void apply_env_overrides(AppConfig& config);

/// Materializes the backend set. Synthetic configs need the suite the
/// questions came from; HTTP configs need a demonstrations file.
bench::BackendSet make_backends(const AppConfig& config,
                                std::shared_ptr<synthetic::SyntheticSuite> suite);

}  // namespace litesearch
