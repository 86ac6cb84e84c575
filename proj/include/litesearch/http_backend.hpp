#pragma once

#include <string>

#include "litesearch/backends.hpp"

namespace litesearch {

struct RetryPolicy {
  int max_retries = 3;
  int initial_backoff_ms = 200;
  double multiplier = 2.0;
};

/**
 * Remote policy/value configuration.
 *
 * `api_style` adapts the generate call to OpenAI-style chat completions as
 * pure configuration; the native wire protocol is
 *   POST /v1/generate {prompt, temperature, max_tokens, stop:[delim]}
 *     -> {text, token_count}
 *   POST /v1/score {instruction, question, steps:[...]} -> {value}
 */
struct HttpBackendConfig {
  std::string policy_url;  // base URL, e.g. http://localhost:8080
  std::string value_url;
  enum class ApiStyle { native, openai_chat } api_style = ApiStyle::native;
  std::string model;    // forwarded for openai_chat
  std::string api_key;  // sent as a bearer token when non-empty
  std::string step_delimiter = "\n";
  int timeout_s = 60;
  RetryPolicy retry;
};

class HttpPolicyBackend : public PolicyBackend {
public:
  explicit HttpPolicyBackend(HttpBackendConfig config) : config_(std::move(config)) {}
  PolicyResponse generate(const PolicyRequest& request) override;

private:
  HttpBackendConfig config_;
};

class HttpValueBackend : public ValueBackend {
public:
  explicit HttpValueBackend(HttpBackendConfig config) : config_(std::move(config)) {}
  double score(const ValueRequest& request) override;

private:
  HttpBackendConfig config_;
};

}  // namespace litesearch
