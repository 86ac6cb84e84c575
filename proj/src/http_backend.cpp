#include "litesearch/http_backend.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "litesearch/answer.hpp"

namespace litesearch {

namespace {

struct SplitUrl {
  std::string base;        // scheme://host:port
  std::string path_prefix; // anything after, without trailing slash
};

SplitUrl split_url(const std::string& url) {
  size_t scheme = url.find("://");
  size_t path = scheme == std::string::npos ? url.find('/')
                                            : url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path), prefix};
}

/// POSTs JSON with bounded retries and exponential backoff. Connection
/// failures and 5xx responses retry; other statuses fail immediately.
nlohmann::json post_json(const HttpBackendConfig& config, const std::string& url,
                         const std::string& endpoint, const nlohmann::json& body) {
  SplitUrl split = split_url(url);
  std::string payload = body.dump();
  int backoff_ms = config.retry.initial_backoff_ms;
  std::string last_error;
  for (int attempt = 0; attempt <= config.retry.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms = static_cast<int>(backoff_ms * config.retry.multiplier);
    }
    // A fresh client per request keeps the backend safe for concurrent
    // runs; connection reuse is not worth a lock here.
    httplib::Client client(split.base);
    client.set_connection_timeout(config.timeout_s);
    client.set_read_timeout(config.timeout_s);
    httplib::Headers headers;
    if (!config.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config.api_key);
    }
    auto res = client.Post(split.path_prefix + endpoint, headers, payload,
                           "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from " +
                               url + endpoint + ": " + res->body,
                           /*retryable=*/false);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed JSON response: ") + e.what(),
                           /*retryable=*/false);
    }
  }
  throw TransportError("retries exhausted for " + url + endpoint + " (" +
                       last_error + ")");
}

}  // namespace

PolicyResponse HttpPolicyBackend::generate(const PolicyRequest& request) {
  std::string prompt = assemble_prompt(request.demonstrations, request.state);
  nlohmann::json body;
  std::string endpoint;
  if (config_.api_style == HttpBackendConfig::ApiStyle::openai_chat) {
    endpoint = "/v1/chat/completions";
    body = {
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    if (request.stop_at_step_boundary) {
      body["stop"] = nlohmann::json::array({config_.step_delimiter});
    }
  } else {
    endpoint = "/v1/generate";
    body = {
        {"prompt", prompt},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
        {"stop", request.stop_at_step_boundary
                     ? nlohmann::json::array({config_.step_delimiter})
                     : nlohmann::json::array()},
    };
  }
  body["seed"] = request.sample_seed;

  nlohmann::json response = post_json(config_, config_.policy_url, endpoint, body);
  PolicyResponse out;
  if (config_.api_style == HttpBackendConfig::ApiStyle::openai_chat) {
    try {
      const auto& choice = response.at("choices").at(0);
      out.text = choice.at("message").at("content").get<std::string>();
      out.ended_solution = choice.value("finish_reason", "") == "stop" &&
                           has_answer_marker(out.text);
      if (response.contains("usage")) {
        out.token_count = response["usage"].value("completion_tokens", 0);
      }
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("unexpected chat-completion shape: ") + e.what(),
                           /*retryable=*/false);
    }
  } else {
    try {
      out.text = response.at("text").get<std::string>();
      out.token_count = response.value("token_count", 0);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("unexpected generate response shape: ") +
                               e.what(),
                           /*retryable=*/false);
    }
    out.ended_solution = has_answer_marker(out.text);
  }
  if (out.token_count <= 0) {
    out.token_count = whitespace_token_count(out.text);
  }
  return out;
}

double HttpValueBackend::score(const ValueRequest& request) {
  nlohmann::json steps = nlohmann::json::array();
  for (const Step& s : request.state.steps) steps.push_back(s.text);
  nlohmann::json body{
      {"instruction", std::string(request.instruction)},
      {"question", request.state.question.text},
      {"steps", std::move(steps)},
  };
  nlohmann::json response = post_json(config_, config_.value_url, "/v1/score", body);
  double value = 0.0;
  try {
    value = response.at("value").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unexpected score response shape: ") + e.what(),
                         /*retryable=*/false);
  }
  if (value < 0.0 || value > 1.0) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      std::fprintf(stderr,
                   "[litesearch] warning: value backend returned %g, clamping to [0,1]\n",
                   value);
    }
    value = value < 0.0 ? 0.0 : 1.0;
  }
  return value;
}

}  // namespace litesearch
