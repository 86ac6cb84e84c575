#include "litesearch/backends.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

namespace litesearch {

namespace {

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Step generate_step(PolicyBackend& policy, const Trajectory& state,
                   const GenParams& params, uint64_t sample_seed,
                   TokenLedger& ledger) {
  if (state.is_terminal()) {
    throw InvalidInputError("cannot continue a terminal state");
  }
  PolicyRequest request{
      .demonstrations = params.demonstrations,
      .state = state,
      .temperature = params.temperature,
      .stop_at_step_boundary = true,
      .max_tokens = params.max_step_tokens,
      .sample_seed = sample_seed,
  };
  PolicyResponse response = policy.generate(request);
  std::string text = response.text;
  if (size_t cut = text.find('\n'); cut != std::string::npos) {
    text.resize(cut);
  }
  if (trim_view(text).empty()) {
    throw DegenerateOutputError("policy returned an empty step");
  }
  ledger.add(response.token_count);
  Step step;
  step.text = std::string(trim_view(text));
  step.token_count = response.token_count;
  step.is_terminal = response.ended_solution || has_answer_marker(step.text);
  return step;
}

Trajectory sample_trajectory(PolicyBackend& policy, const Question& question,
                             const GenParams& params, uint64_t sample_seed,
                             TokenLedger& ledger) {
  Trajectory t;
  t.question = question;
  while (t.depth() < params.max_depth) {
    Step step = generate_step(policy, t, params, sample_seed, ledger);
    t.steps.push_back(std::move(step));
    if (t.steps.back().is_terminal) break;
  }
  if (!t.steps.empty() && !t.steps.back().is_terminal) {
    t.steps.back().is_terminal = true;  // depth guard, answer-less
  }
  t.extracted_answer = extract_answer(t);
  return t;
}

Trajectory greedy_decode(PolicyBackend& policy, const Question& question,
                         const GenParams& params, TokenLedger& ledger) {
  GenParams greedy = params;
  greedy.temperature = 0.0;
  return sample_trajectory(policy, question, greedy, /*sample_seed=*/0, ledger);
}

double score_state(ValueBackend& value, const Trajectory& state,
                   std::string_view instruction) {
  ValueRequest request{.instruction = instruction, .state = state};
  return std::clamp(value.score(request), 0.0, 1.0);
}

std::optional<Answer> extract_answer(const Trajectory& trajectory) {
  if (!trajectory.is_terminal()) return std::nullopt;
  auto span = find_answer_span(trajectory.steps.back().text);
  if (!span) return std::nullopt;
  return normalize_answer(*span);
}

std::string assemble_prompt(std::span<const Demonstration> demonstrations,
                            const Trajectory& state) {
  std::string prompt;
  for (const Demonstration& d : demonstrations) {
    prompt += "Question: ";
    prompt += d.question;
    prompt += "\nAnswer: ";
    prompt += d.solution;
    prompt += "\n\n";
  }
  if (state.question.table_context) {
    prompt += "Table:\n";
    prompt += *state.question.table_context;
    prompt += "\n";
  }
  prompt += "Question: ";
  prompt += state.question.text;
  prompt += "\nAnswer:";
  for (const Step& s : state.steps) {
    prompt += "\n";
    prompt += s.text;
  }
  return prompt;
}

std::vector<Demonstration> load_demonstrations(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open demonstrations file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("demonstrations file " + path + ": " + e.what());
  }
  if (!j.is_array()) {
    throw ParseError("demonstrations file must hold a JSON list");
  }
  std::vector<Demonstration> out;
  out.reserve(j.size());
  for (const auto& item : j) {
    if (!item.contains("question") || !item.contains("solution")) {
      throw ParseError("demonstration records need question and solution fields");
    }
    out.push_back({item.at("question").get<std::string>(),
                   item.at("solution").get<std::string>()});
  }
  return out;
}

}  // namespace litesearch
