#include "litesearch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "litesearch/hash.hpp"

namespace litesearch::synthetic {

namespace {

constexpr uint64_t kDrawSalt = 0xD1;
constexpr uint64_t kPerturbSalt = 0xD2;
constexpr uint64_t kNoiseSalt = 0xD3;
constexpr uint64_t kIncrementSalt = 0xD4;

uint64_t state_hash(const Trajectory& state) {
  uint64_t h = fnv1a(state.question.id);
  for (const Step& s : state.steps) {
    h = mix(h, fnv1a(s.text));
  }
  return h;
}

std::string step_text(int index, int chain_length, int increment, long long declared_total) {
  std::string text = "step " + std::to_string(index + 1) + ": acc = acc + " +
                     std::to_string(increment);
  if (index + 1 == chain_length) {
    text += ". The answer is " + std::to_string(declared_total) + ".";
  }
  return text;
}

/// Sum of the increments a (possibly corrupted) state has declared so far.
long long declared_sum(const Trajectory& state) {
  long long total = 0;
  for (const Step& s : state.steps) {
    size_t pos = s.text.find("acc = acc + ");
    if (pos == std::string::npos) continue;
    total += std::strtoll(s.text.c_str() + pos + 12, nullptr, 10);
  }
  return total;
}

}  // namespace

Question SyntheticTask::question() const {
  Question q;
  q.id = "syn-" + std::to_string(seed);
  q.text = "Start with acc = 0 and apply " + std::to_string(chain_length) +
           " increment steps, then report the final value of acc.";
  Answer gold;
  gold.is_number = true;
  gold.number = static_cast<double>(answer);
  gold.text = std::to_string(answer);
  q.gold_answer = gold;
  return q;
}

bool SyntheticTask::is_clean_prefix(const Trajectory& state) const {
  if (state.depth() > chain_length) return false;
  for (int i = 0; i < state.depth(); ++i) {
    if (state.steps[static_cast<size_t>(i)].text != chain[static_cast<size_t>(i)]) {
      return false;
    }
  }
  return true;
}

SyntheticTask make_task(int chain_length, double per_step_success, uint64_t seed) {
  if (chain_length < 1) {
    throw InvalidInputError("chain_length must be >= 1");
  }
  if (per_step_success < 0.0 || per_step_success > 1.0) {
    throw InvalidInputError("per_step_success must lie in [0, 1]");
  }
  SyntheticTask task;
  task.chain_length = chain_length;
  task.per_step_success = per_step_success;
  task.seed = seed;
  task.increments.reserve(static_cast<size_t>(chain_length));
  long long total = 0;
  for (int i = 0; i < chain_length; ++i) {
    int inc = 1 + static_cast<int>(mix(seed, kIncrementSalt, static_cast<uint64_t>(i)) % 9);
    task.increments.push_back(inc);
    total += inc;
  }
  task.answer = total;
  task.chain.reserve(static_cast<size_t>(chain_length));
  long long running = 0;
  for (int i = 0; i < chain_length; ++i) {
    running += task.increments[static_cast<size_t>(i)];
    task.chain.push_back(step_text(i, chain_length, task.increments[static_cast<size_t>(i)],
                                   running));
  }
  return task;
}

double oracle_value(const SyntheticTask& task, const Trajectory& state) {
  if (!task.is_clean_prefix(state)) return 0.0;
  int remaining = task.chain_length - state.depth();
  if (remaining <= 0) return 1.0;
  return std::pow(task.per_step_success, remaining);
}

double perturbed_value(const SyntheticTask& task, const Trajectory& state,
                       double sigma, uint64_t noise_seed) {
  if (sigma < 0.0) {
    throw InvalidInputError("sigma must be >= 0");
  }
  double base = oracle_value(task, state);
  double scale = sigma * (1.0 + 1.0 / (state.depth() + 1.0));
  uint64_t h = mix(state_hash(state), noise_seed, kNoiseSalt);
  double noise = (2.0 * u01(h) - 1.0) * scale;
  return std::clamp(base + noise, 0.0, 1.0);
}

SyntheticSuite::SyntheticSuite(int count, int chain_length, double per_step_success,
                               double sigma, uint64_t seed)
    : sigma_(sigma), seed_(seed) {
  if (count < 1) {
    throw InvalidInputError("suite needs at least one task");
  }
  tasks_.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    tasks_.push_back(
        make_task(chain_length, per_step_success, mix(seed, kStreamTask, static_cast<uint64_t>(i))));
    by_id_.emplace(tasks_.back().question().id, tasks_.size() - 1);
  }
}

const SyntheticTask& SyntheticSuite::task_for(const Question& question) const {
  auto it = by_id_.find(question.id);
  if (it == by_id_.end()) {
    throw NotFoundError("no synthetic task for question id " + question.id);
  }
  return tasks_[it->second];
}

std::vector<Question> SyntheticSuite::questions() const {
  std::vector<Question> out;
  out.reserve(tasks_.size());
  for (const SyntheticTask& t : tasks_) out.push_back(t.question());
  return out;
}

PolicyResponse SyntheticPolicy::generate(const PolicyRequest& request) {
  const SyntheticTask& task = suite_->task_for(request.state.question);
  const int depth = request.state.depth();
  if (depth >= task.chain_length) {
    throw InvalidInputError("synthetic state is already complete");
  }

  // Temperature 0 is the argmax stream: one fixed draw per state, so greedy
  // decoding is deterministic. Positive temperatures key off the caller's
  // sample seed.
  const uint64_t effective_seed = request.temperature == 0.0 ? 0 : request.sample_seed;
  const uint64_t h = mix(task.seed, state_hash(request.state), effective_seed, kDrawSalt);
  const bool correct = u01(h) < task.per_step_success;

  std::string text;
  if (correct && task.is_clean_prefix(request.state)) {
    text = task.chain[static_cast<size_t>(depth)];
  } else {
    int increment = task.increments[static_cast<size_t>(depth)];
    if (!correct) {
      increment += 1 + static_cast<int>(mix(h, kPerturbSalt) % 9);
    }
    text = step_text(depth, task.chain_length, increment,
                     declared_sum(request.state) + increment);
  }

  PolicyResponse response;
  response.token_count = whitespace_token_count(text);
  response.ended_solution = depth + 1 == task.chain_length;
  response.text = std::move(text);
  return response;
}

double SyntheticValue::score(const ValueRequest& request) {
  const SyntheticTask& task = suite_->task_for(request.state.question);
  return perturbed_value(task, request.state, sigma_, noise_seed_);
}

SuiteSpec parse_suite_spec(const std::string& spec) {
  SuiteSpec out;
  size_t pos = 0;
  while (pos < spec.size()) {
    size_t end = spec.find(',', pos);
    if (end == std::string::npos) end = spec.size();
    std::string field = spec.substr(pos, end - pos);
    pos = end + 1;
    if (field.empty()) continue;
    size_t eq = field.find('=');
    if (eq == std::string::npos) {
      throw ParseError("synthetic spec field needs key=value: " + field);
    }
    std::string key = field.substr(0, eq);
    std::string value = field.substr(eq + 1);
    try {
      if (key == "L") {
        out.chain_length = std::stoi(value);
      } else if (key == "q") {
        out.per_step_success = std::stod(value);
      } else if (key == "sigma" || key == "σ") {
        out.sigma = std::stod(value);
      } else if (key == "n") {
        out.count = std::stoi(value);
      } else if (key == "seed") {
        out.seed = std::stoull(value);
      } else {
        throw ParseError("unknown synthetic spec key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("bad synthetic spec value for " + key + ": " + value);
    }
  }
  return out;
}

std::shared_ptr<SyntheticSuite> make_suite(const SuiteSpec& spec) {
  return std::make_shared<SyntheticSuite>(spec.count, spec.chain_length,
                                          spec.per_step_success, spec.sigma, spec.seed);
}

}  // namespace litesearch::synthetic
