#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "litesearch/backends.hpp"
#include "litesearch/core.hpp"

namespace litesearch::synthetic {

/**
 * A desk-scale reasoning task with a closed-form true value function.
 *
 * The scripted solution is an accumulator chain: step i adds a fixed
 * increment, the last step reports the sum. A sampled step is correct with
 * probability q; wrong steps add a strictly positive perturbation, so one
 * wrong step condemns every descendant (corruption is unrecoverable) and a
 * corrupted trajectory can never stumble back onto the right answer.
 */
struct SyntheticTask {
  int chain_length = 1;           // L
  double per_step_success = 1.0;  // q
  long long answer = 0;
  uint64_t seed = 0;
  std::vector<int> increments;
  std::vector<std::string> chain;  // scripted step texts, size L

  Question question() const;
  /// True when every step matches the scripted chain prefix.
  bool is_clean_prefix(const Trajectory& state) const;
};

/// Builds a deterministic task. Accepts q in [0, 1]: q = 0 is the
/// always-wrong adversarial policy, q = 1 the perfect one.
SyntheticTask make_task(int chain_length, double per_step_success, uint64_t seed);

/// Exact expected success probability from `state`: q^remaining on a clean
/// prefix, 1.0 when clean and complete, 0.0 once corrupted.
double oracle_value(const SyntheticTask& task, const Trajectory& state);

/// Oracle value plus truncated zero-mean noise of scale
/// sigma * (1 + 1/(depth+1)) — noisier at early steps — clamped to [0, 1]
/// and deterministic per (state, seed).
double perturbed_value(const SyntheticTask& task, const Trajectory& state,
                       double sigma, uint64_t noise_seed);

/// A bundle of tasks addressable by question id, acting as a dataset.
class SyntheticSuite {
public:
  SyntheticSuite(int count, int chain_length, double per_step_success,
                 double sigma, uint64_t seed);

  const SyntheticTask& task_for(const Question& question) const;
  const SyntheticTask& task_at(int index) const { return tasks_.at(static_cast<size_t>(index)); }
  std::vector<Question> questions() const;
  int size() const { return static_cast<int>(tasks_.size()); }
  double sigma() const { return sigma_; }
  uint64_t seed() const { return seed_; }

private:
  std::vector<SyntheticTask> tasks_;
  std::unordered_map<std::string, size_t> by_id_;
  double sigma_ = 0.0;
  uint64_t seed_ = 0;
};

/// Policy over a suite: samples the scripted next step with probability q,
/// else a deterministically perturbed wrong step. Temperature 0 pins the
/// draw to a fixed stream, so greedy decoding is deterministic per task.
class SyntheticPolicy : public PolicyBackend {
public:
  explicit SyntheticPolicy(std::shared_ptr<const SyntheticSuite> suite)
      : suite_(std::move(suite)) {}
  PolicyResponse generate(const PolicyRequest& request) override;

private:
  std::shared_ptr<const SyntheticSuite> suite_;
};

/// Value backend over a suite: the perturbed oracle (exact when sigma = 0).
class SyntheticValue : public ValueBackend {
public:
  SyntheticValue(std::shared_ptr<const SyntheticSuite> suite, double sigma,
                 uint64_t noise_seed)
      : suite_(std::move(suite)), sigma_(sigma), noise_seed_(noise_seed) {}
  double score(const ValueRequest& request) override;

private:
  std::shared_ptr<const SyntheticSuite> suite_;
  double sigma_;
  uint64_t noise_seed_;
};

/// Suite description parsed from CLI/config strings like
/// "L=4,q=0.7,sigma=0.15,n=200,seed=7" (the Greek letter is accepted too).
struct SuiteSpec {
  int chain_length = 4;
  double per_step_success = 0.7;
  double sigma = 0.0;
  int count = 100;
  uint64_t seed = 0;
};

SuiteSpec parse_suite_spec(const std::string& spec);
std::shared_ptr<SyntheticSuite> make_suite(const SuiteSpec& spec);

}  // namespace litesearch::synthetic
