#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "litesearch/search.hpp"

namespace litesearch::baselines {

/// Per-answer vote aggregate over K sampled trajectories.
struct VoteTally {
  struct Entry {
    int count = 0;
    double weight_sum = 0.0;
    int first_sample = 0;  // earliest supporting sample index, for tie-breaks
  };
  std::map<std::string, Entry> by_answer;  // keyed by canonical answer text
  std::vector<Trajectory> sample_trajectories;
};

/// Everything a baseline needs: shared backends, the search configuration
/// (temperature, depth guard, and the engine knobs for litesearch-backed
/// methods), and the question-level seed that pairs methods.
struct BaselineContext {
  PolicyBackend& policy;
  ValueBackend* value = nullptr;
  const SearchConfig& config;
  std::span<const Demonstration> demonstrations;
  std::string_view value_instruction;
  uint64_t seed = 0;
  std::ostream* node_log = nullptr;
};

struct MethodResult {
  std::optional<Answer> answer;
  TokenLedger tokens;
  std::optional<Trajectory> trajectory;
  std::vector<double> per_step_values;  // prefix values when naturally known
  int iterations = 0;
  std::string outcome;
};

MethodResult greedy_baseline(const Question& question, const BaselineContext& ctx);
MethodResult hard_vote(const Question& question, int k, const BaselineContext& ctx);
MethodResult soft_vote(const Question& question, int k, const BaselineContext& ctx);
MethodResult best_of(const Question& question, int k, const BaselineContext& ctx);
MethodResult tot_dfs(const Question& question, const BaselineContext& ctx);
MethodResult tot_bfs(const Question& question, const BaselineContext& ctx);
MethodResult litesearch_method(const Question& question, const BaselineContext& ctx);

/// Runs the search, keeps its answer when the result value reaches alpha,
/// and otherwise rescues the question with soft voting; the ledger sums
/// both stages.
MethodResult litesearch_plus_voting(const Question& question, double alpha, int k,
                                    const BaselineContext& ctx);

/// Samples K full trajectories (paired stream: sample j of a question sees
/// the same randomness in every method) and tallies their answers. Weights
/// are final-state values when `value` is non-null.
VoteTally sample_votes(const Question& question, int k, const BaselineContext& ctx,
                       TokenLedger& ledger, bool score_samples);

/// A method addressable by CLI/config name, e.g. "greedy", "hard_vote@20",
/// "soft_vote@5", "best@20", "tot_dfs", "tot_bfs", "litesearch",
/// "litesearch+vote@0.8".
struct MethodSpec {
  enum class Kind {
    greedy,
    hard_vote,
    soft_vote,
    best_of,
    tot_dfs,
    tot_bfs,
    litesearch,
    litesearch_plus_vote,
  };
  Kind kind = Kind::greedy;
  int k = 0;
  double alpha = 0.0;
  std::string name;

  bool needs_value_backend() const;
};

MethodSpec parse_method(const std::string& name);
MethodResult run_method(const MethodSpec& spec, const Question& question,
                        const BaselineContext& ctx);

/// ToT hyperparameters pinned by the reference setup.
inline constexpr double kTotPruneThreshold = 0.5;
inline constexpr int kTotMaxChildren = 5;
inline constexpr int kTotBeamWidth = 5;
inline constexpr int kDefaultRescueVotes = 20;

}  // namespace litesearch::baselines
