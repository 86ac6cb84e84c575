#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "litesearch/core.hpp"

namespace litesearch {

struct Demonstration {
  std::string question;
  std::string solution;
};

/**
 * One step-generation request. `state` is the question plus the steps
 * produced so far; `sample_seed` pins the random stream so runs replay
 * bit-identically (ignored at temperature 0, where decoding is greedy and
 * must be deterministic for every backend).
 */
struct PolicyRequest {
  std::span<const Demonstration> demonstrations;
  const Trajectory& state;
  double temperature = 0.6;
  bool stop_at_step_boundary = true;
  int max_tokens = 256;
  uint64_t sample_seed = 0;
};

struct PolicyResponse {
  std::string text;
  int token_count = 0;      // generated tokens only, prompt excluded
  bool ended_solution = false;
};

struct ValueRequest {
  std::string_view instruction;
  const Trajectory& state;
};

/// Step generator. Implementations must be safe for concurrent use by many
/// simultaneous search runs; all per-run state lives in the request.
class PolicyBackend {
public:
  virtual ~PolicyBackend() = default;
  virtual PolicyResponse generate(const PolicyRequest& request) = 0;
};

/// State scorer returning a scalar in [0, 1]. Scoring is pure: it never
/// touches a token ledger.
class ValueBackend {
public:
  virtual ~ValueBackend() = default;
  virtual double score(const ValueRequest& request) = 0;
};

/// Shared generation knobs for the step plumbing below.
struct GenParams {
  std::span<const Demonstration> demonstrations;
  double temperature = 0.6;
  int max_step_tokens = 256;
  int max_depth = SearchTree::kDefaultMaxDepth;
};

/// Samples exactly one reasoning step continuing `state`, cut at the step
/// boundary, and charges its token count to `ledger`. The step is terminal
/// when the backend signalled end-of-solution or the text carries a
/// final-answer marker. Throws DegenerateOutputError on empty generations.
Step generate_step(PolicyBackend& policy, const Trajectory& state,
                   const GenParams& params, uint64_t sample_seed,
                   TokenLedger& ledger);

/// Decodes a full trajectory at the given temperature, stopping at the
/// first terminal step or the depth guard (in which case the last step is
/// forced terminal and no answer is extracted).
Trajectory sample_trajectory(PolicyBackend& policy, const Question& question,
                             const GenParams& params, uint64_t sample_seed,
                             TokenLedger& ledger);

/// Temperature-0 full decode; byte-deterministic for a given backend.
Trajectory greedy_decode(PolicyBackend& policy, const Question& question,
                         const GenParams& params, TokenLedger& ledger);

/// Scores a state, clamped into [0, 1]. No ledger effect by contract.
double score_state(ValueBackend& value, const Trajectory& state,
                   std::string_view instruction = {});

/// Parses and normalizes the final answer of a terminal trajectory, or
/// nullopt when there is no marker (counted incorrect downstream).
std::optional<Answer> extract_answer(const Trajectory& trajectory);

/// Deterministic prompt: demonstrations, question (with table context when
/// present), steps so far, and the step-continuation cue.
std::string assemble_prompt(std::span<const Demonstration> demonstrations,
                            const Trajectory& state);

/// Loads a JSON list of {question, solution} records.
std::vector<Demonstration> load_demonstrations(const std::string& path);

}  // namespace litesearch
