#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "litesearch/backends.hpp"
#include "litesearch/core.hpp"

namespace litesearch {

enum class ExpansionStrategy { incremental, batch };
enum class ProgressMode { none, step_number, token_number };

struct Ablations {
  bool static_budget = false;         // budget fixed at the cap B
  bool no_depth_penalty = false;      // drop the 1/d factor from budgets
  bool no_greedy_calibration = false; // use raw values, skip calibration
};

/**
 * All search knobs. Defaults are the reference setting:
 * (N, B, lambda, answer_threshold, target_accuracy) = (100, 10, 0, 0.8, 0.9).
 */
struct SearchConfig {
  int max_iterations = 100;        // N
  int budget_cap = 10;             // B
  double progress_weight = 0.0;    // lambda in the selection score
  double answer_threshold = 0.8;   // a terminal must beat this to be accepted
  double target_accuracy = 0.9;    // drives budget sizes; larger = more conservative
  ExpansionStrategy expansion = ExpansionStrategy::batch;
  ProgressMode progress_mode = ProgressMode::none;
  Ablations ablations;
  double value_floor = 1e-6;       // clamp before the budget log
  double value_ceiling = 1.0 - 1e-6;
  int max_depth = SearchTree::kDefaultMaxDepth;
  double temperature = 0.6;        // sampling temperature during expansion
  int max_step_tokens = 256;
};

/// The greedy-decoded trajectory every progress and calibration reference
/// is measured against.
struct GreedyReference {
  Trajectory trajectory;
  int step_count = 1;       // d-hat
  int token_count = 1;
  double final_value = 0.0; // v-hat, the value of the complete greedy path
};

enum class SearchOutcome { threshold_met, iteration_limit_best_effort, failed };

std::string_view to_string(SearchOutcome outcome);

struct NodeLogEntry {
  NodeId id = 0;
  NodeId parent = kNoNode;
  int depth = 0;
  double raw_value = 0.0;
  double calibrated_value = 0.0;
  int budget = 0;
  int tokens = 0;  // this node's step tokens
  uint64_t step_text_hash = 0;
};

struct SearchResult {
  std::optional<Trajectory> trajectory;
  int iterations_used = 0;
  TokenLedger tokens;
  SearchOutcome outcome = SearchOutcome::failed;
  std::vector<NodeLogEntry> per_node_log;
  /// Raw values of the returned trajectory's prefixes (index i = value of
  /// the i-step prefix). Empty when the greedy path was accepted outright,
  /// since its prefixes were never scored.
  std::vector<double> per_step_values;
};

struct RunOptions {
  std::span<const Demonstration> demonstrations;
  std::string_view value_instruction;
  uint64_t seed = 0;
  std::ostream* node_log = nullptr;  // optional JSON-lines debug sink
};

/// Fraction of the solution completed, measured against the greedy
/// reference. May exceed 1 for states deeper than the greedy path.
double progress(const Trajectory& state, const GreedyReference& ref, ProgressMode mode);
double progress(int depth, int cum_tokens, const GreedyReference& ref, ProgressMode mode);

/// Argmax over open nodes of calibrated value + lambda * progress.
/// Ties break toward greater depth, then lower node id. Throws
/// InvalidInputError when no candidates remain.
NodeId select_node(const SearchTree& tree, const SearchConfig& config,
                   const GreedyReference& ref);

/// Blends a raw value with the greedy trajectory's value, weighted toward
/// the greedy value at shallow depths: (v + v_hat/d) / (1 + 1/d). The
/// result always lies between the two inputs. Identity under the
/// no_greedy_calibration ablation.
double calibrate(double raw_value, double greedy_value, int depth,
                 const SearchConfig& config);

/// Node expansion budget: min(ceil(log(1-target) / (d * log(1-v))), B),
/// floored at 1, with v clamped away from the log singularities. Higher
/// values and greater depths earn smaller budgets.
int compute_budget(double value, int depth, const SearchConfig& config);

struct ExpandContext {
  PolicyBackend& policy;
  ValueBackend& value;
  const SearchConfig& config;
  const GreedyReference& ref;
  const RunOptions& options;
  TokenLedger& ledger;
};

/// Spawns exactly one child of an open node; the node stays open while
/// budget remains, so it can be reselected.
NodeId expand_incremental(SearchTree& tree, NodeId id, ExpandContext& ctx);

/// Spawns every remaining budgeted child in one pass, exhausting the node.
/// On a persistent transport failure mid-batch, children generated so far
/// are kept and the node is closed.
std::vector<NodeId> expand_batch(SearchTree& tree, NodeId id, ExpandContext& ctx);

/**
 * The full search: greedy decode and score the reference; accept it
 * outright when its value beats the answer threshold; otherwise seed the
 * tree with the greedy path (scored per prefix, budgeted) and iterate
 * select-expand until a terminal beats the threshold, the iteration cap is
 * reached, or the frontier empties. Falls back to the best-valued terminal
 * seen, or the greedy trajectory when no terminal exists.
 */
SearchResult run(const Question& question, const SearchConfig& config,
                 PolicyBackend& policy, ValueBackend& value,
                 const RunOptions& options = {});

}  // namespace litesearch
