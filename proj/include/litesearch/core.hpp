#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "litesearch/answer.hpp"
#include "litesearch/errors.hpp"

namespace litesearch {

struct Question {
  std::string id;
  std::string text;
  std::optional<Answer> gold_answer;
  std::optional<std::string> table_context;
};

/// One reasoning step. Terminal steps carry a final-answer marker or are
/// explicitly answer-less (depth guard).
struct Step {
  std::string text;
  int token_count = 0;
  bool is_terminal = false;
};

enum class NodeStatus { open, exhausted, terminal };

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

struct Node {
  NodeId id = 0;
  NodeId parent = kNoNode;
  std::optional<Step> step;  // absent only at root
  int depth = 0;
  double raw_value = 0.0;
  double calibrated_value = 0.0;
  std::optional<int> budget_allocated;
  int children_spawned = 0;
  NodeStatus status = NodeStatus::open;
  int cum_tokens = 0;  // generated tokens along the root path

  int remaining_budget() const {
    return budget_allocated ? *budget_allocated - children_spawned : 0;
  }
};

/// Exact count of policy-generated tokens. Value-scoring calls never touch
/// the ledger.
struct TokenLedger {
  long long generated_tokens = 0;
  long long generation_calls = 0;

  void add(int tokens) {
    generated_tokens += tokens;
    generation_calls += 1;
  }
  void merge(const TokenLedger& other) {
    generated_tokens += other.generated_tokens;
    generation_calls += other.generation_calls;
  }
};

/// An ordered root-to-node step sequence; terminal when its last step is.
struct Trajectory {
  Question question;
  std::vector<Step> steps;
  std::optional<double> final_value;
  std::optional<Answer> extracted_answer;

  int depth() const { return static_cast<int>(steps.size()); }
  bool is_terminal() const { return !steps.empty() && steps.back().is_terminal; }
  int total_tokens() const {
    int sum = 0;
    for (const Step& s : steps) sum += s.token_count;
    return sum;
  }
};

/// Serializes to the logging record {question_id, steps:[{text, tokens}],
/// value, answer}.
nlohmann::json trajectory_to_json(const Trajectory& trajectory);

/**
 * The question-rooted search tree.
 *
 * Node ids are insertion-ordered integers (root = 0), which pins the
 * iteration order every deterministic tie-break in the engine relies on.
 * A tree is owned by a single search run; no internal locking.
 */
class SearchTree {
public:
  /// Builds a tree holding only the root. Throws InvalidInputError on an
  /// empty question text.
  explicit SearchTree(Question question, int max_depth = kDefaultMaxDepth);

  /// Attaches a child under `parent`. The parent must be open and hold an
  /// assigned budget with spare capacity. Children reaching `max_depth` are
  /// forced terminal (answer-less) to stop runaway trees.
  NodeId add_child(NodeId parent, Step step, double raw_value);

  /// Steps on the root-to-node path, in order. Length equals node depth.
  Trajectory return_path(NodeId id) const;

  /// Every open node (not terminal, budget not exhausted), id-ascending.
  std::vector<NodeId> candidates() const;

  Node& node(NodeId id);
  const Node& node(NodeId id) const;
  bool contains(NodeId id) const {
    return id >= 0 && id < static_cast<int>(nodes_.size());
  }

  void assign_budget(NodeId id, int budget);
  void set_values(NodeId id, double raw, double calibrated);
  /// Forces an open node to exhausted (used when expansion aborts early).
  void mark_exhausted(NodeId id);

  NodeId root_id() const { return 0; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int max_depth() const { return max_depth_; }
  const Question& question() const { return question_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  static constexpr int kDefaultMaxDepth = 16;

private:
  const Node& checked(NodeId id) const;

  Question question_;
  int max_depth_;
  std::vector<Node> nodes_;
};

}  // namespace litesearch
