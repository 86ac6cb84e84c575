#include "litesearch/core.hpp"

#include <algorithm>

namespace litesearch {

SearchTree::SearchTree(Question question, int max_depth)
    : question_(std::move(question)), max_depth_(max_depth) {
  if (question_.text.empty()) {
    throw InvalidInputError("question text must be non-empty");
  }
  if (max_depth_ < 1) {
    throw InvalidInputError("max_depth must be >= 1");
  }
  Node root;
  root.id = 0;
  nodes_.push_back(std::move(root));
}

const Node& SearchTree::checked(NodeId id) const {
  if (!contains(id)) {
    throw NotFoundError("unknown node id " + std::to_string(id));
  }
  return nodes_[static_cast<size_t>(id)];
}

Node& SearchTree::node(NodeId id) {
  return const_cast<Node&>(checked(id));
}

const Node& SearchTree::node(NodeId id) const { return checked(id); }

NodeId SearchTree::add_child(NodeId parent_id, Step step, double raw_value) {
  Node& parent = node(parent_id);
  if (parent.status == NodeStatus::terminal) {
    throw BudgetViolationError("cannot expand a terminal node");
  }
  if (parent.status == NodeStatus::exhausted) {
    throw BudgetViolationError("node budget exhausted");
  }
  if (!parent.budget_allocated) {
    throw BudgetViolationError("node has no budget assigned yet");
  }
  if (parent.children_spawned >= *parent.budget_allocated) {
    // Unreachable while the status invariant holds; kept as a hard stop.
    throw BudgetViolationError("children_spawned would exceed budget");
  }

  Node child;
  child.id = static_cast<NodeId>(nodes_.size());
  child.parent = parent_id;
  child.depth = parent.depth + 1;
  if (child.depth >= max_depth_ && !step.is_terminal) {
    step.is_terminal = true;  // depth guard: terminal with no answer
  }
  child.cum_tokens = parent.cum_tokens + step.token_count;
  child.raw_value = std::clamp(raw_value, 0.0, 1.0);
  child.calibrated_value = child.raw_value;
  child.status = step.is_terminal ? NodeStatus::terminal : NodeStatus::open;
  child.step = std::move(step);

  parent.children_spawned += 1;
  if (parent.children_spawned == *parent.budget_allocated) {
    parent.status = NodeStatus::exhausted;
  }
  nodes_.push_back(std::move(child));
  return nodes_.back().id;
}

Trajectory SearchTree::return_path(NodeId id) const {
  const Node* cur = &checked(id);
  std::vector<Step> steps;
  steps.reserve(static_cast<size_t>(cur->depth));
  while (cur->parent != kNoNode) {
    steps.push_back(*cur->step);
    cur = &nodes_[static_cast<size_t>(cur->parent)];
  }
  std::reverse(steps.begin(), steps.end());
  Trajectory t;
  t.question = question_;
  t.steps = std::move(steps);
  return t;
}

std::vector<NodeId> SearchTree::candidates() const {
  std::vector<NodeId> out;
  for (const Node& n : nodes_) {
    if (n.status == NodeStatus::open) out.push_back(n.id);
  }
  return out;
}

void SearchTree::assign_budget(NodeId id, int budget) {
  if (budget < 1) {
    throw InvalidInputError("budget must be >= 1");
  }
  Node& n = node(id);
  if (budget < n.children_spawned) {
    throw BudgetViolationError("budget below already-spawned children");
  }
  n.budget_allocated = budget;
  if (n.status == NodeStatus::open && n.children_spawned == budget) {
    n.status = NodeStatus::exhausted;
  }
}

void SearchTree::set_values(NodeId id, double raw, double calibrated) {
  Node& n = node(id);
  n.raw_value = std::clamp(raw, 0.0, 1.0);
  n.calibrated_value = std::clamp(calibrated, 0.0, 1.0);
}

void SearchTree::mark_exhausted(NodeId id) {
  Node& n = node(id);
  if (n.status == NodeStatus::open) n.status = NodeStatus::exhausted;
}

nlohmann::json trajectory_to_json(const Trajectory& trajectory) {
  nlohmann::json steps = nlohmann::json::array();
  for (const Step& s : trajectory.steps) {
    steps.push_back({{"text", s.text}, {"tokens", s.token_count}});
  }
  nlohmann::json j{
      {"question_id", trajectory.question.id},
      {"steps", std::move(steps)},
      {"value", nullptr},
      {"answer", nullptr},
  };
  if (trajectory.final_value) j["value"] = *trajectory.final_value;
  if (trajectory.extracted_answer) j["answer"] = trajectory.extracted_answer->text;
  return j;
}

}  // namespace litesearch
