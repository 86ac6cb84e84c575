#include "litesearch/search.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "litesearch/hash.hpp"

namespace litesearch {

namespace {

GenParams gen_params(const SearchConfig& config, const RunOptions& options,
                     double temperature) {
  return GenParams{
      .demonstrations = options.demonstrations,
      .temperature = temperature,
      .max_step_tokens = config.max_step_tokens,
      .max_depth = config.max_depth,
  };
}

void log_node(std::ostream* sink, const SearchTree& tree, NodeId id,
              std::optional<NodeId> duplicate_of = std::nullopt) {
  if (!sink) return;
  const Node& n = tree.node(id);
  nlohmann::json j{
      {"node_id", n.id},
      {"parent", n.parent},
      {"depth", n.depth},
      {"raw_value", n.raw_value},
      {"calibrated_value", n.calibrated_value},
      {"budget", n.budget_allocated.value_or(0)},
      {"step_text_hash", n.step ? fnv1a(n.step->text) : 0},
      {"tokens", n.step ? n.step->token_count : 0},
  };
  if (duplicate_of) j["duplicate_of"] = *duplicate_of;
  *sink << j.dump() << "\n";
}

/// Scores, calibrates and budgets a freshly generated child.
NodeId attach_child(SearchTree& tree, NodeId parent, Step step, ExpandContext& ctx) {
  Trajectory state = tree.return_path(parent);
  state.steps.push_back(step);
  double raw = score_state(ctx.value, state, ctx.options.value_instruction);
  NodeId child = tree.add_child(parent, std::move(step), raw);
  const Node& node = tree.node(child);
  double calibrated = calibrate(raw, ctx.ref.final_value, node.depth, ctx.config);
  tree.set_values(child, raw, calibrated);
  tree.assign_budget(child, compute_budget(calibrated, node.depth, ctx.config));

  std::optional<NodeId> duplicate_of;
  for (const Node& sibling : tree.nodes()) {
    if (sibling.parent == parent && sibling.id != child && sibling.step &&
        sibling.step->text == node.step->text) {
      duplicate_of = sibling.id;  // kept, only logged
      break;
    }
  }
  log_node(ctx.options.node_log, tree, child, duplicate_of);
  return child;
}

NodeId spawn_one(SearchTree& tree, NodeId id, ExpandContext& ctx) {
  const Node& node = tree.node(id);
  uint64_t seed = mix(ctx.options.seed, kStreamExpand, static_cast<uint64_t>(id),
                      static_cast<uint64_t>(node.children_spawned));
  Trajectory state = tree.return_path(id);
  Step step = generate_step(ctx.policy, state, gen_params(ctx.config, ctx.options, ctx.config.temperature),
                            seed, ctx.ledger);
  return attach_child(tree, id, std::move(step), ctx);
}

}  // namespace

std::string_view to_string(SearchOutcome outcome) {
  switch (outcome) {
    case SearchOutcome::threshold_met: return "threshold_met";
    case SearchOutcome::iteration_limit_best_effort: return "iteration_limit_best_effort";
    case SearchOutcome::failed: return "failed";
  }
  return "unknown";
}

double progress(int depth, int cum_tokens, const GreedyReference& ref, ProgressMode mode) {
  switch (mode) {
    case ProgressMode::step_number:
      return static_cast<double>(depth) / static_cast<double>(ref.step_count);
    case ProgressMode::token_number:
      return static_cast<double>(cum_tokens) / static_cast<double>(ref.token_count);
    case ProgressMode::none:
      return 0.0;
  }
  return 0.0;
}

double progress(const Trajectory& state, const GreedyReference& ref, ProgressMode mode) {
  return progress(state.depth(), state.total_tokens(), ref, mode);
}

NodeId select_node(const SearchTree& tree, const SearchConfig& config,
                   const GreedyReference& ref) {
  NodeId best = kNoNode;
  double best_score = 0.0;
  int best_depth = -1;
  for (const Node& n : tree.nodes()) {
    if (n.status != NodeStatus::open) continue;
    double score = n.calibrated_value;
    if (config.progress_weight != 0.0) {
      score += config.progress_weight *
               progress(n.depth, n.cum_tokens, ref, config.progress_mode);
    }
    // Ties prefer deeper nodes (closer to an answer), then older ones.
    if (best == kNoNode || score > best_score ||
        (score == best_score && n.depth > best_depth)) {
      best = n.id;
      best_score = score;
      best_depth = n.depth;
    }
  }
  if (best == kNoNode) {
    throw InvalidInputError("no open candidates to select from");
  }
  return best;
}

double calibrate(double raw_value, double greedy_value, int depth,
                 const SearchConfig& config) {
  if (config.ablations.no_greedy_calibration) return raw_value;
  if (depth < 1) depth = 1;  // the root calibrates as depth 1
  double d = static_cast<double>(depth);
  double blended = (raw_value * d + greedy_value) / (d + 1.0);
  // The blend provably lies between the two inputs; the clamp makes that
  // hold exactly under floating-point rounding as well.
  return std::clamp(blended, std::min(raw_value, greedy_value),
                    std::max(raw_value, greedy_value));
}

int compute_budget(double value, int depth, const SearchConfig& config) {
  if (config.ablations.static_budget) return config.budget_cap;
  if (depth < 1) depth = 1;  // the root budgets as depth 1
  if (config.ablations.no_depth_penalty) depth = 1;
  double v = std::clamp(value, config.value_floor, config.value_ceiling);
  double ratio = std::log(1.0 - config.target_accuracy) /
                 (static_cast<double>(depth) * std::log(1.0 - v));
  double b = std::ceil(ratio);
  if (!(b >= 1.0)) b = 1.0;
  return static_cast<int>(std::min(b, static_cast<double>(config.budget_cap)));
}

NodeId expand_incremental(SearchTree& tree, NodeId id, ExpandContext& ctx) {
  const Node& node = tree.node(id);
  if (node.status != NodeStatus::open || node.remaining_budget() < 1) {
    throw BudgetViolationError("node is not expandable");
  }
  return spawn_one(tree, id, ctx);
}

std::vector<NodeId> expand_batch(SearchTree& tree, NodeId id, ExpandContext& ctx) {
  const Node& node = tree.node(id);
  if (node.status != NodeStatus::open) {
    throw BudgetViolationError("node is not expandable");
  }
  std::vector<NodeId> children;
  int remaining = node.remaining_budget();
  for (int i = 0; i < remaining; ++i) {
    try {
      children.push_back(spawn_one(tree, id, ctx));
    } catch (const TransportError&) {
      // Keep whatever was generated; the node is closed either way since
      // the backend's retries are already spent.
      tree.mark_exhausted(id);
      if (children.empty()) throw;
      return children;
    }
  }
  return children;
}

SearchResult run(const Question& question, const SearchConfig& config,
                 PolicyBackend& policy, ValueBackend& value,
                 const RunOptions& options) {
  SearchResult result;
  try {
    Trajectory greedy = greedy_decode(policy, question,
                                      gen_params(config, options, 0.0), result.tokens);
    double v_hat = score_state(value, greedy, options.value_instruction);
    greedy.final_value = v_hat;

    GreedyReference ref;
    ref.step_count = std::max(1, greedy.depth());
    ref.token_count = std::max(1, greedy.total_tokens());
    ref.final_value = v_hat;
    ref.trajectory = greedy;

    if (greedy.is_terminal() && v_hat > config.answer_threshold) {
      result.trajectory = std::move(greedy);
      result.outcome = SearchOutcome::threshold_met;
      return result;
    }

    // Seed the tree with the greedy path so its prefixes compete in
    // selection from iteration one.
    SearchTree tree(question, config.max_depth);
    ExpandContext ctx{policy, value, config, ref, options, result.tokens};

    Trajectory prefix;
    prefix.question = question;
    double root_raw = score_state(value, prefix, options.value_instruction);
    double root_cal = calibrate(root_raw, v_hat, 1, config);
    tree.set_values(tree.root_id(), root_raw, root_cal);
    tree.assign_budget(tree.root_id(), compute_budget(root_cal, 1, config));
    log_node(options.node_log, tree, tree.root_id());

    NodeId greedy_tail = tree.root_id();
    for (const Step& s : greedy.steps) {
      prefix.steps.push_back(s);
      double raw = score_state(value, prefix, options.value_instruction);
      greedy_tail = tree.add_child(greedy_tail, s, raw);
      const Node& n = tree.node(greedy_tail);
      double cal = calibrate(raw, v_hat, n.depth, config);
      tree.set_values(greedy_tail, raw, cal);
      tree.assign_budget(greedy_tail, compute_budget(cal, n.depth, config));
      log_node(options.node_log, tree, greedy_tail);
    }

    // Prefix values of a node's path, root first.
    auto path_values = [&](NodeId id) {
      std::vector<double> values;
      for (NodeId cur = id; cur != kNoNode; cur = tree.node(cur).parent) {
        values.push_back(tree.node(cur).raw_value);
      }
      std::reverse(values.begin(), values.end());
      return values;
    };

    // Best-effort fallback: the highest-valued terminal seen so far.
    NodeId best_terminal_node = kNoNode;
    double best_terminal_value = -1.0;
    auto consider_terminal = [&](NodeId id, double raw) {
      if (raw > best_terminal_value) {
        best_terminal_value = raw;
        best_terminal_node = id;
      }
    };
    if (greedy.is_terminal()) consider_terminal(greedy_tail, v_hat);

    result.outcome = SearchOutcome::iteration_limit_best_effort;
    NodeId accepted_node = kNoNode;
    while (result.iterations_used < config.max_iterations) {
      if (tree.candidates().empty()) break;
      NodeId selected = select_node(tree, config, ref);
      std::vector<NodeId> fresh;
      if (config.expansion == ExpansionStrategy::incremental) {
        fresh.push_back(expand_incremental(tree, selected, ctx));
      } else {
        fresh = expand_batch(tree, selected, ctx);
      }
      result.iterations_used += 1;

      for (NodeId child : fresh) {
        const Node& n = tree.node(child);
        if (n.status != NodeStatus::terminal) continue;
        consider_terminal(child, n.raw_value);
        // Acceptance judges the raw terminal score against the threshold.
        if (n.raw_value > config.answer_threshold) {
          accepted_node = child;
          result.outcome = SearchOutcome::threshold_met;
          break;
        }
      }
      if (accepted_node != kNoNode) break;
    }

    NodeId chosen =
        accepted_node != kNoNode
            ? accepted_node
            : (best_terminal_node != kNoNode ? best_terminal_node : greedy_tail);
    Trajectory final_trajectory = tree.return_path(chosen);
    final_trajectory.final_value = tree.node(chosen).raw_value;
    final_trajectory.extracted_answer = extract_answer(final_trajectory);
    result.per_step_values = path_values(chosen);
    result.trajectory = std::move(final_trajectory);

    result.per_node_log.reserve(static_cast<size_t>(tree.size()));
    for (const Node& n : tree.nodes()) {
      result.per_node_log.push_back(NodeLogEntry{
          .id = n.id,
          .parent = n.parent,
          .depth = n.depth,
          .raw_value = n.raw_value,
          .calibrated_value = n.calibrated_value,
          .budget = n.budget_allocated.value_or(0),
          .tokens = n.step ? n.step->token_count : 0,
          .step_text_hash = n.step ? fnv1a(n.step->text) : 0,
      });
    }
  } catch (const TransportError&) {
    result.outcome = SearchOutcome::failed;
    result.trajectory = std::nullopt;
  } catch (const DegenerateOutputError&) {
    result.outcome = SearchOutcome::failed;
    result.trajectory = std::nullopt;
  }
  return result;
}

}  // namespace litesearch
