#include "litesearch/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "litesearch/hash.hpp"

namespace litesearch::baselines {

namespace {

GenParams gen_params(const BaselineContext& ctx, double temperature) {
  return GenParams{
      .demonstrations = ctx.demonstrations,
      .temperature = temperature,
      .max_step_tokens = ctx.config.max_step_tokens,
      .max_depth = ctx.config.max_depth,
  };
}

MethodResult from_trajectory(Trajectory t, TokenLedger ledger, std::string outcome) {
  MethodResult r;
  r.answer = t.extracted_answer;
  r.tokens = ledger;
  r.trajectory = std::move(t);
  r.outcome = std::move(outcome);
  return r;
}

/// Picks the tally entry with the highest key value; ties go to the answer
/// whose first supporting sample came earliest.
template <typename KeyFn>
std::optional<Answer> tally_argmax(const VoteTally& tally, KeyFn key) {
  const VoteTally::Entry* best = nullptr;
  const std::string* best_answer = nullptr;
  for (const auto& [answer, entry] : tally.by_answer) {
    if (!best || key(entry) > key(*best) ||
        (key(entry) == key(*best) && entry.first_sample < best->first_sample)) {
      best = &entry;
      best_answer = &answer;
    }
  }
  if (!best) return std::nullopt;
  for (const Trajectory& t : tally.sample_trajectories) {
    if (t.extracted_answer && t.extracted_answer->text == *best_answer) {
      return t.extracted_answer;
    }
  }
  return std::nullopt;
}

std::optional<Answer> vote_result(const VoteTally& tally, bool weighted) {
  if (weighted) {
    return tally_argmax(tally, [](const VoteTally::Entry& e) { return e.weight_sum; });
  }
  return tally_argmax(tally, [](const VoteTally::Entry& e) { return static_cast<double>(e.count); });
}

}  // namespace

VoteTally sample_votes(const Question& question, int k, const BaselineContext& ctx,
                       TokenLedger& ledger, bool score_samples) {
  if (k < 1) throw InvalidInputError("K must be >= 1");
  VoteTally tally;
  tally.sample_trajectories.reserve(static_cast<size_t>(k));
  GenParams params = gen_params(ctx, ctx.config.temperature);
  for (int j = 0; j < k; ++j) {
    uint64_t seed = mix(ctx.seed, kStreamVote, static_cast<uint64_t>(j));
    Trajectory t = sample_trajectory(ctx.policy, question, params, seed, ledger);
    if (score_samples && ctx.value) {
      t.final_value = score_state(*ctx.value, t, ctx.value_instruction);
    }
    if (t.extracted_answer) {
      auto& entry = tally.by_answer[t.extracted_answer->text];
      if (entry.count == 0) entry.first_sample = j;
      entry.count += 1;
      entry.weight_sum += t.final_value.value_or(0.0);
    }
    tally.sample_trajectories.push_back(std::move(t));
  }
  return tally;
}

MethodResult greedy_baseline(const Question& question, const BaselineContext& ctx) {
  TokenLedger ledger;
  Trajectory t = greedy_decode(ctx.policy, question, gen_params(ctx, 0.0), ledger);
  return from_trajectory(std::move(t), ledger, "answered");
}

MethodResult hard_vote(const Question& question, int k, const BaselineContext& ctx) {
  MethodResult r;
  VoteTally tally = sample_votes(question, k, ctx, r.tokens, /*score_samples=*/false);
  r.answer = vote_result(tally, /*weighted=*/false);
  r.outcome = r.answer ? "answered" : "no_answer";
  return r;
}

MethodResult soft_vote(const Question& question, int k, const BaselineContext& ctx) {
  if (!ctx.value) throw InvalidInputError("soft voting needs a value backend");
  MethodResult r;
  VoteTally tally = sample_votes(question, k, ctx, r.tokens, /*score_samples=*/true);
  r.answer = vote_result(tally, /*weighted=*/true);
  r.outcome = r.answer ? "answered" : "no_answer";
  return r;
}

MethodResult best_of(const Question& question, int k, const BaselineContext& ctx) {
  if (!ctx.value) throw InvalidInputError("best-of needs a value backend");
  MethodResult r;
  VoteTally tally = sample_votes(question, k, ctx, r.tokens, /*score_samples=*/true);
  const Trajectory* best = nullptr;
  for (const Trajectory& t : tally.sample_trajectories) {
    if (!t.extracted_answer) continue;
    if (!best || t.final_value.value_or(0.0) > best->final_value.value_or(0.0)) {
      best = &t;
    }
  }
  if (best) {
    r.answer = best->extracted_answer;
    r.trajectory = *best;
  }
  r.outcome = r.answer ? "answered" : "no_answer";
  return r;
}

namespace {

struct DfsState {
  SearchTree tree;
  const BaselineContext& ctx;
  TokenLedger& ledger;
  std::optional<Trajectory> best_terminal;
  double best_terminal_value = -1.0;
  std::optional<Trajectory> accepted;

  void consider_terminal(NodeId id) {
    const Node& n = tree.node(id);
    if (n.raw_value > best_terminal_value) {
      best_terminal_value = n.raw_value;
      Trajectory t = tree.return_path(id);
      t.final_value = n.raw_value;
      t.extracted_answer = extract_answer(t);
      best_terminal = std::move(t);
    }
  }

  /// Lazily generates children one at a time, descending immediately into
  /// the first one that clears the prune threshold; children below it are
  /// pruned for good. Returns true once a terminal path is accepted.
  bool visit(NodeId id) {
    while (tree.node(id).status == NodeStatus::open) {
      uint64_t seed = mix(ctx.seed, kStreamDfs, static_cast<uint64_t>(id),
                          static_cast<uint64_t>(tree.node(id).children_spawned));
      Trajectory state = tree.return_path(id);
      Step step = generate_step(ctx.policy, state, gen_params(ctx, ctx.config.temperature),
                                seed, ledger);
      state.steps.push_back(step);
      double raw = score_state(*ctx.value, state, ctx.value_instruction);
      NodeId child = tree.add_child(id, std::move(step), raw);
      tree.assign_budget(child, kTotMaxChildren);
      const Node& n = tree.node(child);
      if (n.status == NodeStatus::terminal) {
        consider_terminal(child);
        if (raw >= kTotPruneThreshold) {
          Trajectory t = tree.return_path(child);
          t.final_value = raw;
          t.extracted_answer = extract_answer(t);
          accepted = std::move(t);
          return true;
        }
      } else if (raw >= kTotPruneThreshold) {
        if (visit(child)) return true;
      }
      // raw < threshold: pruned, move on to the next sibling.
    }
    return false;
  }
};

}  // namespace

MethodResult tot_dfs(const Question& question, const BaselineContext& ctx) {
  if (!ctx.value) throw InvalidInputError("ToT-DFS needs a value backend");
  MethodResult r;
  DfsState dfs{SearchTree(question, ctx.config.max_depth), ctx, r.tokens, {}, -1.0, {}};
  dfs.tree.assign_budget(dfs.tree.root_id(), kTotMaxChildren);
  bool found = dfs.visit(dfs.tree.root_id());
  std::optional<Trajectory> chosen = found ? dfs.accepted : dfs.best_terminal;
  if (chosen) {
    r.answer = chosen->extracted_answer;
    r.trajectory = std::move(chosen);
  }
  r.outcome = found ? "accepted" : (r.answer ? "best_effort" : "no_answer");
  return r;
}

MethodResult tot_bfs(const Question& question, const BaselineContext& ctx) {
  if (!ctx.value) throw InvalidInputError("ToT-BFS needs a value backend");
  MethodResult r;
  SearchTree tree(question, ctx.config.max_depth);
  // Beam nodes expand a fixed fan-out; the cap below is per-node budget.
  tree.assign_budget(tree.root_id(), kTotBeamWidth);

  std::optional<Trajectory> best_terminal;
  double best_terminal_value = -1.0;
  auto consider_terminal = [&](NodeId id) {
    const Node& n = tree.node(id);
    if (n.raw_value > best_terminal_value) {
      best_terminal_value = n.raw_value;
      Trajectory t = tree.return_path(id);
      t.final_value = n.raw_value;
      t.extracted_answer = extract_answer(t);
      best_terminal = std::move(t);
    }
  };

  std::vector<NodeId> beam{tree.root_id()};
  for (int level = 0; level < ctx.config.max_depth; ++level) {
    std::vector<NodeId> pool;
    for (NodeId id : beam) {
      const Node& n = tree.node(id);
      if (n.status == NodeStatus::terminal) {
        pool.push_back(id);  // finished hypotheses stay in contention
        continue;
      }
      for (int j = 0; j < kTotBeamWidth; ++j) {
        uint64_t seed = mix(ctx.seed, kStreamBfs, static_cast<uint64_t>(id),
                            static_cast<uint64_t>(j));
        Trajectory state = tree.return_path(id);
        Step step = generate_step(ctx.policy, state, gen_params(ctx, ctx.config.temperature),
                                  seed, r.tokens);
        state.steps.push_back(step);
        double raw = score_state(*ctx.value, state, ctx.value_instruction);
        NodeId child = tree.add_child(id, std::move(step), raw);
        tree.assign_budget(child, kTotBeamWidth);
        if (tree.node(child).status == NodeStatus::terminal) consider_terminal(child);
        pool.push_back(child);
      }
    }
    if (pool.empty()) break;
    std::sort(pool.begin(), pool.end(), [&](NodeId a, NodeId b) {
      const Node& na = tree.node(a);
      const Node& nb = tree.node(b);
      if (na.raw_value != nb.raw_value) return na.raw_value > nb.raw_value;
      return a < b;
    });
    if (pool.size() > static_cast<size_t>(kTotBeamWidth)) {
      pool.resize(static_cast<size_t>(kTotBeamWidth));
    }
    // Stop once the level's best survivor is a finished path.
    if (tree.node(pool.front()).status == NodeStatus::terminal) break;
    beam = std::move(pool);
  }

  if (best_terminal) {
    r.answer = best_terminal->extracted_answer;
    r.trajectory = std::move(best_terminal);
  }
  r.outcome = r.answer ? "answered" : "no_answer";
  return r;
}

MethodResult litesearch_method(const Question& question, const BaselineContext& ctx) {
  if (!ctx.value) throw InvalidInputError("litesearch needs a value backend");
  RunOptions options{
      .demonstrations = ctx.demonstrations,
      .value_instruction = ctx.value_instruction,
      .seed = ctx.seed,
      .node_log = ctx.node_log,
  };
  SearchResult sr = run(question, ctx.config, ctx.policy, *ctx.value, options);
  MethodResult r;
  r.tokens = sr.tokens;
  r.iterations = sr.iterations_used;
  r.outcome = std::string(to_string(sr.outcome));
  if (sr.trajectory) {
    r.answer = sr.trajectory->extracted_answer;
    r.per_step_values = std::move(sr.per_step_values);
    r.trajectory = std::move(sr.trajectory);
  }
  return r;
}

MethodResult litesearch_plus_voting(const Question& question, double alpha, int k,
                                    const BaselineContext& ctx) {
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw InvalidInputError("alpha must lie in (0, 1)");
  }
  MethodResult search_result = litesearch_method(question, ctx);
  double value = -1.0;
  if (search_result.trajectory && search_result.trajectory->final_value) {
    value = *search_result.trajectory->final_value;
  }
  if (search_result.outcome != "failed" && value >= alpha) {
    search_result.outcome = "search_kept";
    return search_result;
  }
  MethodResult rescued = soft_vote(question, k, ctx);
  rescued.tokens.merge(search_result.tokens);
  rescued.iterations = search_result.iterations;
  rescued.outcome = "rescued_by_voting";
  return rescued;
}

bool MethodSpec::needs_value_backend() const {
  switch (kind) {
    case Kind::greedy:
    case Kind::hard_vote:
      return false;
    default:
      return true;
  }
}

MethodSpec parse_method(const std::string& name) {
  MethodSpec spec;
  spec.name = name;
  auto at = name.find('@');
  std::string head = at == std::string::npos ? name : name.substr(0, at);
  std::string arg = at == std::string::npos ? "" : name.substr(at + 1);

  auto need_int = [&](const char* what) {
    try {
      int v = std::stoi(arg);
      if (v < 1) throw std::invalid_argument("k");
      return v;
    } catch (const std::exception&) {
      throw InvalidInputError(std::string("method ") + name + " needs " + what);
    }
  };

  if (head == "greedy") {
    spec.kind = MethodSpec::Kind::greedy;
  } else if (head == "hard_vote") {
    spec.kind = MethodSpec::Kind::hard_vote;
    spec.k = need_int("@K (e.g. hard_vote@20)");
  } else if (head == "soft_vote") {
    spec.kind = MethodSpec::Kind::soft_vote;
    spec.k = need_int("@K (e.g. soft_vote@20)");
  } else if (head == "best") {
    spec.kind = MethodSpec::Kind::best_of;
    spec.k = need_int("@K (e.g. best@20)");
  } else if (head == "tot_dfs") {
    spec.kind = MethodSpec::Kind::tot_dfs;
  } else if (head == "tot_bfs") {
    spec.kind = MethodSpec::Kind::tot_bfs;
  } else if (head == "litesearch") {
    spec.kind = MethodSpec::Kind::litesearch;
  } else if (head == "litesearch+vote") {
    spec.kind = MethodSpec::Kind::litesearch_plus_vote;
    spec.k = kDefaultRescueVotes;
    try {
      spec.alpha = std::stod(arg);
    } catch (const std::exception&) {
      throw InvalidInputError("method " + name + " needs @alpha (e.g. litesearch+vote@0.8)");
    }
    if (spec.alpha <= 0.0 || spec.alpha >= 1.0) {
      throw InvalidInputError("alpha must lie in (0, 1): " + name);
    }
  } else {
    throw InvalidInputError("unknown method: " + name);
  }
  return spec;
}

MethodResult run_method(const MethodSpec& spec, const Question& question,
                        const BaselineContext& ctx) {
  switch (spec.kind) {
    case MethodSpec::Kind::greedy: return greedy_baseline(question, ctx);
    case MethodSpec::Kind::hard_vote: return hard_vote(question, spec.k, ctx);
    case MethodSpec::Kind::soft_vote: return soft_vote(question, spec.k, ctx);
    case MethodSpec::Kind::best_of: return best_of(question, spec.k, ctx);
    case MethodSpec::Kind::tot_dfs: return tot_dfs(question, ctx);
    case MethodSpec::Kind::tot_bfs: return tot_bfs(question, ctx);
    case MethodSpec::Kind::litesearch: return litesearch_method(question, ctx);
    case MethodSpec::Kind::litesearch_plus_vote:
      return litesearch_plus_voting(question, spec.alpha, spec.k, ctx);
  }
  throw InvalidInputError("unhandled method kind");
}

}  // namespace litesearch::baselines
