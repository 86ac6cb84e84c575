// Scratch diagnostic (not part of the build): token spend breakdown.
#include <cstdio>
#include <map>
#include <memory>

#include "litesearch/bench.hpp"
#include "litesearch/hash.hpp"
#include "litesearch/search.hpp"
#include "litesearch/synthetic.hpp"

using namespace litesearch;
using synthetic::SyntheticPolicy;
using synthetic::SyntheticSuite;
using synthetic::SyntheticValue;

int main() {
  auto suite = std::make_shared<SyntheticSuite>(500, 4, 0.7, 0.15, 7);
  SyntheticPolicy policy(suite);
  SyntheticValue value(suite, 0.15, mix(7, kStreamValueNoise));

  for (bool stat : {false, true}) {
    SearchConfig cfg;
    cfg.ablations.static_budget = stat;
    long long total_tokens = 0;
    std::map<int, long long> tokens_by_depth;      // expansion children only
    std::map<int, int> children_by_depth;
    std::map<int, int> expansions_by_depth;        // parent depth
    long long greedy_tokens = 0;
    int greedy_accepts = 0;
    std::map<int, int> budget_hist;
    std::map<bool, long long> low_parent_tokens;
    int iter_sum = 0;

    for (int i = 0; i < suite->size(); ++i) {
      RunOptions options;
      options.seed = mix(7, kStreamQuestion, fnv1a(suite->task_at(i).question().id));
      SearchResult r = run(suite->task_at(i).question(), cfg, policy, value, options);
      total_tokens += r.tokens.generated_tokens;
      iter_sum += r.iterations_used;
      if (r.iterations_used == 0) {
        ++greedy_accepts;
        greedy_tokens += r.tokens.generated_tokens;
        continue;
      }
      int ghat = 4;  // greedy chain ids 1..4
      std::map<NodeId, double> cal_by_id;
      std::map<NodeId, int> spend_by_parent;
      for (const NodeLogEntry& e : r.per_node_log) cal_by_id[e.id] = e.calibrated_value;
      for (const NodeLogEntry& e : r.per_node_log) {
        if (e.id == 0) continue;
        if (e.id <= ghat) {
          greedy_tokens += e.tokens;
          budget_hist[e.budget]++;
          continue;
        }
        tokens_by_depth[e.depth] += e.tokens;
        children_by_depth[e.depth]++;
        expansions_by_depth[e.depth - 1]++;
        budget_hist[e.budget]++;
        spend_by_parent[e.parent] += e.tokens;
      }
      for (auto& [pid, tok] : spend_by_parent) {
        bool lowval = cal_by_id[pid] < 0.3;
        low_parent_tokens[lowval] += tok;
      }
    }
    std::printf("=== %s: mean tokens %.1f, greedy-accepts %d, mean iters %.2f\n",
                stat ? "static" : "dynamic", total_tokens / 500.0, greedy_accepts,
                iter_sum / 500.0);
    std::printf("greedy tokens/question %.1f\n", greedy_tokens / 500.0);
    for (auto& [d, t] : tokens_by_depth) {
      std::printf("  child depth %d: children %d (%.2f/q), tokens/q %.1f\n", d,
                  children_by_depth[d], children_by_depth[d] / 500.0, t / 500.0);
    }
    std::printf("  budgets: ");
    for (auto& [b, c] : budget_hist) std::printf("%d:%d ", b, c);
    std::printf("\n  expansion tokens/q from parents cal<0.3: %.1f, cal>=0.3: %.1f\n",
                low_parent_tokens[true] / 500.0, low_parent_tokens[false] / 500.0);
  }
  return 0;
}
