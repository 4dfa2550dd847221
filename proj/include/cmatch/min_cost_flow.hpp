#pragma once

#include <cstdint>
#include <vector>

namespace cmatch {

// Successive-shortest-path min-cost flow with node potentials. Costs must be
// nonnegative integers; deterministic for a fixed edge insertion order.
class MinCostFlow {
 public:
  explicit MinCostFlow(int node_count);

  // Returns the edge id; a reverse edge is added implicitly.
  int add_edge(int from, int to, int capacity, std::int64_t cost);

  // Sends up to max_flow units from source to sink; returns (flow, cost).
  std::pair<int, std::int64_t> solve(int source, int sink, int max_flow);

  int flow_on(int edge_id) const;

 private:
  struct Edge {
    int to;
    int cap;
    std::int64_t cost;
    int rev;  // index of the reverse edge in graph_[to]
  };
  std::vector<std::vector<Edge>> graph_;
  std::vector<std::pair<int, int>> edge_ref_;  // edge id -> (node, index)
};

}  // namespace cmatch
