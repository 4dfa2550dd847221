#include "cmatch/min_cost_flow.hpp"

#include <limits>
#include <queue>

#include "cmatch/errors.hpp"

namespace cmatch {

namespace {
constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
}

MinCostFlow::MinCostFlow(int node_count) : graph_(node_count) {}

int MinCostFlow::add_edge(int from, int to, int capacity, std::int64_t cost) {
  if (cost < 0) throw NumericalError("MinCostFlow: negative edge cost");
  graph_[from].push_back({to, capacity, cost, static_cast<int>(graph_[to].size())});
  graph_[to].push_back({from, 0, -cost, static_cast<int>(graph_[from].size()) - 1});
  edge_ref_.push_back({from, static_cast<int>(graph_[from].size()) - 1});
  return static_cast<int>(edge_ref_.size()) - 1;
}

std::pair<int, std::int64_t> MinCostFlow::solve(int source, int sink,
                                               int max_flow) {
  const int n = static_cast<int>(graph_.size());
  std::vector<std::int64_t> potential(n, 0);
  std::vector<std::int64_t> dist(n);
  std::vector<int> prev_node(n), prev_edge(n);
  std::vector<char> done(n);

  int flow = 0;
  std::int64_t cost = 0;
  while (flow < max_flow) {
    // Heap Dijkstra with reduced costs, stopped as soon as the sink is
    // settled; unsettled nodes then have distance >= dist[sink], so capping
    // the potential update at dist[sink] keeps reduced costs nonnegative.
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    dist[source] = 0;
    using Item = std::pair<std::int64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    queue.push({0, source});
    while (!queue.empty()) {
      auto [d, u] = queue.top();
      queue.pop();
      if (done[u]) continue;
      done[u] = 1;
      if (u == sink) break;
      for (size_t e = 0; e < graph_[u].size(); ++e) {
        const Edge& ed = graph_[u][e];
        if (ed.cap <= 0) continue;
        std::int64_t nd = dist[u] + ed.cost + potential[u] - potential[ed.to];
        if (!done[ed.to] && nd < dist[ed.to]) {
          dist[ed.to] = nd;
          prev_node[ed.to] = u;
          prev_edge[ed.to] = static_cast<int>(e);
          queue.push({nd, ed.to});
        }
      }
    }
    if (dist[sink] >= kInf) break;  // no augmenting path left
    // Every node gets the cap, unreached ones included: a node skipped this
    // round can become reachable later, and a stale potential would leave
    // negative reduced costs behind.
    for (int v = 0; v < n; ++v)
      potential[v] += std::min(dist[v], dist[sink]);

    int push = max_flow - flow;
    for (int v = sink; v != source; v = prev_node[v])
      push = std::min(push, graph_[prev_node[v]][prev_edge[v]].cap);
    for (int v = sink; v != source; v = prev_node[v]) {
      Edge& ed = graph_[prev_node[v]][prev_edge[v]];
      ed.cap -= push;
      graph_[v][ed.rev].cap += push;
      cost += static_cast<std::int64_t>(push) * ed.cost;
    }
    flow += push;
  }
  return {flow, cost};
}

int MinCostFlow::flow_on(int edge_id) const {
  auto [node, idx] = edge_ref_[edge_id];
  const Edge& ed = graph_[node][idx];
  return graph_[ed.to][ed.rev].cap;  // reverse capacity equals the flow sent
}

}  // namespace cmatch
