#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace metric_atlas {

/// Successive shortest paths with Johnson potentials (dense Dijkstra).
/// Costs must be non-negative. Arcs whose residual capacity drops to
/// `slack` or below are treated as saturated.
class MinCostFlow {
 public:
  static constexpr double kDefaultSlack = 1e-15;

  struct Result {
    double flow;
    double cost;
  };

  explicit MinCostFlow(std::size_t nodes, double slack = kDefaultSlack)
      : graph_(nodes), slack_(slack) {}

  std::size_t addEdge(std::size_t from, std::size_t to, double capacity,
                      double cost) {
    if (from >= graph_.size() || to >= graph_.size()) {
      throw std::out_of_range("MinCostFlow::addEdge: node out of range");
    }
    if (!(capacity >= 0.0) || !(cost >= 0.0)) {
      throw std::invalid_argument(
          "MinCostFlow::addEdge: capacity and cost must be >= 0");
    }
    const std::size_t fromPos = graph_[from].size();
    const std::size_t toPos = graph_[to].size();
    graph_[from].push_back({to, toPos, capacity, capacity, cost});
    graph_[to].push_back({from, fromPos, 0.0, 0.0, -cost});
    handles_.push_back({from, fromPos});
    return handles_.size() - 1;
  }

  /// Sends up to `demand` units from source to sink at minimum cost.
  Result solve(std::size_t source, std::size_t sink, double demand) {
    const std::size_t n = graph_.size();
    constexpr double kUnreached = std::numeric_limits<double>::infinity();
    std::vector<double> potential(n, 0.0);
    std::vector<double> dist(n);
    std::vector<std::size_t> prevNode(n), prevArc(n);
    std::vector<bool> done(n);
    double sent = 0.0;
    double cost = 0.0;

    while (demand - sent > slack_) {
      std::fill(dist.begin(), dist.end(), kUnreached);
      std::fill(done.begin(), done.end(), false);
      dist[source] = 0.0;
      for (;;) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v) {
          if (!done[v] && dist[v] < kUnreached && (u == n || dist[v] < dist[u])) {
            u = v;
          }
        }
        if (u == n) break;
        done[u] = true;
        for (std::size_t k = 0; k < graph_[u].size(); ++k) {
          const Arc& a = graph_[u][k];
          if (a.cap <= slack_) continue;
          // Rounding can push reduced costs a hair below zero.
          const double reduced =
              std::max(0.0, a.cost + potential[u] - potential[a.to]);
          if (dist[u] + reduced < dist[a.to]) {
            dist[a.to] = dist[u] + reduced;
            prevNode[a.to] = u;
            prevArc[a.to] = k;
          }
        }
      }
      if (dist[sink] == kUnreached) break;
      for (std::size_t v = 0; v < n; ++v) {
        if (dist[v] < kUnreached) potential[v] += dist[v];
      }
      double push = demand - sent;
      for (std::size_t v = sink; v != source; v = prevNode[v]) {
        push = std::min(push, graph_[prevNode[v]][prevArc[v]].cap);
      }
      for (std::size_t v = sink; v != source; v = prevNode[v]) {
        Arc& a = graph_[prevNode[v]][prevArc[v]];
        a.cap -= push;
        graph_[v][a.rev].cap += push;
        cost += push * a.cost;
      }
      sent += push;
    }
    return {sent, cost};
  }

  double flow(std::size_t handle) const {
    const auto [node, pos] = handles_.at(handle);
    const Arc& a = graph_[node][pos];
    return a.initial - a.cap;
  }

 private:
  struct Arc {
    std::size_t to;
    std::size_t rev;
    double cap;
    double initial;
    double cost;
  };
  struct Handle {
    std::size_t node;
    std::size_t pos;
  };

  std::vector<std::vector<Arc>> graph_;
  std::vector<Handle> handles_;
  double slack_;
};

}  // namespace metric_atlas
