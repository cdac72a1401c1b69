#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace metric_atlas {

/// Highest-label push-relabel maximum flow on real capacities.
///
/// Residual capacities and excesses at or below `slack` are treated as
/// zero, so the returned value can undercount the true maximum by at most
/// slack times the number of nodes.
class MaxFlow {
 public:
  static constexpr double kDefaultSlack = 1e-12;

  explicit MaxFlow(std::size_t nodes, double slack = kDefaultSlack)
      : graph_(nodes), slack_(slack) {}

  /// Adds a directed arc and returns its handle for flow().
  std::size_t addEdge(std::size_t from, std::size_t to, double capacity) {
    if (from >= graph_.size() || to >= graph_.size()) {
      throw std::out_of_range("MaxFlow::addEdge: node out of range");
    }
    if (!(capacity >= 0.0)) {
      throw std::invalid_argument("MaxFlow::addEdge: negative capacity");
    }
    const std::size_t fromPos = graph_[from].size();
    const std::size_t toPos = graph_[to].size() + (from == to ? 1 : 0);
    graph_[from].push_back({to, toPos, capacity, capacity});
    graph_[to].push_back({from, fromPos, 0.0, 0.0});
    handles_.push_back({from, fromPos});
    return handles_.size() - 1;
  }

  double solve(std::size_t source, std::size_t sink) {
    const std::size_t n = graph_.size();
    if (source >= n || sink >= n || source == sink) {
      throw std::invalid_argument("MaxFlow::solve: bad terminals");
    }
    height_.assign(n, 0);
    excess_.assign(n, 0.0);
    current_.assign(n, 0);
    buckets_.assign(2 * n + 1, {});
    active_.assign(n, false);
    source_ = source;
    sink_ = sink;

    globalRelabel();
    height_[source] = n;
    for (Arc& a : graph_[source]) {
      if (a.cap > 0.0) {
        const double d = a.cap;
        a.cap = 0.0;
        graph_[a.to][a.rev].cap += d;
        excess_[a.to] += d;
        excess_[source] -= d;
        activate(a.to);
      }
    }

    highest_ = 2 * n;
    for (;;) {
      while (highest_ > 0 && buckets_[highest_].empty()) --highest_;
      if (buckets_[highest_].empty()) break;
      const std::size_t u = buckets_[highest_].back();
      buckets_[highest_].pop_back();
      active_[u] = false;
      discharge(u);
    }
    return excess_[sink];
  }

  /// Flow on the arc returned by addEdge().
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
  };
  struct Handle {
    std::size_t node;
    std::size_t pos;
  };

  void activate(std::size_t v) {
    if (v == source_ || v == sink_ || active_[v] || excess_[v] <= slack_) {
      return;
    }
    if (height_[v] >= buckets_.size()) return;
    active_[v] = true;
    buckets_[height_[v]].push_back(v);
    highest_ = std::max(highest_, height_[v]);
  }

  // Exact distance-to-sink labels by reverse BFS over residual arcs.
  void globalRelabel() {
    const std::size_t n = graph_.size();
    std::vector<std::size_t> dist(n, 2 * n);
    std::queue<std::size_t> queue;
    dist[sink_] = 0;
    queue.push(sink_);
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop();
      for (const Arc& a : graph_[v]) {
        const Arc& back = graph_[a.to][a.rev];
        if (back.cap > slack_ && dist[a.to] == 2 * n) {
          dist[a.to] = dist[v] + 1;
          queue.push(a.to);
        }
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (v != source_) height_[v] = std::min(dist[v], 2 * n - 1);
    }
  }

  void discharge(std::size_t u) {
    const std::size_t n = graph_.size();
    while (excess_[u] > slack_) {
      if (current_[u] == graph_[u].size()) {
        std::size_t lowest = 2 * n;
        for (const Arc& a : graph_[u]) {
          if (a.cap > slack_) lowest = std::min(lowest, height_[a.to] + 1);
        }
        current_[u] = 0;
        if (lowest >= 2 * n) return;  // stranded excess; cannot move
        height_[u] = lowest;
        continue;
      }
      Arc& a = graph_[u][current_[u]];
      if (a.cap > slack_ && height_[u] == height_[a.to] + 1) {
        const double d = std::min(excess_[u], a.cap);
        a.cap -= d;
        graph_[a.to][a.rev].cap += d;
        excess_[u] -= d;
        excess_[a.to] += d;
        activate(a.to);
      } else {
        ++current_[u];
      }
    }
  }

  std::vector<std::vector<Arc>> graph_;
  std::vector<Handle> handles_;
  double slack_;
  std::vector<std::size_t> height_;
  std::vector<double> excess_;
  std::vector<std::size_t> current_;
  std::vector<std::vector<std::size_t>> buckets_;
  std::vector<bool> active_;
  std::size_t source_ = 0;
  std::size_t sink_ = 0;
  std::size_t highest_ = 0;
};

}  // namespace metric_atlas
