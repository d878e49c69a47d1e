#pragma once

#include <cstddef>
#include <queue>
#include <vector>

#include "simplex.hpp"  // FieldTraits

namespace motcert::detail {

/// Edmonds-Karp max flow over an exact or floating field. Augmentation count
/// is O(V*E) regardless of capacities, so rational capacities terminate.
template <class T>
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t n) : adj_(n) {}

  std::size_t add_edge(std::size_t u, std::size_t v, T cap) {
    std::size_t id = edges_.size();
    adj_[u].push_back(id);
    edges_.push_back({u, v, cap, T{}});
    adj_[v].push_back(id + 1);
    edges_.push_back({v, u, T{}, T{}});
    return id;
  }

  T run(std::size_t s, std::size_t t) {
    T total{};
    const T tol = FieldTraits<T>::exact ? T{} : T(1e-15);
    while (true) {
      std::vector<std::ptrdiff_t> via(adj_.size(), -1);
      std::queue<std::size_t> q;
      q.push(s);
      via[s] = -2;
      while (!q.empty() && via[t] == -1) {
        std::size_t u = q.front();
        q.pop();
        for (auto id : adj_[u]) {
          const Edge& e = edges_[id];
          if (via[e.to] == -1 && e.cap - e.flow > tol) {
            via[e.to] = static_cast<std::ptrdiff_t>(id);
            q.push(e.to);
          }
        }
      }
      if (via[t] == -1) break;
      // bottleneck along the path
      T push{};
      bool first = true;
      for (std::size_t v = t; v != s;) {
        const Edge& e = edges_[static_cast<std::size_t>(via[v])];
        T res = e.cap - e.flow;
        if (first || res < push) push = res;
        first = false;
        v = e.from;
      }
      for (std::size_t v = t; v != s;) {
        std::size_t id = static_cast<std::size_t>(via[v]);
        edges_[id].flow += push;
        edges_[id ^ 1].flow -= push;
        v = edges_[id].from;
      }
      total += push;
    }
    return total;
  }

  T flow_on(std::size_t edge_id) const { return edges_[edge_id].flow; }

 private:
  struct Edge {
    std::size_t from, to;
    T cap, flow;
  };
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Edge> edges_;
};

}  // namespace motcert::detail
