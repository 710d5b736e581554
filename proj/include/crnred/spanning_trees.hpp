#pragma once

#include <stdexcept>
#include <vector>

namespace crnred {

// Thrown when spanning-tree enumeration is requested beyond the configured
// size cap; callers fall back to the linear-solve route.
class TreeCapExceeded : public std::runtime_error {
 public:
  explicit TreeCapExceeded(int n, int cap)
      : std::runtime_error("spanning-tree enumeration capped at " +
                           std::to_string(cap) + " intermediates, got " +
                           std::to_string(n)) {}
};

inline constexpr int kTreeEnumerationCap = 10;

// Directed multigraph with labelled edges. A spanning tree rooted at r picks
// exactly one outgoing edge for every node except r such that following the
// picks from any node ends at r; its weight is the product of edge labels.
template <typename Label>
struct LabelledDigraph {
  struct Edge {
    int from, to;
    Label label;
  };
  int n = 0;
  std::vector<Edge> edges;
};

// Sum of weights over all spanning trees rooted at `root`, by exhaustive
// choice of one out-edge per non-root node with incremental cycle pruning.
// `zero` and `one` supply the semiring constants for the label type.
template <typename Label>
Label tree_sum(const LabelledDigraph<Label>& g, int root, const Label& zero,
               const Label& one) {
  const int n = g.n;
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    out[static_cast<std::size_t>(g.edges[e].from)].push_back(
        static_cast<int>(e));

  std::vector<int> nodes;  // non-root nodes in assignment order
  for (int v = 0; v < n; ++v)
    if (v != root) nodes.push_back(v);

  std::vector<int> next(static_cast<std::size_t>(n), -1);  // chosen successor
  Label total = zero;

  // After assigning node v, walk the chosen successors; a return to v means a
  // cycle that no later choice can break.
  auto createsCycle = [&](int v) {
    int cur = next[static_cast<std::size_t>(v)];
    while (cur != -1 && cur != root) {
      if (cur == v) return true;
      cur = next[static_cast<std::size_t>(cur)];
    }
    return false;
  };

  auto rec = [&](auto&& self, std::size_t idx, const Label& acc) -> void {
    if (idx == nodes.size()) {
      total = total + acc;
      return;
    }
    int v = nodes[idx];
    for (int e : out[static_cast<std::size_t>(v)]) {
      next[static_cast<std::size_t>(v)] = g.edges[static_cast<std::size_t>(e)].to;
      if (!createsCycle(v))
        self(self, idx + 1, acc * g.edges[static_cast<std::size_t>(e)].label);
      next[static_cast<std::size_t>(v)] = -1;
    }
  };
  rec(rec, 0, one);
  return total;
}

}  // namespace crnred
