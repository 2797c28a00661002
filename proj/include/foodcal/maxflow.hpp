#pragma once

#include <cassert>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

namespace foodcal {

/// s/t max-flow on a sparse graph using the Boykov-Kolmogorov search-tree
/// algorithm. Capacities are non-negative; `Cap` is an integral or floating
/// type. Single-threaded and deterministic: the same sequence of add_* calls
/// gives the same flow and the same partition.
///
/// After solve(), a node is on the source side iff it is reachable from the
/// source in the residual graph (the smallest source set of a minimum cut).
template <typename Cap>
class MaxFlowGraph {
 public:
  explicit MaxFlowGraph(int num_nodes, std::size_t edge_hint = 0) : nodes_(static_cast<std::size_t>(num_nodes)) {
    arcs_.reserve(2 * edge_hint);
  }

  int num_nodes() const noexcept { return static_cast<int>(nodes_.size()); }

  /// Adds to the node's source->node and node->sink capacities.
  void add_terminal(int node, Cap source_cap, Cap sink_cap) {
    assert(source_cap >= 0 && sink_cap >= 0);
    Node& n = nodes_[static_cast<std::size_t>(node)];
    const Cap delta = n.tr_cap;
    if (delta > 0) {
      source_cap += delta;
    } else {
      sink_cap -= delta;
    }
    flow_ += source_cap < sink_cap ? source_cap : sink_cap;
    n.tr_cap = source_cap - sink_cap;
  }

  /// Edge u->v with capacity `cap` and v->u with `rev_cap`.
  void add_edge(int u, int v, Cap cap, Cap rev_cap) {
    assert(u != v && cap >= 0 && rev_cap >= 0);
    const int a = static_cast<int>(arcs_.size());
    arcs_.push_back({v, nodes_[static_cast<std::size_t>(u)].first, cap});
    nodes_[static_cast<std::size_t>(u)].first = a;
    arcs_.push_back({u, nodes_[static_cast<std::size_t>(v)].first, rev_cap});
    nodes_[static_cast<std::size_t>(v)].first = a + 1;
  }

  Cap solve();

  bool on_source_side(int node) const noexcept {
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    return n.parent != kNoParent && !n.in_sink;
  }

  Cap flow() const noexcept { return flow_; }

 private:
  static constexpr int kNoParent = -1;
  static constexpr int kTerminal = -2;
  static constexpr int kOrphan = -3;
  static constexpr int kInfDist = std::numeric_limits<int>::max();

  struct Arc {
    int head;
    int next;  // next arc out of the same tail
    Cap r_cap;
  };

  struct Node {
    int first = -1;
    int parent = kNoParent;  // arc from this node towards its tree parent
    bool in_sink = false;
    bool active = false;
    long ts = 0;
    int dist = 0;
    Cap tr_cap = 0;  // > 0: residual source->node, < 0: residual node->sink
  };

  static int sister(int a) noexcept { return a ^ 1; }

  void activate(int i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.active) {
      n.active = true;
      active_.push_back(i);
    }
  }

  Node& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  Arc& arc(int a) { return arcs_[static_cast<std::size_t>(a)]; }

  void augment(int middle);
  void adopt(int i);

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::deque<int> active_;
  std::deque<int> orphans_;
  Cap flow_ = 0;
  long time_ = 0;
};

template <typename Cap>
Cap MaxFlowGraph<Cap>::solve() {
  active_.clear();
  orphans_.clear();
  time_ = 0;
  for (int i = 0; i < num_nodes(); ++i) {
    Node& n = node(i);
    n.active = false;
    n.ts = 0;
    if (n.tr_cap > 0) {
      n.in_sink = false;
      n.parent = kTerminal;
      n.dist = 1;
      activate(i);
    } else if (n.tr_cap < 0) {
      n.in_sink = true;
      n.parent = kTerminal;
      n.dist = 1;
      activate(i);
    } else {
      n.parent = kNoParent;
    }
  }

  while (!active_.empty()) {
    const int i = active_.front();
    active_.pop_front();
    node(i).active = false;
    if (node(i).parent == kNoParent) continue;

    // Grow the tree of i until it touches the other tree.
    int middle = -1;
    for (int a = node(i).first; a >= 0; a = arc(a).next) {
      const int j = arc(a).head;
      if (!node(i).in_sink) {
        if (arc(a).r_cap <= 0) continue;
        if (node(j).parent == kNoParent) {
          node(j).in_sink = false;
          node(j).parent = sister(a);
          node(j).ts = node(i).ts;
          node(j).dist = node(i).dist + 1;
          activate(j);
        } else if (node(j).in_sink) {
          middle = a;
          break;
        } else if (node(j).ts <= node(i).ts && node(j).dist > node(i).dist) {
          node(j).parent = sister(a);
          node(j).ts = node(i).ts;
          node(j).dist = node(i).dist + 1;
        }
      } else {
        if (arc(sister(a)).r_cap <= 0) continue;
        if (node(j).parent == kNoParent) {
          node(j).in_sink = true;
          node(j).parent = sister(a);
          node(j).ts = node(i).ts;
          node(j).dist = node(i).dist + 1;
          activate(j);
        } else if (!node(j).in_sink) {
          middle = sister(a);
          break;
        } else if (node(j).ts <= node(i).ts && node(j).dist > node(i).dist) {
          node(j).parent = sister(a);
          node(j).ts = node(i).ts;
          node(j).dist = node(i).dist + 1;
        }
      }
    }

    if (middle < 0) continue;

    ++time_;
    augment(middle);
    while (!orphans_.empty()) {
      const int o = orphans_.front();
      orphans_.pop_front();
      adopt(o);
    }
    // i may still reach the other tree through further arcs.
    if (node(i).parent != kNoParent && !node(i).active) {
      node(i).active = true;
      active_.push_front(i);
    }
  }
  return flow_;
}

template <typename Cap>
void MaxFlowGraph<Cap>::augment(int middle) {
  Cap bottleneck = arc(middle).r_cap;

  // Source side: walk from the tail of `middle` to the source.
  for (int i = arc(sister(middle)).head;;) {
    const int a = node(i).parent;
    if (a == kTerminal) {
      if (node(i).tr_cap < bottleneck) bottleneck = node(i).tr_cap;
      break;
    }
    if (arc(sister(a)).r_cap < bottleneck) bottleneck = arc(sister(a)).r_cap;
    i = arc(a).head;
  }
  // Sink side: walk from the head of `middle` to the sink.
  for (int i = arc(middle).head;;) {
    const int a = node(i).parent;
    if (a == kTerminal) {
      if (-node(i).tr_cap < bottleneck) bottleneck = -node(i).tr_cap;
      break;
    }
    if (arc(a).r_cap < bottleneck) bottleneck = arc(a).r_cap;
    i = arc(a).head;
  }

  arc(sister(middle)).r_cap += bottleneck;
  arc(middle).r_cap -= bottleneck;

  for (int i = arc(sister(middle)).head;;) {
    const int a = node(i).parent;
    if (a == kTerminal) {
      node(i).tr_cap -= bottleneck;
      if (node(i).tr_cap == 0) {
        node(i).parent = kOrphan;
        orphans_.push_front(i);
      }
      break;
    }
    arc(a).r_cap += bottleneck;
    arc(sister(a)).r_cap -= bottleneck;
    if (arc(sister(a)).r_cap == 0) {
      node(i).parent = kOrphan;
      orphans_.push_front(i);
    }
    i = arc(a).head;
  }
  for (int i = arc(middle).head;;) {
    const int a = node(i).parent;
    if (a == kTerminal) {
      node(i).tr_cap += bottleneck;
      if (node(i).tr_cap == 0) {
        node(i).parent = kOrphan;
        orphans_.push_front(i);
      }
      break;
    }
    arc(sister(a)).r_cap += bottleneck;
    arc(a).r_cap -= bottleneck;
    if (arc(a).r_cap == 0) {
      node(i).parent = kOrphan;
      orphans_.push_front(i);
    }
    i = arc(a).head;
  }
  flow_ += bottleneck;
}

template <typename Cap>
void MaxFlowGraph<Cap>::adopt(int i) {
  const bool sink_tree = node(i).in_sink;
  int best_arc = kNoParent;
  int best_dist = kInfDist;

  for (int a0 = node(i).first; a0 >= 0; a0 = arc(a0).next) {
    // Residual capacity must run from the candidate parent towards i
    // (source tree) or from i towards the candidate parent (sink tree).
    const Cap residual = sink_tree ? arc(a0).r_cap : arc(sister(a0)).r_cap;
    if (residual <= 0) continue;
    int j = arc(a0).head;
    if (node(j).in_sink != sink_tree || node(j).parent == kNoParent) continue;

    // Is j still rooted at a terminal? Measure its distance on the way.
    int d = 0;
    for (;;) {
      if (node(j).ts == time_) {
        d += node(j).dist;
        break;
      }
      const int a = node(j).parent;
      ++d;
      if (a == kTerminal) {
        node(j).ts = time_;
        node(j).dist = 1;
        break;
      }
      if (a == kOrphan) {
        d = kInfDist;
        break;
      }
      j = arc(a).head;
    }
    if (d == kInfDist) continue;
    if (d < best_dist) {
      best_arc = a0;
      best_dist = d;
    }
    for (j = arc(a0).head; node(j).ts != time_; j = arc(node(j).parent).head) {
      node(j).ts = time_;
      node(j).dist = d--;
    }
  }

  if (best_arc != kNoParent) {
    node(i).parent = best_arc;
    node(i).ts = time_;
    node(i).dist = best_dist + 1;
    return;
  }

  // No valid parent: i leaves its tree; children become orphans and
  // neighbours that could regrow into i are reactivated.
  node(i).ts = 0;
  for (int a0 = node(i).first; a0 >= 0; a0 = arc(a0).next) {
    const int j = arc(a0).head;
    const int pa = node(j).parent;
    if (node(j).in_sink != sink_tree || pa == kNoParent) continue;
    const Cap residual = sink_tree ? arc(a0).r_cap : arc(sister(a0)).r_cap;
    if (residual > 0) activate(j);
    if (pa != kTerminal && pa != kOrphan && arc(pa).head == i) {
      node(j).parent = kOrphan;
      orphans_.push_back(j);
    }
  }
  node(i).parent = kNoParent;
}

}  // namespace foodcal
