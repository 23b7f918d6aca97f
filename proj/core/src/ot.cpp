#include "ruelle/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ruelle/errors.hpp"

namespace ruelle::ot {

namespace {

// Transportation simplex over the complete bipartite graph. Node ids:
// rows 0..m-1, columns m..m+n-1. The basis is a spanning tree stored as
// parent pointers with the flow on the parent arc.
class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply,
                   std::span<const double> demand,
                   std::span<const double> cost)
      : m_(supply.size()), n_(demand.size()), cost_(cost),
        supply_(supply.begin(), supply.end()),
        demand_(demand.begin(), demand.end()) {
    if (cost.size() != m_ * n_) throw UsageError("cost matrix shape mismatch");
    const double s = std::accumulate(supply_.begin(), supply_.end(), 0.0);
    const double d = std::accumulate(demand_.begin(), demand_.end(), 0.0);
    if (std::fabs(s - d) > 1e-9 * std::max(1.0, std::max(s, d)))
      throw UsageError("transport problem is unbalanced");
    if (!demand_.empty()) demand_.back() += s - d;  // absorb rounding drift
    for (double v : supply_)
      if (v < 0.0) throw UsageError("negative supply weight");
    for (double v : demand_)
      if (v < -1e-12) throw UsageError("negative demand weight");
    if (!demand_.empty() && demand_.back() < 0.0) demand_.back() = 0.0;
  }

  double solve(std::vector<double>* plan_out) {
    initial_solution();
    complete_tree();
    build_tree_arrays();
    run_pivots();
    double total = 0.0;
    for (std::size_t v = 0; v < node_count(); ++v) {
      if (parent_[v] < 0) continue;
      const auto [i, j] = arc_of(v, static_cast<std::size_t>(parent_[v]));
      total += pflow_[v] * cost_[i * n_ + j];
    }
    if (plan_out) {
      plan_out->assign(m_ * n_, 0.0);
      for (std::size_t v = 0; v < node_count(); ++v) {
        if (parent_[v] < 0) continue;
        const auto [i, j] = arc_of(v, static_cast<std::size_t>(parent_[v]));
        (*plan_out)[i * n_ + j] += pflow_[v];
      }
    }
    return total;
  }

 private:
  std::size_t node_count() const { return m_ + n_; }

  std::pair<std::size_t, std::size_t> arc_of(std::size_t a,
                                             std::size_t b) const {
    return a < m_ ? std::make_pair(a, b - m_) : std::make_pair(b, a - m_);
  }

  // Row-greedy minimum-cost allocation; leaves a forest of basic arcs.
  void initial_solution() {
    std::vector<double> s = supply_, d = demand_;
    flows_.clear();
    for (std::size_t i = 0; i < m_; ++i) {
      while (s[i] > 0.0) {
        std::size_t best = n_;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_; ++j)
          if (d[j] > 0.0 && cost_[i * n_ + j] < best_cost) {
            best_cost = cost_[i * n_ + j];
            best = j;
          }
        if (best == n_) break;  // demand exhausted by rounding; drop residue
        const double theta = std::min(s[i], d[best]);
        flows_.push_back({i, best, theta});
        s[i] -= theta;
        d[best] -= theta;
        if (s[i] <= 0.0) break;
      }
    }
  }

  // Union-find completion: add zero-flow arcs until the basic arcs span all
  // m+n nodes as a single tree.
  void complete_tree() {
    uf_.assign(node_count(), 0);
    std::iota(uf_.begin(), uf_.end(), std::size_t{0});
    std::size_t components = node_count();
    for (const auto& f : flows_)
      if (unite(f.row, m_ + f.col)) --components;
    for (std::size_t i = 0; i < m_ && components > 1; ++i)
      for (std::size_t j = 0; j < n_ && components > 1; ++j)
        if (unite(i, m_ + j)) {
          flows_.push_back({i, j, 0.0});
          --components;
        }
  }

  std::size_t find(std::size_t v) {
    while (uf_[v] != v) {
      uf_[v] = uf_[uf_[v]];
      v = uf_[v];
    }
    return v;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    uf_[a] = b;
    return true;
  }

  // Parent pointers, arc flows, depths and duals from the basic arc list.
  void build_tree_arrays() {
    const std::size_t nc = node_count();
    adj_head_.assign(nc, -1);
    adj_next_.assign(2 * flows_.size(), -1);
    adj_to_.assign(2 * flows_.size(), 0);
    adj_flow_idx_.assign(2 * flows_.size(), 0);
    for (std::size_t e = 0; e < flows_.size(); ++e) {
      add_adj(flows_[e].row, m_ + flows_[e].col, e, 2 * e);
      add_adj(m_ + flows_[e].col, flows_[e].row, e, 2 * e + 1);
    }
    parent_.assign(nc, -1);
    pflow_.assign(nc, 0.0);
    depth_.assign(nc, 0);
    dual_.assign(nc, 0.0);
    order_.clear();
    order_.reserve(nc);
    // BFS from node 0 (tree is connected after complete_tree).
    std::vector<char> seen(nc, 0);
    std::vector<std::size_t> queue{0};
    seen[0] = 1;
    parent_[0] = -1;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::size_t v = queue[qi];
      order_.push_back(v);
      for (int it = adj_head_[v]; it >= 0; it = adj_next_[it]) {
        const std::size_t w = adj_to_[it];
        if (seen[w]) continue;
        seen[w] = 1;
        parent_[w] = static_cast<int>(v);
        pflow_[w] = flows_[adj_flow_idx_[it]].amount;
        depth_[w] = depth_[v] + 1;
        queue.push_back(w);
      }
    }
    recompute_duals();
  }

  void add_adj(std::size_t from, std::size_t to, std::size_t flow_idx,
               std::size_t slot) {
    adj_to_[slot] = to;
    adj_flow_idx_[slot] = flow_idx;
    adj_next_[slot] = adj_head_[from];
    adj_head_[from] = static_cast<int>(slot);
  }

  // Duals: basic arcs have zero reduced cost; root dual 0; resolved in BFS
  // order so parents are set before children.
  void recompute_duals() {
    dual_[order_[0]] = 0.0;
    for (std::size_t qi = 1; qi < order_.size(); ++qi) {
      const std::size_t v = order_[qi];
      const std::size_t p = static_cast<std::size_t>(parent_[v]);
      const auto [i, j] = arc_of(v, p);
      dual_[v] = cost_[i * n_ + j] - dual_[p];
    }
  }

  // One simplex pass: block search for the entering arc, cycle update,
  // tree repair. Returns false when no entering arc remains.
  bool pivot(double tol) {
    const std::size_t arcs = m_ * n_;
    const std::size_t block =
        std::max<std::size_t>(64, static_cast<std::size_t>(
                                      std::sqrt(static_cast<double>(arcs))));
    std::size_t scanned = 0;
    double best_rc = -tol;
    std::size_t best_arc = arcs;
    while (scanned < arcs) {
      const std::size_t stop = std::min(arcs, scan_pos_ + block);
      for (; scan_pos_ < stop; ++scan_pos_, ++scanned) {
        const std::size_t i = scan_pos_ / n_, j = scan_pos_ % n_;
        const double rc = cost_[scan_pos_] - dual_[i] - dual_[m_ + j];
        if (rc < best_rc) {
          best_rc = rc;
          best_arc = scan_pos_;
        }
      }
      if (scan_pos_ == arcs) scan_pos_ = 0;
      if (best_arc != arcs) break;  // first block holding an improving arc
    }
    if (best_arc == arcs) return false;
    apply_pivot(best_arc / n_, m_ + best_arc % n_);
    return true;
  }

  // Adds flow on (a,b): along the tree cycle a..b flows alternate sign.
  void apply_pivot(std::size_t a, std::size_t b) {
    // Collect the two paths up to the least common ancestor.
    path_a_.clear();
    path_b_.clear();
    std::size_t x = a, y = b;
    while (depth_[x] > depth_[y]) {
      path_a_.push_back(x);
      x = static_cast<std::size_t>(parent_[x]);
    }
    while (depth_[y] > depth_[x]) {
      path_b_.push_back(y);
      y = static_cast<std::size_t>(parent_[y]);
    }
    while (x != y) {
      path_a_.push_back(x);
      path_b_.push_back(y);
      x = static_cast<std::size_t>(parent_[x]);
      y = static_cast<std::size_t>(parent_[y]);
    }
    // Arcs that lose flow: the 1st, 3rd, ... arc away from each endpoint of
    // the entering arc, alternating around the cycle. On the a-side the arc
    // (path_a_[0], parent) is a "minus" arc; parity alternates with index.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = node_count();
    bool leave_on_a = true;
    for (std::size_t idx = 0; idx < path_a_.size(); idx += 2)
      if (pflow_[path_a_[idx]] < theta) {
        theta = pflow_[path_a_[idx]];
        leave = path_a_[idx];
        leave_on_a = true;
      }
    for (std::size_t idx = 0; idx < path_b_.size(); idx += 2)
      if (pflow_[path_b_[idx]] < theta) {
        theta = pflow_[path_b_[idx]];
        leave = path_b_[idx];
        leave_on_a = false;
      }
    // Apply the flow change around the cycle.
    for (std::size_t idx = 0; idx < path_a_.size(); ++idx)
      pflow_[path_a_[idx]] += (idx % 2 == 0) ? -theta : theta;
    for (std::size_t idx = 0; idx < path_b_.size(); ++idx)
      pflow_[path_b_[idx]] += (idx % 2 == 0) ? -theta : theta;

    // Re-root the path between the entering endpoint and the leaving arc so
    // the entering arc becomes a tree arc carrying theta.
    const std::size_t enter_child = leave_on_a ? a : b;
    const std::size_t other_end = leave_on_a ? b : a;
    reroot(enter_child, leave);
    parent_[enter_child] = static_cast<int>(other_end);
    pflow_[enter_child] = theta;
    rebuild_after_pivot();
  }

  // Reverses parent pointers from `top` down to `bottom` so that `bottom`
  // becomes the subtree root (the arc above `top` is discarded).
  void reroot(std::size_t bottom, std::size_t top) {
    std::size_t cur = bottom;
    int prev = -1;
    double prev_flow = 0.0;
    while (true) {
      const int next = parent_[cur];
      const double next_flow = pflow_[cur];
      parent_[cur] = prev;
      pflow_[cur] = prev_flow;
      if (cur == top) break;
      prev = static_cast<int>(cur);
      prev_flow = next_flow;
      cur = static_cast<std::size_t>(next);
    }
  }

  // Refresh depths, BFS order and duals from the parent arrays. O(m+n).
  void rebuild_after_pivot() {
    const std::size_t nc = node_count();
    child_head_.assign(nc, -1);
    child_next_.assign(nc, -1);
    std::size_t root = nc;
    for (std::size_t v = 0; v < nc; ++v) {
      if (parent_[v] < 0) {
        root = v;
        continue;
      }
      child_next_[v] = child_head_[static_cast<std::size_t>(parent_[v])];
      child_head_[static_cast<std::size_t>(parent_[v])] = static_cast<int>(v);
    }
    order_.clear();
    order_.push_back(root);
    depth_[root] = 0;
    for (std::size_t qi = 0; qi < order_.size(); ++qi) {
      const std::size_t v = order_[qi];
      for (int c = child_head_[v]; c >= 0; c = child_next_[c]) {
        depth_[static_cast<std::size_t>(c)] = depth_[v] + 1;
        order_.push_back(static_cast<std::size_t>(c));
      }
    }
    recompute_duals();
  }

  void run_pivots() {
    double scale = 0.0;
    for (double c : cost_) scale = std::max(scale, std::fabs(c));
    const double tol = std::max(1e-14, 1e-13 * scale);
    const std::size_t cap = 60 * (m_ + n_) + 20000;
    scan_pos_ = 0;
    for (std::size_t it = 0; it < cap; ++it)
      if (!pivot(tol)) return;
    throw ConvergenceError("transport simplex exceeded its pivot cap", {});
  }

  struct BasicFlow {
    std::size_t row, col;
    double amount;
  };

  std::size_t m_, n_;
  std::span<const double> cost_;
  std::vector<double> supply_, demand_;
  std::vector<BasicFlow> flows_;
  std::vector<std::size_t> uf_;
  std::vector<int> parent_;
  std::vector<double> pflow_;
  std::vector<std::size_t> depth_;
  std::vector<double> dual_;
  std::vector<std::size_t> order_;
  std::vector<int> adj_head_, adj_next_;
  std::vector<std::size_t> adj_to_, adj_flow_idx_;
  std::vector<int> child_head_, child_next_;
  std::vector<std::size_t> path_a_, path_b_;
  std::size_t scan_pos_ = 0;
};

}  // namespace

double transport_cost(std::span<const double> supply,
                      std::span<const double> demand,
                      std::span<const double> cost) {
  if (supply.empty() || demand.empty())
    throw UsageError("transport problem needs nonempty marginals");
  TransportSimplex solver(supply, demand, cost);
  return solver.solve(nullptr);
}

double transport_plan(std::span<const double> supply,
                      std::span<const double> demand,
                      std::span<const double> cost,
                      std::vector<double>& plan) {
  if (supply.empty() || demand.empty())
    throw UsageError("transport problem needs nonempty marginals");
  TransportSimplex solver(supply, demand, cost);
  return solver.solve(&plan);
}

}  // namespace ruelle::ot
