// Brute-force oracles kept independent of the library implementation paths
// they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracles {

// --------------------------------------------------------------------------
// Dense matrix helpers (row-major) for transfer-matrix cross-checks.

using Matrix = std::vector<std::vector<double>>;

inline std::vector<double> mat_vec(const Matrix& m,
                                   const std::vector<double>& v) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

inline std::vector<double> mat_pow_vec(const Matrix& m, std::vector<double> v,
                                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v = mat_vec(m, v);
  return v;
}

// Perron data of a 2x2 positive matrix, closed form.
struct Perron2 {
  double lambda;
  double lambda2;
  std::vector<double> right;  // unnormalized
  std::vector<double> left;   // unnormalized
};

inline Perron2 perron_2x2(const Matrix& m) {
  const double tr = m[0][0] + m[1][1];
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double disc = std::sqrt(tr * tr / 4.0 - det);
  Perron2 p;
  p.lambda = tr / 2.0 + disc;
  p.lambda2 = tr / 2.0 - disc;
  p.right = {m[0][1], p.lambda - m[0][0]};
  p.left = {m[1][0], p.lambda - m[0][0]};
  return p;
}

// --------------------------------------------------------------------------
// Exhaustive vertex oracle for the transportation polytope: every vertex is
// the unique flow on some spanning tree of K_{m,n}; enumerate all edge
// subsets of size m+n-1, keep the feasible trees, minimize the cost.

inline double transport_vertex_oracle(const std::vector<double>& supply,
                                      const std::vector<double>& demand,
                                      const std::vector<double>& cost) {
  const std::size_t m = supply.size(), n = demand.size();
  const std::size_t edges = m * n;
  const std::size_t need = m + n - 1;
  if (edges > 20) throw std::invalid_argument("oracle limited to tiny instances");

  std::vector<std::size_t> pick(need);
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();

  const auto evaluate = [&]() {
    // Solve the tree flow by repeated leaf elimination.
    std::vector<double> s = supply, d = demand;
    std::vector<std::pair<std::size_t, std::size_t>> arcs;
    arcs.reserve(need);
    for (std::size_t e : pick) arcs.emplace_back(e / n, e % n);
    std::vector<int> row_deg(m, 0), col_deg(n, 0);
    for (auto [i, j] : arcs) {
      ++row_deg[i];
      ++col_deg[j];
    }
    std::vector<char> used(need, 0);
    double total = 0.0;
    for (std::size_t round = 0; round < need; ++round) {
      bool progressed = false;
      for (std::size_t e = 0; e < need && !progressed; ++e) {
        if (used[e]) continue;
        auto [i, j] = arcs[e];
        double flow;
        if (row_deg[i] == 1) {
          flow = s[i];
        } else if (col_deg[j] == 1) {
          flow = d[j];
        } else {
          continue;
        }
        if (flow < -1e-12) return;  // infeasible vertex
        s[i] -= flow;
        d[j] -= flow;
        --row_deg[i];
        --col_deg[j];
        used[e] = 1;
        total += flow * cost[i * n + j];
        progressed = true;
      }
      if (!progressed) return;  // not a spanning tree (cycle or disconnected)
    }
    for (double v : s)
      if (std::fabs(v) > 1e-9) return;
    for (double v : d)
      if (std::fabs(v) > 1e-9) return;
    best = std::min(best, total);
  };

  while (true) {
    evaluate();
    // next combination
    std::size_t i = need;
    while (i > 0 && pick[i - 1] == edges - need + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < need; ++j) pick[j] = pick[j - 1] + 1;
  }
  if (!std::isfinite(best))
    throw std::runtime_error("vertex oracle found no feasible tree");
  return best;
}

// One-dimensional W1 with |x - y| ground cost: integral of |F - G| between
// the two CDFs; an independent closed-form check for line instances.
inline double w1_line_oracle(std::vector<std::pair<double, double>> mu,
                             std::vector<std::pair<double, double>> nu) {
  std::sort(mu.begin(), mu.end());
  std::sort(nu.begin(), nu.end());
  std::vector<double> xs;
  for (auto [x, w] : mu) xs.push_back(x);
  for (auto [x, w] : nu) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double x = xs[i];
    double f = 0.0, g = 0.0;
    for (auto [xx, w] : mu)
      if (xx <= x) f += w;
    for (auto [xx, w] : nu)
      if (xx <= x) g += w;
    total += std::fabs(f - g) * (xs[i + 1] - xs[i]);
  }
  return total;
}

}  // namespace oracles
