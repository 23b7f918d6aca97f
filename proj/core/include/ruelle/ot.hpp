#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ruelle::ot {

/// Exact optimal transport cost between two discrete distributions over a
/// dense cost matrix (row-major, rows = supply atoms, cols = demand atoms).
/// Solved by a transportation (network) simplex on the bipartite graph;
/// terminates at a vertex of the transport polytope, so the value matches
/// brute-force vertex enumeration up to rounding.
///
/// supply and demand must be nonnegative with equal totals (the last demand
/// entry is nudged to balance rounding drift; a mismatch above 1e-9 throws).
double transport_cost(std::span<const double> supply,
                      std::span<const double> demand,
                      std::span<const double> cost);

/// Same, also returning the optimal plan (row-major, size m*n). Intended for
/// diagnostics and tests; the plan is a tree solution (at most m+n-1
/// nonzeros).
double transport_plan(std::span<const double> supply,
                      std::span<const double> demand,
                      std::span<const double> cost,
                      std::vector<double>& plan);

}  // namespace ruelle::ot
