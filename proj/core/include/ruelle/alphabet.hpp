#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ruelle/rng.hpp"

namespace ruelle {

enum class AlphabetKind { finite, real_line, circle };

/// A discretized alphabet: a finite node set carrying the metric d_E and,
/// for continuous kinds, the coordinates of the quadrature nodes. Continuous
/// alphabets are represented by their quadrature grid, so that downstream
/// operator applications become finite weighted sums.
class Alphabet {
 public:
  // Finite alphabet with the discrete metric d(a,b) = 1 for a != b.
  static Alphabet finite(std::size_t node_count);
  // Finite alphabet with explicit pairwise distances (symmetric, zero
  // diagonal, triangle inequality spot-checked).
  static Alphabet finite(std::size_t node_count,
                         std::vector<std::vector<double>> distances);
  // Gauss-Hermite grid for R^d under the standard normal; `order` nodes per
  // dimension, node count order^d. Euclidean metric on node coordinates.
  static Alphabet real_line(int dimension, int order);
  // Equally spaced angles on the unit circle, geodesic (arc) metric.
  static Alphabet circle(std::size_t node_count);

  AlphabetKind kind() const { return kind_; }
  std::size_t size() const { return size_; }
  int dimension() const { return dimension_; }

  // d_E between nodes.
  double distance(std::size_t a, std::size_t b) const {
    return distances_[a * size_ + b];
  }
  // Embedding of node a (empty span for label-only finite alphabets).
  std::span<const double> coords(std::size_t a) const {
    if (coords_.empty()) return {};
    return {coords_.data() + a * dimension_,
            static_cast<std::size_t>(dimension_)};
  }
  bool has_coords() const { return !coords_.empty(); }

  bool operator==(const Alphabet& other) const {
    return kind_ == other.kind_ && size_ == other.size_ &&
           dimension_ == other.dimension_ && distances_ == other.distances_;
  }

 private:
  Alphabet() = default;
  AlphabetKind kind_ = AlphabetKind::finite;
  std::size_t size_ = 0;
  int dimension_ = 1;
  std::vector<double> distances_;  // size_ x size_, row-major
  std::vector<double> coords_;     // size_ x dimension_, row-major
};

/// Nodes and weights of a quadrature rule against the standard normal
/// density (probabilists' normalization: weights sum to 1, integrates
/// polynomials of degree <= 2*order - 1 exactly).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_hermite_rule(int order);

/// The a priori measure p on a discretized alphabet: nonnegative node
/// weights summing to 1. Exact weights for finite alphabets, Gauss-Hermite
/// weights for real-line grids, uniform weights for the circle (periodic
/// trapezoid rule).
class AprioriMeasure {
 public:
  static AprioriMeasure uniform(Alphabet alphabet);
  static AprioriMeasure exact(Alphabet alphabet, std::vector<double> weights);
  // Builds both the grid alphabet and the Gauss-Hermite weights.
  static AprioriMeasure gauss_hermite(int dimension, int order);

  const Alphabet& alphabet() const { return *alphabet_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t a) const { return weights_[a]; }

  // Integral of a node function: sum_a w_a g(a). Linear and positive;
  // throws EvaluationError naming the node if g is non-finite there.
  double integrate(const std::function<double(std::size_t)>& g) const;

  // One draw from p by CDF inversion; deterministic given the rng state.
  std::size_t sample(Rng& rng) const;

 private:
  AprioriMeasure(Alphabet a, std::vector<double> w);
  std::shared_ptr<const Alphabet> alphabet_;
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

}  // namespace ruelle
