#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ruelle/alphabet.hpp"

namespace ruelle {

/// A point of the sequence space E^N at finite resolution: a word of node
/// indices extended to an infinite sequence by repeating the anchor node.
struct TruncatedPoint {
  std::vector<std::uint32_t> word;  // depth = word.size(), >= 1
  std::uint32_t anchor = 0;

  std::size_t depth() const { return word.size(); }
  // n-th coordinate of the induced infinite sequence (0-based).
  std::uint32_t coord(std::size_t n) const {
    return n < word.size() ? word[n] : anchor;
  }
  bool same_sequence(const TruncatedPoint& other) const;
  std::string to_string() const;
};

TruncatedPoint make_point(std::vector<std::uint32_t> word,
                          std::uint32_t anchor = 0);

// ax = (a, x_1, x_2, ...): prepends a and drops the last word entry, so the
// depth stays fixed; the dropped coordinate is absorbed by the anchor tail.
TruncatedPoint prepend(std::uint32_t a, const TruncatedPoint& x);

// Left shift; the depth-1 case degrades to the constant anchor sequence.
TruncatedPoint shift(const TruncatedPoint& x);

// d_X(x,y) = sum_n 2^{-n} min(d_E(x_n,y_n), 1), summed exactly: finitely
// many word terms plus the closed-form constant anchor tail.
double metric_dX(const Alphabet& alphabet, const TruncatedPoint& x,
                 const TruncatedPoint& y);

// Bounded equivalent metric min{1, 4 c_f d_X(x,y)^alpha}, zero on the
// diagonal. (A literal reading of its definition would make it >= 1
// everywhere; the cap-at-1 form is the one that has finite diameter and
// works as a Wasserstein ground metric.)
double metric_dbar(const Alphabet& alphabet, const TruncatedPoint& x,
                   const TruncatedPoint& y, double c_f, double alpha);

/// Values of a depth-N cylinder function on the tensor grid of alphabet
/// nodes; the computational stand-in for a Holder function. Word indices are
/// mixed-radix row-major: index(w) = sum_i w_i * k^(N-1-i).
class GridFunction {
 public:
  GridFunction(std::size_t depth, std::size_t nodes, double init = 0.0);
  GridFunction(std::size_t depth, std::size_t nodes,
               std::vector<double> values, double holder_alpha = 1.0);

  std::size_t depth() const { return depth_; }
  std::size_t nodes() const { return nodes_; }
  std::size_t size() const { return values_.size(); }
  double holder_alpha() const { return alpha_; }
  void set_holder_alpha(double a) { alpha_ = a; }

  double& operator[](std::size_t idx) { return values_[idx]; }
  double operator[](std::size_t idx) const { return values_[idx]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  std::size_t word_index(std::span<const std::uint32_t> word) const;
  void index_to_word(std::size_t idx, std::span<std::uint32_t> out) const;
  TruncatedPoint point_at(std::size_t idx, std::uint32_t anchor = 0) const;

  // Cylinder evaluation at any truncated point: reads the first `depth`
  // induced coordinates.
  double value_at(const TruncatedPoint& x) const;

  double sup_norm() const;
  double min_value() const;
  double max_value() const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator*=(double c);

 private:
  std::size_t depth_, nodes_;
  double alpha_ = 1.0;
  std::vector<double> values_;
};

GridFunction grid_constant(std::size_t depth, std::size_t nodes, double c);

// Builds a grid function by evaluating f at every grid word (anchor tail).
GridFunction tabulate(std::size_t depth, std::size_t nodes,
                      const std::function<double(const TruncatedPoint&)>& f,
                      std::uint32_t anchor = 0);

// Depth N -> N+1 lift (cylinder inclusion) and its left inverse.
GridFunction lift(const GridFunction& f);
GridFunction restrict_depth(const GridFunction& f, std::size_t new_depth,
                            std::uint32_t anchor = 0);

// Smallest d such that f varies by at most tol within every depth-d
// cylinder block (0 for constants). Numerical eigenfunctions of shallow
// potentials are shallow up to iteration noise; this recovers that depth.
std::size_t effective_cylinder_depth(const GridFunction& f, double tol);

// Lower bound on the Holder seminorm D_alpha over grid pairs: exhaustive
// when the pair count fits the budget, deterministic random probing
// otherwise. Monotone in probe_budget.
double holder_seminorm_estimate(const Alphabet& alphabet,
                                const GridFunction& f, double alpha,
                                std::size_t probe_budget,
                                std::uint32_t anchor = 0);

// Same estimate for an arbitrary evaluator probed at the given depth.
double holder_seminorm_estimate(
    const Alphabet& alphabet,
    const std::function<double(const TruncatedPoint&)>& f, double alpha,
    std::size_t probe_budget, std::size_t depth, std::uint32_t anchor = 0,
    std::uint64_t seed = 0x51e9u);

}  // namespace ruelle
