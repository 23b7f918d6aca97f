#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ruelle/rng.hpp"

namespace ruelle::paths {

/// Polygonal path in R^d: vertices q_1..q_L, extended to gamma(t) on [1, L]
/// by linear interpolation along each segment.
struct PolygonalPath {
  int dimension = 1;
  std::vector<double> coords;  // L x d, row-major

  std::size_t vertex_count() const {
    return coords.size() / static_cast<std::size_t>(dimension);
  }
  std::span<const double> vertex(std::size_t n) const {  // 0-based
    return {coords.data() + n * static_cast<std::size_t>(dimension),
            static_cast<std::size_t>(dimension)};
  }
};

// Vertices iid standard normal; deterministic per rng state.
PolygonalPath sample_path(int dimension, int segments, Rng& rng);

// gamma(t) for t in [1, L]; gamma(n) = q_n at integer times.
std::vector<double> path_point(const PolygonalPath& path, double t);

// Hausdorff distance between two paths over the same window. Each directed
// sup is taken over `resolution` samples per source segment with the exact
// point-to-segment distance on the target side; the sampling error is
// bounded by (max segment length) / resolution.
double hausdorff_distance(const PolygonalPath& a, const PolygonalPath& b,
                          int resolution);

/// Interaction potential on path sequences:
///   f(g_1, g_2, ...) = -sum_{n=1..terms} j0 r^n d_H^alpha(g_1, g_n)
///                                        / (1 + d_H^alpha(g_1, g_n)).
/// Values lie in [-j0 r/(1-r), 0]; `terms` must make the dropped tail
/// j0 r^{terms+1}/(1-r) smaller than 1e-9.
class PathPotential {
 public:
  PathPotential(double j0, double ratio, double alpha, int terms,
                int resolution = 256);

  double operator()(std::span<const PolygonalPath> sequence) const;

  double lower_bound() const;  // -j0 r/(1-r)
  double j0() const { return j0_; }
  double ratio() const { return ratio_; }
  double alpha() const { return alpha_; }
  int terms() const { return terms_; }
  int resolution() const { return resolution_; }

 private:
  double j0_, ratio_, alpha_;
  int terms_, resolution_;
};

/// The a priori measure on path space: the pushforward of the product of
/// standard Gaussians under the interpolation map. Expectations are seeded
/// Monte Carlo averages over `sample_count` draws.
class GaussianPathMeasure {
 public:
  GaussianPathMeasure(int dimension, int segments, int sample_count,
                      std::uint64_t seed);

  int dimension() const { return dimension_; }
  int segments() const { return segments_; }
  int sample_count() const { return sample_count_; }

  PolygonalPath sample(Rng& rng) const;
  double integrate(
      const std::function<double(const PolygonalPath&)>& g) const;

 private:
  int dimension_, segments_, sample_count_;
  std::uint64_t seed_;
};

/// Monte Carlo estimate of the transfer operator on path space:
/// mean over fresh first-path draws of e^{f(g x)} phi(g x), with the
/// standard error of the mean.
struct McEstimate {
  double value = 0.0;
  double stderr_value = 0.0;
};
McEstimate mc_apply(
    const PathPotential& f,
    const std::function<double(std::span<const PolygonalPath>)>& phi,
    std::span<const PolygonalPath> x, const GaussianPathMeasure& measure,
    int sample_count, std::uint64_t seed);

}  // namespace ruelle::paths
