#include "ruelle/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruelle/errors.hpp"

namespace ruelle::paths {

PolygonalPath sample_path(int dimension, int segments, Rng& rng) {
  if (dimension < 1) throw UsageError("path dimension must be >= 1");
  if (segments < 2) throw UsageError("a path needs >= 2 vertices");
  PolygonalPath p;
  p.dimension = dimension;
  p.coords.resize(static_cast<std::size_t>(segments) *
                  static_cast<std::size_t>(dimension));
  for (auto& c : p.coords) c = rng.normal();
  return p;
}

std::vector<double> path_point(const PolygonalPath& path, double t) {
  const std::size_t l = path.vertex_count();
  if (l < 2) throw UsageError("a path needs >= 2 vertices");
  if (t < 1.0 || t > static_cast<double>(l))
    throw UsageError("path parameter outside [1, L]");
  // Segment [m, m+1] with local coordinate s = t - m.
  std::size_t m = static_cast<std::size_t>(std::floor(t));
  if (m >= l) m = l - 1;  // t == L
  const double s = t - static_cast<double>(m);
  const auto q0 = path.vertex(m - 1);
  const auto q1 = path.vertex(m);
  std::vector<double> out(static_cast<std::size_t>(path.dimension));
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = (1.0 - s) * q0[j] + s * q1[j];
  return out;
}

namespace {

double point_segment_distance(std::span<const double> p,
                              std::span<const double> a,
                              std::span<const double> b) {
  double dot = 0.0, len2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double seg = b[j] - a[j];
    dot += (p[j] - a[j]) * seg;
    len2 += seg * seg;
  }
  const double t = len2 > 0.0 ? std::clamp(dot / len2, 0.0, 1.0) : 0.0;
  double dist2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double diff = p[j] - (a[j] + t * (b[j] - a[j]));
    dist2 += diff * diff;
  }
  return std::sqrt(dist2);
}

double point_path_distance(std::span<const double> p,
                           const PolygonalPath& path) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t l = path.vertex_count();
  for (std::size_t m = 0; m + 1 < l; ++m)
    best = std::min(best, point_segment_distance(p, path.vertex(m),
                                                 path.vertex(m + 1)));
  return best;
}

double directed_hausdorff(const PolygonalPath& from, const PolygonalPath& to,
                          int resolution) {
  const std::size_t l = from.vertex_count();
  const std::size_t dim = static_cast<std::size_t>(from.dimension);
  std::vector<double> p(dim);
  double sup = 0.0;
  for (std::size_t m = 0; m + 1 < l; ++m) {
    const auto a = from.vertex(m);
    const auto b = from.vertex(m + 1);
    for (int i = 0; i <= resolution; ++i) {
      const double s =
          static_cast<double>(i) / static_cast<double>(resolution);
      for (std::size_t j = 0; j < dim; ++j)
        p[j] = (1.0 - s) * a[j] + s * b[j];
      sup = std::max(sup, point_path_distance(p, to));
    }
  }
  return sup;
}

}  // namespace

double hausdorff_distance(const PolygonalPath& a, const PolygonalPath& b,
                          int resolution) {
  if (a.dimension != b.dimension)
    throw UsageError("paths live in different dimensions");
  if (a.vertex_count() != b.vertex_count())
    throw UsageError("paths cover different time windows");
  if (resolution < 2) throw UsageError("resolution must be >= 2");
  // Exact zero for identical paths; sampling noise through a fractional
  // power would otherwise inflate self-distances.
  if (a.coords == b.coords) return 0.0;
  return std::max(directed_hausdorff(a, b, resolution),
                  directed_hausdorff(b, a, resolution));
}

PathPotential::PathPotential(double j0, double ratio, double alpha, int terms,
                             int resolution)
    : j0_(j0), ratio_(ratio), alpha_(alpha), terms_(terms),
      resolution_(resolution) {
  if (j0 < 0.0) throw UsageError("interaction strength must be >= 0");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw UsageError("interaction ratio must lie in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw UsageError("Hausdorff exponent must lie in (0,1)");
  if (terms < 1) throw UsageError("need at least one interaction term");
  const double tail =
      j0 * std::pow(ratio, static_cast<double>(terms + 1)) / (1.0 - ratio);
  if (tail >= 1e-9)
    throw UsageError(
        "interaction truncated too early: tail bound " + std::to_string(tail) +
        " >= 1e-9, raise the term count");
}

double PathPotential::operator()(
    std::span<const PolygonalPath> sequence) const {
  if (sequence.empty()) throw UsageError("empty path sequence");
  const PolygonalPath& first = sequence.front();
  double acc = 0.0;
  double jn = j0_;
  for (int n = 1; n <= terms_; ++n) {
    jn *= ratio_;
    // Sequences shorter than the truncation window repeat their last path.
    const PolygonalPath& gn =
        sequence[std::min<std::size_t>(static_cast<std::size_t>(n) - 1,
                                       sequence.size() - 1)];
    const double dh = hausdorff_distance(first, gn, resolution_);
    if (dh > 0.0) {
      const double da = std::pow(dh, alpha_);
      acc += jn * da / (1.0 + da);
    }
  }
  return -acc;
}

double PathPotential::lower_bound() const {
  return -j0_ * ratio_ / (1.0 - ratio_);
}

GaussianPathMeasure::GaussianPathMeasure(int dimension, int segments,
                                         int sample_count, std::uint64_t seed)
    : dimension_(dimension), segments_(segments), sample_count_(sample_count),
      seed_(seed) {
  if (dimension < 1) throw UsageError("path dimension must be >= 1");
  if (segments < 2) throw UsageError("a path needs >= 2 vertices");
  if (sample_count < 1) throw UsageError("sample count must be >= 1");
}

PolygonalPath GaussianPathMeasure::sample(Rng& rng) const {
  return sample_path(dimension_, segments_, rng);
}

double GaussianPathMeasure::integrate(
    const std::function<double(const PolygonalPath&)>& g) const {
  Rng rng(seed_);
  double acc = 0.0;
  for (int i = 0; i < sample_count_; ++i) {
    const double v = g(sample(rng));
    if (!std::isfinite(v))
      throw EvaluationError("path integrand is not finite",
                            "sample " + std::to_string(i));
    acc += v;
  }
  return acc / static_cast<double>(sample_count_);
}

McEstimate mc_apply(
    const PathPotential& f,
    const std::function<double(std::span<const PolygonalPath>)>& phi,
    std::span<const PolygonalPath> x, const GaussianPathMeasure& measure,
    int sample_count, std::uint64_t seed) {
  if (sample_count < 100)
    throw UsageError("mc_apply needs >= 100 samples");
  if (x.empty()) throw UsageError("mc_apply needs a nonempty state");
  Rng rng(seed);
  std::vector<PolygonalPath> extended;
  extended.reserve(x.size() + 1);
  extended.emplace_back();  // slot for the fresh draw
  extended.insert(extended.end(), x.begin(), x.end());

  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < sample_count; ++i) {
    extended[0] = measure.sample(rng);
    const double term =
        std::exp(f(extended)) * phi(extended);
    if (!std::isfinite(term))
      throw EvaluationError("mc_apply summand is not finite",
                            "sample " + std::to_string(i));
    sum += term;
    sum_sq += term * term;
  }
  const double n = static_cast<double>(sample_count);
  McEstimate est;
  est.value = sum / n;
  const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
  est.stderr_value = std::sqrt(var / n);
  return est;
}

}  // namespace ruelle::paths
