#include "ruelle/alphabet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ruelle/errors.hpp"

namespace ruelle {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_metric(const std::vector<double>& d, std::size_t k) {
  for (std::size_t a = 0; a < k; ++a) {
    if (d[a * k + a] != 0.0)
      throw UsageError("alphabet metric must vanish on the diagonal");
    for (std::size_t b = 0; b < k; ++b) {
      const double v = d[a * k + b];
      if (!std::isfinite(v) || v < 0.0)
        throw UsageError("alphabet distances must be finite and nonnegative");
      if (v != d[b * k + a])
        throw UsageError("alphabet metric must be symmetric");
    }
  }
  // Triangle inequality on all triples; alphabets are small enough for the
  // cubic check at construction time.
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      for (std::size_t c = 0; c < k; ++c)
        if (d[a * k + b] > d[a * k + c] + d[c * k + b] + 1e-12)
          throw UsageError("alphabet metric violates the triangle inequality");
}

std::vector<double> euclidean_distances(const std::vector<double>& coords,
                                        std::size_t k, int dim) {
  std::vector<double> d(k * k, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) {
        const double diff = coords[a * dim + j] - coords[b * dim + j];
        s += diff * diff;
      }
      d[a * k + b] = d[b * k + a] = std::sqrt(s);
    }
  return d;
}

}  // namespace

Alphabet Alphabet::finite(std::size_t node_count) {
  if (node_count < 1) throw UsageError("finite alphabet needs >= 1 node");
  Alphabet a;
  a.kind_ = AlphabetKind::finite;
  a.size_ = node_count;
  a.dimension_ = 1;
  a.distances_.assign(node_count * node_count, 1.0);
  for (std::size_t i = 0; i < node_count; ++i)
    a.distances_[i * node_count + i] = 0.0;
  return a;
}

Alphabet Alphabet::finite(std::size_t node_count,
                          std::vector<std::vector<double>> distances) {
  if (node_count < 1) throw UsageError("finite alphabet needs >= 1 node");
  if (distances.size() != node_count)
    throw UsageError("distance matrix size does not match node count");
  Alphabet a;
  a.kind_ = AlphabetKind::finite;
  a.size_ = node_count;
  a.dimension_ = 1;
  a.distances_.resize(node_count * node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    if (distances[i].size() != node_count)
      throw UsageError("distance matrix must be square");
    std::copy(distances[i].begin(), distances[i].end(),
              a.distances_.begin() + static_cast<std::ptrdiff_t>(i * node_count));
  }
  check_metric(a.distances_, node_count);
  return a;
}

Alphabet Alphabet::real_line(int dimension, int order) {
  if (dimension < 1) throw UsageError("real-line alphabet needs dimension >= 1");
  if (order < 1) throw UsageError("quadrature order must be >= 1");
  const QuadratureRule rule = gauss_hermite_rule(order);
  std::size_t k = 1;
  for (int j = 0; j < dimension; ++j) k *= static_cast<std::size_t>(order);
  if (k > 2'000'000)
    throw UsageError("tensor quadrature grid too large; lower the order");

  Alphabet a;
  a.kind_ = AlphabetKind::real_line;
  a.size_ = k;
  a.dimension_ = dimension;
  a.coords_.resize(k * static_cast<std::size_t>(dimension));
  // Tensor grid in row-major digit order: node index = sum_j digit_j *
  // order^(dimension-1-j).
  for (std::size_t idx = 0; idx < k; ++idx) {
    std::size_t rem = idx;
    for (int j = dimension - 1; j >= 0; --j) {
      a.coords_[idx * static_cast<std::size_t>(dimension) +
                static_cast<std::size_t>(j)] =
          rule.nodes[rem % static_cast<std::size_t>(order)];
      rem /= static_cast<std::size_t>(order);
    }
  }
  a.distances_ = euclidean_distances(a.coords_, k, dimension);
  return a;
}

Alphabet Alphabet::circle(std::size_t node_count) {
  if (node_count < 1) throw UsageError("circle alphabet needs >= 1 node");
  Alphabet a;
  a.kind_ = AlphabetKind::circle;
  a.size_ = node_count;
  a.dimension_ = 1;
  a.coords_.resize(node_count);
  for (std::size_t i = 0; i < node_count; ++i)
    a.coords_[i] = 2.0 * kPi * static_cast<double>(i) /
                   static_cast<double>(node_count);
  a.distances_.resize(node_count * node_count);
  for (std::size_t i = 0; i < node_count; ++i)
    for (std::size_t j = 0; j < node_count; ++j) {
      const double gap = std::fabs(a.coords_[i] - a.coords_[j]);
      a.distances_[i * node_count + j] = std::min(gap, 2.0 * kPi - gap);
    }
  return a;
}

QuadratureRule gauss_hermite_rule(int order) {
  if (order < 1) throw UsageError("quadrature order must be >= 1");
  const std::size_t n = static_cast<std::size_t>(order);
  // Physicists' Gauss-Hermite via Newton iteration on H_n (Numerical
  // Recipes style), then rescaled to the standard normal weight:
  // x_normal = sqrt(2) t, w_normal = w / sqrt(pi).
  std::vector<double> t(n), w(n);
  const double eps = 1e-15;
  const std::size_t m = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(static_cast<double>(2 * n + 1)) -
          1.85575 * std::pow(static_cast<double>(2 * n + 1), -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * t[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * t[1];
    } else {
      z = 2.0 * z - t[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Recurrence for orthonormal Hermite functions.
      double p1 = 0.7511255444649425;  // pi^{-1/4}
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / static_cast<double>(j + 1)) * p2 -
             std::sqrt(static_cast<double>(j) / static_cast<double>(j + 1)) *
                 p3;
      }
      pp = std::sqrt(2.0 * static_cast<double>(n)) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= eps) break;
    }
    t[i] = z;
    t[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  // t holds roots in descending order for the first half; sort ascending.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double sqrt2 = std::sqrt(2.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = sqrt2 * t[perm[i]];
    rule.weights[i] = w[perm[i]];
    total += rule.weights[i];
  }
  // Normalize exactly to a probability rule (total is sqrt(pi) up to
  // rounding; dividing by the computed sum keeps sum w = 1 to machine
  // precision).
  for (auto& wi : rule.weights) wi /= total;
  return rule;
}

AprioriMeasure::AprioriMeasure(Alphabet a, std::vector<double> w)
    : alphabet_(std::make_shared<const Alphabet>(std::move(a))),
      weights_(std::move(w)) {
  if (weights_.size() != alphabet_->size())
    throw UsageError("weight count does not match alphabet size");
  double total = 0.0;
  for (double wi : weights_) {
    if (!std::isfinite(wi) || wi < 0.0)
      throw UsageError("a priori weights must be finite and nonnegative");
    total += wi;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw UsageError("a priori weights must sum to 1 within 1e-12");
  cdf_.resize(weights_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    acc += weights_[i];
    cdf_[i] = acc;
  }
  cdf_.back() = 1.0;
}

AprioriMeasure AprioriMeasure::uniform(Alphabet alphabet) {
  const std::size_t k = alphabet.size();
  std::vector<double> w(k, 1.0 / static_cast<double>(k));
  return AprioriMeasure(std::move(alphabet), std::move(w));
}

AprioriMeasure AprioriMeasure::exact(Alphabet alphabet,
                                     std::vector<double> weights) {
  return AprioriMeasure(std::move(alphabet), std::move(weights));
}

AprioriMeasure AprioriMeasure::gauss_hermite(int dimension, int order) {
  Alphabet a = Alphabet::real_line(dimension, order);
  const QuadratureRule rule = gauss_hermite_rule(order);
  const std::size_t k = a.size();
  std::vector<double> w(k, 1.0);
  for (std::size_t idx = 0; idx < k; ++idx) {
    std::size_t rem = idx;
    for (int j = dimension - 1; j >= 0; --j) {
      w[idx] *= rule.weights[rem % static_cast<std::size_t>(order)];
      rem /= static_cast<std::size_t>(order);
    }
  }
  // Renormalize the tensor product against rounding drift.
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& wi : w) wi /= total;
  return AprioriMeasure(std::move(a), std::move(w));
}

double AprioriMeasure::integrate(
    const std::function<double(std::size_t)>& g) const {
  double acc = 0.0;
  for (std::size_t a = 0; a < weights_.size(); ++a) {
    const double v = g(a);
    if (!std::isfinite(v))
      throw EvaluationError("integrand is not finite",
                            "node " + std::to_string(a));
    acc += weights_[a] * v;
  }
  return acc;
}

std::size_t AprioriMeasure::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::size_t>(it - cdf_.begin());
}

}  // namespace ruelle
