#include "ruelle/seqspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ruelle/errors.hpp"
#include "ruelle/rng.hpp"

namespace ruelle {

bool TruncatedPoint::same_sequence(const TruncatedPoint& other) const {
  const std::size_t t = std::max(word.size(), other.word.size());
  for (std::size_t n = 0; n < t; ++n)
    if (coord(n) != other.coord(n)) return false;
  return anchor == other.anchor;
}

std::string TruncatedPoint::to_string() const {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i) out << ' ';
    out << word[i];
  }
  out << " | " << anchor << ')';
  return out.str();
}

TruncatedPoint make_point(std::vector<std::uint32_t> word,
                          std::uint32_t anchor) {
  if (word.empty()) throw UsageError("truncated point needs depth >= 1");
  return TruncatedPoint{std::move(word), anchor};
}

TruncatedPoint prepend(std::uint32_t a, const TruncatedPoint& x) {
  TruncatedPoint y;
  y.anchor = x.anchor;
  y.word.resize(x.word.size());
  y.word[0] = a;
  std::copy(x.word.begin(), x.word.end() - 1, y.word.begin() + 1);
  return y;
}

TruncatedPoint shift(const TruncatedPoint& x) {
  TruncatedPoint y;
  y.anchor = x.anchor;
  if (x.word.size() > 1)
    y.word.assign(x.word.begin() + 1, x.word.end());
  else
    y.word.assign(1, x.anchor);
  return y;
}

double metric_dX(const Alphabet& alphabet, const TruncatedPoint& x,
                 const TruncatedPoint& y) {
  const std::size_t t = std::max(x.word.size(), y.word.size());
  double acc = 0.0;
  double halfpow = 1.0;
  for (std::size_t n = 0; n < t; ++n) {
    halfpow *= 0.5;
    const std::uint32_t a = x.coord(n), b = y.coord(n);
    if (a >= alphabet.size() || b >= alphabet.size())
      throw UsageError("point coordinate outside the alphabet");
    if (a != b) acc += halfpow * std::min(alphabet.distance(a, b), 1.0);
  }
  // Constant anchor tail: sum_{n > t} 2^{-n} min(d_E, 1) = 2^{-t} min(d_E,1).
  if (x.anchor != y.anchor)
    acc += halfpow * std::min(alphabet.distance(x.anchor, y.anchor), 1.0);
  return acc;
}

double metric_dbar(const Alphabet& alphabet, const TruncatedPoint& x,
                   const TruncatedPoint& y, double c_f, double alpha) {
  if (c_f < 0.0) throw UsageError("distortion constant must be >= 0");
  if (alpha <= 0.0 || alpha > 1.0)
    throw UsageError("Holder exponent must lie in (0,1]");
  const double d = metric_dX(alphabet, x, y);
  if (d == 0.0) return 0.0;
  return std::min(1.0, 4.0 * c_f * std::pow(d, alpha));
}

namespace {

std::size_t pow_size(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (r > 20'000'000 / base)
      throw UsageError("grid size exceeds the in-memory cap");
    r *= base;
  }
  return r;
}

}  // namespace

GridFunction::GridFunction(std::size_t depth, std::size_t nodes, double init)
    : depth_(depth), nodes_(nodes), values_(pow_size(nodes, depth), init) {
  if (depth < 1) throw UsageError("grid depth must be >= 1");
  if (nodes < 1) throw UsageError("grid needs >= 1 node");
}

GridFunction::GridFunction(std::size_t depth, std::size_t nodes,
                           std::vector<double> values, double holder_alpha)
    : depth_(depth), nodes_(nodes), alpha_(holder_alpha),
      values_(std::move(values)) {
  if (depth < 1) throw UsageError("grid depth must be >= 1");
  if (values_.size() != pow_size(nodes, depth))
    throw UsageError("grid value count must be nodes^depth");
  for (double v : values_)
    if (!std::isfinite(v))
      throw EvaluationError("grid function holds a non-finite value");
}

std::size_t GridFunction::word_index(
    std::span<const std::uint32_t> word) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < depth_; ++i) {
    const std::uint32_t w = i < word.size() ? word[i] : 0;
    idx = idx * nodes_ + w;
  }
  return idx;
}

void GridFunction::index_to_word(std::size_t idx,
                                 std::span<std::uint32_t> out) const {
  for (std::size_t i = depth_; i-- > 0;) {
    out[i] = static_cast<std::uint32_t>(idx % nodes_);
    idx /= nodes_;
  }
}

TruncatedPoint GridFunction::point_at(std::size_t idx,
                                      std::uint32_t anchor) const {
  TruncatedPoint p;
  p.anchor = anchor;
  p.word.resize(depth_);
  index_to_word(idx, p.word);
  return p;
}

double GridFunction::value_at(const TruncatedPoint& x) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < depth_; ++i) idx = idx * nodes_ + x.coord(i);
  return values_[idx];
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

double GridFunction::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double GridFunction::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  if (other.size() != size()) throw UsageError("grid shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double c) {
  for (auto& v : values_) v *= c;
  return *this;
}

GridFunction grid_constant(std::size_t depth, std::size_t nodes, double c) {
  return GridFunction(depth, nodes, c);
}

GridFunction tabulate(std::size_t depth, std::size_t nodes,
                      const std::function<double(const TruncatedPoint&)>& f,
                      std::uint32_t anchor) {
  GridFunction g(depth, nodes);
  TruncatedPoint p;
  p.anchor = anchor;
  p.word.assign(depth, 0);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    g.index_to_word(idx, p.word);
    const double v = f(p);
    if (!std::isfinite(v))
      throw EvaluationError("tabulated function is not finite",
                            p.to_string());
    g[idx] = v;
  }
  return g;
}

GridFunction lift(const GridFunction& f) {
  GridFunction g(f.depth() + 1, f.nodes());
  const std::size_t k = f.nodes();
  for (std::size_t idx = 0; idx < f.size(); ++idx)
    for (std::size_t a = 0; a < k; ++a) g[idx * k + a] = f[idx];
  g.set_holder_alpha(f.holder_alpha());
  return g;
}

GridFunction restrict_depth(const GridFunction& f, std::size_t new_depth,
                            std::uint32_t anchor) {
  if (new_depth > f.depth())
    throw UsageError("restriction target depth exceeds the source depth");
  GridFunction g(new_depth, f.nodes());
  TruncatedPoint p;
  p.anchor = anchor;
  p.word.assign(new_depth, 0);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    g.index_to_word(idx, p.word);
    g[idx] = f.value_at(p);
  }
  g.set_holder_alpha(f.holder_alpha());
  return g;
}

std::size_t effective_cylinder_depth(const GridFunction& f, double tol) {
  const std::size_t k = f.nodes();
  for (std::size_t d = 0; d < f.depth(); ++d) {
    // blocks of indices sharing the first d coordinates
    std::size_t block = f.size();
    for (std::size_t i = 0; i < d; ++i) block /= k;
    bool flat = true;
    for (std::size_t start = 0; start < f.size() && flat; start += block) {
      double lo = f[start], hi = f[start];
      for (std::size_t i = 1; i < block; ++i) {
        lo = std::min(lo, f[start + i]);
        hi = std::max(hi, f[start + i]);
      }
      if (hi - lo > tol) flat = false;
    }
    if (flat) return d;
  }
  return f.depth();
}

double holder_seminorm_estimate(const Alphabet& alphabet,
                                const GridFunction& f, double alpha,
                                std::size_t probe_budget,
                                std::uint32_t anchor) {
  if (probe_budget < 1) throw UsageError("probe budget must be >= 1");
  const std::size_t n = f.size();
  const std::size_t pairs = n * (n - 1) / 2;
  double best = 0.0;
  if (pairs <= probe_budget) {
    // Exhaustive over the grid: exact supremum for the represented cylinder.
    std::vector<TruncatedPoint> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = f.point_at(i, anchor);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = metric_dX(alphabet, pts[i], pts[j]);
        if (d == 0.0) continue;
        best = std::max(best,
                        std::fabs(f[i] - f[j]) / std::pow(d, alpha));
      }
    return best;
  }
  Rng rng(0x9a77c0de ^ n);
  for (std::size_t k = 0; k < probe_budget; ++k) {
    const std::size_t i = static_cast<std::size_t>(rng.next_u64() % n);
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % n);
    if (i == j) continue;
    const TruncatedPoint a = f.point_at(i, anchor);
    const TruncatedPoint b = f.point_at(j, anchor);
    const double d = metric_dX(alphabet, a, b);
    if (d == 0.0) continue;
    best = std::max(best, std::fabs(f[i] - f[j]) / std::pow(d, alpha));
  }
  return best;
}

double holder_seminorm_estimate(
    const Alphabet& alphabet,
    const std::function<double(const TruncatedPoint&)>& f, double alpha,
    std::size_t probe_budget, std::size_t depth, std::uint32_t anchor,
    std::uint64_t seed) {
  if (probe_budget < 1) throw UsageError("probe budget must be >= 1");
  const std::size_t k = alphabet.size();
  std::size_t n = 1;
  bool overflow = false;
  for (std::size_t i = 0; i < depth && !overflow; ++i) {
    if (n > probe_budget * 4) overflow = true;
    n *= k;
  }
  if (!overflow && n * (n - 1) / 2 <= probe_budget) {
    GridFunction g = tabulate(depth, k, f, anchor);
    return holder_seminorm_estimate(alphabet, g, alpha, probe_budget, anchor);
  }
  // Random probing with a fixed stream: growing the budget extends the same
  // probe sequence, so the estimate is monotone in the budget.
  Rng rng(seed);
  TruncatedPoint x, y;
  x.anchor = y.anchor = anchor;
  x.word.assign(depth, 0);
  y.word.assign(depth, 0);
  double best = 0.0;
  for (std::size_t it = 0; it < probe_budget; ++it) {
    for (std::size_t i = 0; i < depth; ++i) {
      x.word[i] = static_cast<std::uint32_t>(rng.next_u64() % k);
      y.word[i] = static_cast<std::uint32_t>(rng.next_u64() % k);
    }
    const double d = metric_dX(alphabet, x, y);
    if (d == 0.0) continue;
    best = std::max(best, std::fabs(f(x) - f(y)) / std::pow(d, alpha));
  }
  return best;
}

}  // namespace ruelle
