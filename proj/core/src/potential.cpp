#include "ruelle/potential.hpp"

#include <cmath>

#include "ruelle/errors.hpp"
#include "ruelle/rng.hpp"

namespace ruelle {

Potential::Potential(std::string name, Evaluator eval,
                     std::size_t declared_depth, double holder_alpha,
                     double sup_bound, std::map<std::string, double> params)
    : impl_(std::make_shared<const Impl>(Impl{
          std::move(name), std::move(eval), declared_depth, holder_alpha,
          sup_bound, std::move(params)})) {
  if (holder_alpha <= 0.0 || holder_alpha > 1.0)
    throw UsageError("potential Holder exponent must lie in (0,1]");
  if (!(sup_bound >= 0.0) || !std::isfinite(sup_bound))
    throw UsageError("potential sup bound must be finite and >= 0");
}

double Potential::operator()(const TruncatedPoint& x) const {
  const double v = impl_->eval(x);
  if (!std::isfinite(v))
    throw EvaluationError("potential value is not finite", x.to_string());
  return v;
}

Potential constant_potential(double c) {
  if (!std::isfinite(c)) throw UsageError("constant potential must be finite");
  return Potential("constant", [c](const TruncatedPoint&) { return c; }, 1,
                   1.0, std::fabs(c), {{"value", c}});
}

Potential first_coordinate_potential(std::vector<double> values,
                                     double holder_alpha) {
  if (values.empty()) throw UsageError("first-coordinate table is empty");
  double bound = 0.0;
  for (double v : values) {
    if (!std::isfinite(v))
      throw UsageError("first-coordinate table holds a non-finite entry");
    bound = std::max(bound, std::fabs(v));
  }
  auto table = std::make_shared<const std::vector<double>>(std::move(values));
  return Potential(
      "first-coordinate",
      [table](const TruncatedPoint& x) { return (*table)[x.coord(0)]; }, 1,
      holder_alpha, bound);
}

Potential two_coordinate_potential(std::vector<std::vector<double>> matrix,
                                   double holder_alpha) {
  if (matrix.empty()) throw UsageError("two-coordinate matrix is empty");
  const std::size_t k = matrix.size();
  double bound = 0.0;
  for (const auto& row : matrix) {
    if (row.size() != k)
      throw UsageError("two-coordinate matrix must be square");
    for (double v : row) {
      if (!std::isfinite(v))
        throw UsageError("two-coordinate matrix holds a non-finite entry");
      bound = std::max(bound, std::fabs(v));
    }
  }
  auto a = std::make_shared<const std::vector<std::vector<double>>>(
      std::move(matrix));
  return Potential(
      "two-coordinate",
      [a](const TruncatedPoint& x) { return (*a)[x.coord(0)][x.coord(1)]; },
      2, holder_alpha, bound);
}

Potential quadratic_potential(const Alphabet& alphabet, double coeff) {
  if (!alphabet.has_coords())
    throw UsageError("quadratic potential needs a coordinate embedding");
  std::vector<double> values(alphabet.size());
  for (std::size_t a = 0; a < alphabet.size(); ++a) {
    double s = 0.0;
    for (double c : alphabet.coords(a)) s += c * c;
    values[a] = coeff * s;
  }
  Potential p = first_coordinate_potential(std::move(values));
  return Potential("quadratic", [p](const TruncatedPoint& x) { return p(x); },
                   1, 1.0, p.sup_bound(), {{"coeff", coeff}});
}

namespace {

std::size_t long_range_terms(double j0, double ratio, double gmax) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw UsageError("long-range ratio must lie in (0,1)");
  if (j0 < 0.0) throw UsageError("long-range strength must be >= 0");
  // Smallest K with j0 r^{K+1} gmax / (1-r) < 1e-12; terms n = 1..K.
  std::size_t k = 1;
  double tail = j0 * ratio * ratio * gmax / (1.0 - ratio);
  while (tail >= 1e-12 && k < 100000) {
    tail *= ratio;
    ++k;
  }
  return k;
}

}  // namespace

Potential long_range_potential(double j0, double ratio,
                               std::vector<std::vector<double>> pair_table,
                               double holder_alpha) {
  const std::size_t k = pair_table.size();
  if (k == 0) throw UsageError("long-range pair table is empty");
  double gmax = 0.0;
  for (const auto& row : pair_table) {
    if (row.size() != k) throw UsageError("long-range pair table must be square");
    for (double v : row) {
      if (!std::isfinite(v))
        throw UsageError("long-range pair table holds a non-finite entry");
      gmax = std::max(gmax, std::fabs(v));
    }
  }
  const std::size_t terms = long_range_terms(j0, ratio, std::max(gmax, 1.0));
  const double bound = j0 * ratio / (1.0 - ratio) * std::max(gmax, 0.0);
  auto g = std::make_shared<const std::vector<std::vector<double>>>(
      std::move(pair_table));
  auto eval = [g, j0, ratio, terms](const TruncatedPoint& x) {
    const std::uint32_t first = x.coord(0);
    double acc = 0.0;
    double jn = j0;
    for (std::size_t n = 1; n <= terms; ++n) {
      jn *= ratio;
      acc += jn * (*g)[first][x.coord(n - 1)];
    }
    return -acc;
  };
  return Potential("long-range", std::move(eval), terms, holder_alpha, bound,
                   {{"j0", j0}, {"ratio", ratio}});
}

Potential long_range_potential(double j0, double ratio, std::size_t nodes,
                               double holder_alpha) {
  std::vector<std::vector<double>> ones(nodes,
                                        std::vector<double>(nodes, 1.0));
  return long_range_potential(j0, ratio, std::move(ones), holder_alpha);
}

Potential scale_potential(const Potential& f, double t) {
  if (!std::isfinite(t)) throw UsageError("scale factor must be finite");
  return Potential(f.name() + "*scale",
                   [f, t](const TruncatedPoint& x) { return t * f(x); },
                   f.declared_depth(), f.holder_alpha(),
                   std::fabs(t) * f.sup_bound(), {{"scale", t}});
}

Potential add_constant(const Potential& f, double c) {
  if (!std::isfinite(c)) throw UsageError("shift constant must be finite");
  return Potential(f.name() + "+const",
                   [f, c](const TruncatedPoint& x) { return f(x) + c; },
                   f.declared_depth(), f.holder_alpha(),
                   f.sup_bound() + std::fabs(c), {{"shift", c}});
}

Potential linear_combination(double s, const Potential& f, double t,
                             const Potential& g) {
  const std::size_t depth =
      (f.declared_depth() == kUnboundedDepth ||
       g.declared_depth() == kUnboundedDepth)
          ? kUnboundedDepth
          : std::max(f.declared_depth(), g.declared_depth());
  return Potential(
      "combination",
      [s, f, t, g](const TruncatedPoint& x) { return s * f(x) + t * g(x); },
      depth, std::min(f.holder_alpha(), g.holder_alpha()),
      std::fabs(s) * f.sup_bound() + std::fabs(t) * g.sup_bound());
}

Potential truncate_depth(const Potential& f, std::size_t m,
                         std::uint32_t anchor) {
  if (m < 1) throw UsageError("truncation depth must be >= 1");
  if (f.declared_depth() <= m) return f;  // already a depth-m cylinder
  auto eval = [f, m, anchor](const TruncatedPoint& x) {
    TruncatedPoint y;
    y.anchor = anchor;
    y.word.resize(m);
    for (std::size_t i = 0; i < m; ++i) y.word[i] = x.coord(i);
    return f(y);
  };
  return Potential(f.name() + "|depth" + std::to_string(m), std::move(eval),
                   m, f.holder_alpha(), f.sup_bound(), f.params());
}

double birkhoff_sum(const Potential& f, const TruncatedPoint& x,
                    std::size_t n) {
  if (n < 1) throw UsageError("Birkhoff sum needs n >= 1");
  double acc = 0.0;
  TruncatedPoint y = x;
  for (std::size_t k = 0; k < n; ++k) {
    acc += f(y);
    y = shift(y);
  }
  return acc;
}

double probe_sup(const Potential& f, const Alphabet& alphabet,
                 std::size_t depth, std::size_t probes, std::uint64_t seed) {
  Rng rng(seed);
  TruncatedPoint x;
  x.word.assign(depth, 0);
  double best = 0.0;
  for (std::size_t it = 0; it < probes; ++it) {
    for (auto& w : x.word)
      w = static_cast<std::uint32_t>(rng.next_u64() % alphabet.size());
    x.anchor = static_cast<std::uint32_t>(rng.next_u64() % alphabet.size());
    best = std::max(best, std::fabs(f(x)));
  }
  return best;
}

}  // namespace ruelle
