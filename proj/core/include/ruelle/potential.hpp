#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ruelle/seqspace.hpp"

namespace ruelle {

inline constexpr std::size_t kUnboundedDepth =
    std::numeric_limits<std::size_t>::max();

/// A potential on sequence space: an evaluator plus declared metadata
/// (cylinder depth, Holder exponent, sup bound). The metadata is audited by
/// probing, not derived symbolically.
class Potential {
 public:
  using Evaluator = std::function<double(const TruncatedPoint&)>;

  Potential() = default;
  Potential(std::string name, Evaluator eval, std::size_t declared_depth,
            double holder_alpha, double sup_bound,
            std::map<std::string, double> params = {});

  double operator()(const TruncatedPoint& x) const;

  const std::string& name() const { return impl_->name; }
  std::size_t declared_depth() const { return impl_->depth; }
  double holder_alpha() const { return impl_->alpha; }
  double sup_bound() const { return impl_->sup_bound; }
  const std::map<std::string, double>& params() const { return impl_->params; }
  bool valid() const { return impl_ != nullptr; }

 private:
  struct Impl {
    std::string name;
    Evaluator eval;
    std::size_t depth;
    double alpha;
    double sup_bound;
    std::map<std::string, double> params;
  };
  std::shared_ptr<const Impl> impl_;
};

// Built-in families ---------------------------------------------------------

Potential constant_potential(double c);

// f(x) = values[x_1].
Potential first_coordinate_potential(std::vector<double> values,
                                     double holder_alpha = 1.0);

// f(x) = matrix[x_1][x_2].
Potential two_coordinate_potential(std::vector<std::vector<double>> matrix,
                                   double holder_alpha = 1.0);

// f(x) = coeff * |x_1|^2 using the node embedding (continuous alphabets).
Potential quadratic_potential(const Alphabet& alphabet, double coeff);

// Long-range pair interaction f(x) = -sum_{n>=1} j0 r^n g(x_1, x_n) with a
// bounded pair table g; the series is cut once the tail bound
// j0 r^n max|g| / (1-r) drops below 1e-12.
Potential long_range_potential(double j0, double ratio,
                               std::vector<std::vector<double>> pair_table,
                               double holder_alpha);
// Convenience: g == 1 (depends on nothing but the truncation).
Potential long_range_potential(double j0, double ratio, std::size_t nodes,
                               double holder_alpha);

// Combinators ----------------------------------------------------------------

Potential scale_potential(const Potential& f, double t);
Potential add_constant(const Potential& f, double c);
Potential linear_combination(double s, const Potential& f, double t,
                             const Potential& g);

// Cylinder restriction: x -> f(x_1..x_M, anchor tail). Idempotent at fixed M;
// the sup error against f is bounded by D_alpha(f) 2^{-alpha M}.
Potential truncate_depth(const Potential& f, std::size_t m,
                         std::uint32_t anchor = 0);

// Birkhoff sum f_n(x) = sum_{k<n} f(shift^k x); exact on induced sequences,
// so the cocycle identity f_{m+n}(x) = f_n(x) + f_m(shift^n x) holds to
// rounding.
double birkhoff_sum(const Potential& f, const TruncatedPoint& x,
                    std::size_t n);

// Max |f| over `probes` random words of the given depth; used to audit the
// declared sup bound.
double probe_sup(const Potential& f, const Alphabet& alphabet,
                 std::size_t depth, std::size_t probes, std::uint64_t seed);

}  // namespace ruelle
