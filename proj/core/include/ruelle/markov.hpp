#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ruelle/thermo.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle {

/// Transition kernel dP(x,a) = e^{fbar(ax)} dp(a) of a normalized potential,
/// together with the stationary conformal measure of fbar (lambda = 1). The
/// chain state is the depth-N window; one step prepends a fresh symbol.
class Kernel {
 public:
  Kernel(Potential fbar, const SolveContext& ctx, double residual_tol = 1e-8);

  const Potential& fbar() const { return op_.potential(); }
  const TransferOperator& op() const { return op_; }
  const AprioriMeasure& measure() const { return op_.measure(); }
  const Alphabet& alphabet() const { return op_.alphabet(); }
  std::size_t grid_depth() const { return op_.grid_depth(); }
  double normalization_residual() const { return normalization_residual_; }
  const EigenTriple& stationary() const { return stationary_; }

  // Symbol distribution at state x: q(a|x) proportional to w_a e^{fbar(ax)}
  // (already summing to 1 up to the audited residual; renormalized).
  void symbol_weights(const TruncatedPoint& x, std::vector<double>& out) const;

 private:
  TransferOperator op_;
  EigenTriple stationary_;
  double normalization_residual_;
};

Kernel build_kernel(const Potential& fbar, const SolveContext& ctx,
                    double residual_tol = 1e-8);

// One transition from x; deterministic given the rng state.
TruncatedPoint step_sample(const Kernel& k, const TruncatedPoint& x, Rng& rng);

struct ChainTrace {
  std::vector<TruncatedPoint> states;  // length n+1
  std::uint64_t seed = 0;
};
ChainTrace simulate_chain(const Kernel& k, TruncatedPoint x0, std::size_t n,
                          std::uint64_t seed);

// Draws an initial state from the atoms of the stationary measure.
TruncatedPoint sample_stationary_start(const Kernel& k, Rng& rng);

/// pi = nu o pi_1^{-1} is P-stationary when fbar depends on the first two
/// coordinates only; checks sum_j pi(j) P(j,{a}) = pi(a) on the node set.
struct StationaryReport {
  std::vector<double> marginal;
  double residual;
};
StationaryReport stationary_marginal_check(const Kernel& k,
                                           double tol = 1e-8);

/// Least-squares fit of log d(P^n(x,.), nu) against n, pooled over starts.
struct ErgodicityFit {
  double s_hat = 0.0;
  double c_hat = 0.0;
  double r2 = 0.0;
  bool degenerate = true;
  // distances[start][n-1] = d(P^n(delta_x), nu)
  std::vector<std::vector<double>> distances;
};
ErgodicityFit geometric_ergodicity_fit(const Kernel& k,
                                       std::span<const TruncatedPoint> x0s,
                                       std::size_t n_max, double c_f,
                                       double alpha, std::size_t atom_cap);

/// t_hat = max over pairs of d(P^m mu, P^m mu~) / d(mu, mu~); pairs closer
/// than 1e-12 are skipped.
struct ContractionReport {
  double t_hat = 0.0;
  std::size_t used_pairs = 0;
  std::size_t skipped_pairs = 0;
  bool contracts = false;
};
ContractionReport operator_contraction_estimate(
    const Kernel& k,
    std::span<const std::pair<DiscreteMeasure, DiscreteMeasure>> pairs,
    std::size_t m, double c_f, double alpha, std::size_t atom_cap);

/// Long-run variance of a centered observable: Bartlett-tapered
/// autocovariance series cross-checked against the direct (1/n) E[S_n^2]
/// Monte Carlo estimate.
struct VarianceEstimate {
  double s2 = 0.0;         // the reported estimate
  double autocov_s2 = 0.0;
  double direct_s2 = 0.0;
  double mean = 0.0;       // <nu, xi> used for centering
  bool negative_warning = false;
};
VarianceEstimate clt_variance(const Kernel& k, const Potential& xi,
                              std::size_t lag_max, std::size_t n,
                              std::size_t samples, std::uint64_t seed);

/// Kolmogorov-Smirnov check of S_n(xi)/sqrt(n) against N(0, s^2) over
/// stationary-start traces. Pass bar: max(0.02, 1.36/sqrt(samples) +
/// 2/sqrt(n)).
struct CltResult {
  double ks_stat = 0.0;
  double threshold = 0.0;
  double s = 0.0;
  bool pass = false;
  std::size_t n = 0;
  std::size_t samples = 0;
  std::vector<double> normalized_sums;  // for histogram export
};
CltResult clt_check(const Kernel& k, const Potential& xi, double s,
                    std::size_t n, std::size_t samples, std::uint64_t seed);

}  // namespace ruelle
