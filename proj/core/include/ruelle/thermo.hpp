#pragma once

#include <string>
#include <vector>

#include "ruelle/transfer.hpp"

namespace ruelle {

/// Everything an eigen-solve needs besides the potential: the a priori
/// measure, the grid depth, and solver options.
struct SolveContext {
  AprioriMeasure measure;
  std::size_t grid_depth;
  std::uint32_t anchor = 0;
  int threads = 1;
  EigenOptions eigen;

  TransferOperator op(const Potential& f) const {
    return TransferOperator(f, measure, grid_depth, anchor, threads);
  }
};

/// Equilibrium state mu_f = h dnu with its thermodynamic data. The entropy
/// is computed through the normalized potential, so the variational identity
/// entropy + <mu, f> = log lambda is an audit, not a tautology.
struct EquilibriumState {
  DiscreteMeasure measure;
  double entropy = 0.0;
  double pressure = 0.0;
  double potential_integral = 0.0;
  double invariance_residual = 0.0;
  double identity_residual = 0.0;  // |entropy + <mu,f> - log lambda|
};

// P(f) = log lambda_f.
double pressure(const Potential& f, const SolveContext& ctx);

// Builds mu_f from a converged triple; audits invariance against the
// cylinder dictionary and the variational identity.
EquilibriumState equilibrium_state(const TransferOperator& op,
                                   const EigenTriple& triple,
                                   double tolerance = 1e-6);
EquilibriumState equilibrium_state(const Potential& f,
                                   const SolveContext& ctx,
                                   double tolerance = 1e-6);

// max over the dictionary of |<mu, g shift> - <mu, g>|.
double invariance_residual(const DiscreteMeasure& mu, std::size_t nodes,
                           std::size_t grid_depth);

/// Upper bound min_g (-<mu,g> + log lambda_g) over a finite dictionary of
/// potentials; nonincreasing as the dictionary grows.
struct EntropyEstimate {
  double value = 0.0;
  std::size_t argmin = 0;
  std::vector<double> per_potential;
};
EntropyEstimate entropy_upper_estimate(const DiscreteMeasure& mu,
                                       const std::vector<Potential>& dictionary,
                                       const SolveContext& ctx);

/// Variational principle audit: for each candidate invariant measure,
/// entropy estimate + <mu,f> must not exceed P(f) (up to tolerance), with
/// equality at the equilibrium state.
struct VariationalRow {
  std::string label;
  double entropy_estimate;
  double potential_integral;
  double deficit;  // P(f) - (entropy + integral)
  double invariance;
};
std::vector<VariationalRow> variational_check(
    const Potential& f, const std::vector<std::pair<std::string, DiscreteMeasure>>& candidates,
    const std::vector<Potential>& entropy_dictionary, const SolveContext& ctx);

// Default entropy dictionary: zero, f and a few scalings of f.
std::vector<Potential> default_entropy_dictionary(const Potential& f);

/// Convexity probe of the pressure along the segment t f + (1-t) g.
struct ConvexityRow {
  double t;
  double log_lambda;
  double chord;  // t log lambda_f + (1-t) log lambda_g
  double slack;  // chord - log_lambda, >= -tol under convexity
};
std::vector<ConvexityRow> pressure_convexity_probe(const Potential& f,
                                                   const Potential& g,
                                                   const std::vector<double>& ts,
                                                   const SolveContext& ctx);

/// Ground-state scan: equilibrium data along an ascending beta list, with
/// warm-started eigen-solves. The final <f> column estimates m(f).
struct BetaScanRow {
  double beta;
  double log_lambda;
  double f_integral;
  double entropy;
  bool converged;
  std::string error;
};
std::vector<BetaScanRow> beta_scan(const Potential& f,
                                   const std::vector<double>& betas,
                                   const SolveContext& ctx);

}  // namespace ruelle
