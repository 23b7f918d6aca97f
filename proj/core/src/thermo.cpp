#include "ruelle/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruelle/errors.hpp"

namespace ruelle {

double pressure(const Potential& f, const SolveContext& ctx) {
  return ctx.op(f).eigen_triple(ctx.eigen).log_lambda;
}

double invariance_residual(const DiscreteMeasure& mu, std::size_t nodes,
                           std::size_t grid_depth) {
  // <mu, g o shift> is exact for cylinders of depth < grid_depth, so the
  // dictionary is built one level shallower than the grid.
  const auto dict =
      cylinder_dictionary(nodes, grid_depth > 1 ? grid_depth - 1 : 1, 20);
  double worst = 0.0;
  for (const auto& g : dict) {
    const double direct = mu.integrate(
        [&](const TruncatedPoint& x) { return g.value_at(x); });
    const double shifted = mu.integrate(
        [&](const TruncatedPoint& x) { return g.value_at(shift(x)); });
    worst = std::max(worst, std::fabs(shifted - direct));
  }
  return worst;
}

EquilibriumState equilibrium_state(const TransferOperator& op,
                                   const EigenTriple& triple,
                                   double tolerance) {
  EquilibriumState eq;
  eq.pressure = triple.log_lambda;

  // mu_f = h nu: re-weight the conformal atoms by the eigenfunction.
  std::vector<DiscreteMeasure::Atom> atoms = triple.nu.atoms();
  for (auto& a : atoms) a.weight *= triple.h.value_at(a.point);
  DiscreteMeasure mu(std::move(atoms));
  mu.normalize();
  eq.measure = std::move(mu);

  eq.potential_integral = eq.measure.integrate(
      [&](const TruncatedPoint& x) { return op.potential()(x); });

  // Entropy through the cohomologous normalized potential.
  auto [fbar, residual] = normalize_potential(op, triple, 1e-6);
  (void)residual;
  eq.entropy = -eq.measure.integrate(
      [&](const TruncatedPoint& x) { return fbar(x); });

  eq.invariance_residual = invariance_residual(
      eq.measure, op.alphabet().size(), op.grid_depth());
  eq.identity_residual =
      std::fabs(eq.entropy + eq.potential_integral - eq.pressure);

  if (eq.invariance_residual > tolerance)
    throw ConvergenceError(
        "equilibrium state fails the invariance audit (residual " +
            std::to_string(eq.invariance_residual) + ")",
        {eq.invariance_residual});
  if (eq.identity_residual > tolerance)
    throw ConvergenceError(
        "equilibrium state fails the variational identity (residual " +
            std::to_string(eq.identity_residual) + ")",
        {eq.identity_residual});
  return eq;
}

EquilibriumState equilibrium_state(const Potential& f,
                                   const SolveContext& ctx, double tolerance) {
  TransferOperator op = ctx.op(f);
  const EigenTriple triple = op.eigen_triple(ctx.eigen);
  return equilibrium_state(op, triple, tolerance);
}

EntropyEstimate entropy_upper_estimate(const DiscreteMeasure& mu,
                                       const std::vector<Potential>& dictionary,
                                       const SolveContext& ctx) {
  if (dictionary.empty())
    throw UsageError("entropy estimate needs a nonempty dictionary");
  if (!mu.is_probability())
    throw UsageError("entropy estimate needs a probability measure");
  EntropyEstimate est;
  est.value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dictionary.size(); ++i) {
    const Potential& g = dictionary[i];
    const double log_lambda = pressure(g, ctx);
    const double value =
        -mu.integrate([&](const TruncatedPoint& x) { return g(x); }) +
        log_lambda;
    est.per_potential.push_back(value);
    if (value < est.value) {
      est.value = value;
      est.argmin = i;
    }
  }
  return est;
}

std::vector<Potential> default_entropy_dictionary(const Potential& f) {
  return {constant_potential(0.0), f, scale_potential(f, 0.5),
          scale_potential(f, 2.0), add_constant(f, 1.0)};
}

std::vector<VariationalRow> variational_check(
    const Potential& f,
    const std::vector<std::pair<std::string, DiscreteMeasure>>& candidates,
    const std::vector<Potential>& entropy_dictionary,
    const SolveContext& ctx) {
  const double p_f = pressure(f, ctx);
  std::vector<VariationalRow> rows;
  rows.reserve(candidates.size());
  for (const auto& [label, mu] : candidates) {
    VariationalRow row;
    row.label = label;
    row.entropy_estimate = entropy_upper_estimate(mu, entropy_dictionary, ctx).value;
    row.potential_integral =
        mu.integrate([&](const TruncatedPoint& x) { return f(x); });
    row.deficit = p_f - (row.entropy_estimate + row.potential_integral);
    row.invariance = invariance_residual(mu, ctx.measure.alphabet().size(),
                                         ctx.grid_depth);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ConvexityRow> pressure_convexity_probe(const Potential& f,
                                                   const Potential& g,
                                                   const std::vector<double>& ts,
                                                   const SolveContext& ctx) {
  const double log_lambda_f = pressure(f, ctx);
  const double log_lambda_g = pressure(g, ctx);
  std::vector<ConvexityRow> rows;
  rows.reserve(ts.size());
  for (double t : ts) {
    if (t < 0.0 || t > 1.0)
      throw UsageError("convexity probe points must lie in [0,1]");
    ConvexityRow row;
    row.t = t;
    row.log_lambda = pressure(linear_combination(t, f, 1.0 - t, g), ctx);
    row.chord = t * log_lambda_f + (1.0 - t) * log_lambda_g;
    row.slack = row.chord - row.log_lambda;
    rows.push_back(row);
  }
  return rows;
}

std::vector<BetaScanRow> beta_scan(const Potential& f,
                                   const std::vector<double>& betas,
                                   const SolveContext& ctx) {
  for (std::size_t i = 1; i < betas.size(); ++i)
    if (betas[i] <= betas[i - 1])
      throw UsageError("beta list must be strictly ascending");

  std::vector<BetaScanRow> rows;
  GridFunction warm(ctx.grid_depth, ctx.measure.alphabet().size(), 0.0);
  bool have_warm = false;
  for (double beta : betas) {
    BetaScanRow row{beta, 0.0, 0.0, 0.0, false, {}};
    try {
      TransferOperator op = ctx.op(scale_potential(f, beta));
      EigenOptions opts = ctx.eigen;
      if (have_warm) opts.warm_start_log = &warm;
      const EigenTriple triple = op.eigen_triple(opts);
      const EquilibriumState eq = equilibrium_state(op, triple, 1e-6);
      row.log_lambda = triple.log_lambda;
      row.entropy = eq.entropy;
      // report <f>, not <beta f>
      row.f_integral = eq.measure.integrate(
          [&](const TruncatedPoint& x) { return f(x); });
      row.converged = true;
      // Continuation: reuse log h as the next start.
      for (std::size_t i = 0; i < warm.size(); ++i)
        warm[i] = std::log(triple.h[i]);
      have_warm = true;
    } catch (const std::exception& e) {
      row.error = e.what();
      rows.push_back(std::move(row));
      break;  // partial table plus the error row
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ruelle
