#include "ruelle/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ruelle/errors.hpp"

namespace ruelle {

Kernel::Kernel(Potential fbar, const SolveContext& ctx, double residual_tol)
    : op_(fbar, ctx.measure, ctx.grid_depth, ctx.anchor, ctx.threads),
      normalization_residual_(0.0) {
  // Audit L_fbar 1 = 1 on the grid; a potential that was not normalized
  // shows up here as |lambda - 1| + profile error.
  GridFunction check = op_.apply(op_.ones());
  for (std::size_t i = 0; i < check.size(); ++i)
    normalization_residual_ =
        std::max(normalization_residual_, std::fabs(check[i] - 1.0));
  if (normalization_residual_ > residual_tol)
    throw UsageError(
        "potential is not normalized (||L 1 - 1|| = " +
        std::to_string(normalization_residual_) +
        "); run normalize_potential first");
  EigenOptions opts = ctx.eigen;
  opts.fit_gap = false;
  stationary_ = op_.eigen_triple(opts);
}

Kernel build_kernel(const Potential& fbar, const SolveContext& ctx,
                    double residual_tol) {
  return Kernel(fbar, ctx, residual_tol);
}

void Kernel::symbol_weights(const TruncatedPoint& x,
                            std::vector<double>& out) const {
  const std::size_t k = alphabet().size();
  out.resize(k);
  TruncatedPoint ax;
  ax.anchor = x.anchor;
  ax.word.resize(x.word.size() + 1);
  std::copy(x.word.begin(), x.word.end(), ax.word.begin() + 1);
  double total = 0.0;
  for (std::uint32_t a = 0; a < k; ++a) {
    ax.word[0] = a;
    out[a] = measure().weight(a) * std::exp(fbar()(ax));
    total += out[a];
  }
  // total = 1 +- normalization residual; renormalize the draw.
  for (auto& w : out) w /= total;
}

TruncatedPoint step_sample(const Kernel& k, const TruncatedPoint& x,
                           Rng& rng) {
  thread_local std::vector<double> weights;
  k.symbol_weights(x, weights);
  const std::size_t a = rng.categorical(weights, 1.0);
  return prepend(static_cast<std::uint32_t>(a), x);
}

ChainTrace simulate_chain(const Kernel& k, TruncatedPoint x0, std::size_t n,
                          std::uint64_t seed) {
  if (n < 1) throw UsageError("chain length must be >= 1");
  ChainTrace trace;
  trace.seed = seed;
  trace.states.reserve(n + 1);
  trace.states.push_back(std::move(x0));
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i)
    trace.states.push_back(step_sample(k, trace.states.back(), rng));
  return trace;
}

TruncatedPoint sample_stationary_start(const Kernel& k, Rng& rng) {
  const auto& atoms = k.stationary().nu.atoms();
  const double u = rng.uniform() * k.stationary().nu.total_mass();
  double acc = 0.0;
  for (const auto& atom : atoms) {
    acc += atom.weight;
    if (u < acc) return atom.point;
  }
  return atoms.back().point;
}

StationaryReport stationary_marginal_check(const Kernel& k, double tol) {
  const Potential& f = k.fbar();
  if (f.declared_depth() > 2)
    throw UnsupportedCaseError(
        "the one-site marginal is only stationary when the normalized "
        "potential depends on the first two coordinates (declared depth " +
        std::to_string(f.declared_depth()) + ")");
  const std::size_t kk = k.alphabet().size();

  // One-site marginal of nu.
  StationaryReport report;
  report.marginal.assign(kk, 0.0);
  for (const auto& atom : k.stationary().nu.atoms())
    report.marginal[atom.point.word[0]] += atom.weight;

  // Transition matrix P(j, {a}) = w_a e^{fbar(a j ...)} from the grid.
  std::vector<double> row(kk);
  TruncatedPoint state;
  state.anchor = k.op().anchor();
  state.word.assign(k.grid_depth(), k.op().anchor());
  report.residual = 0.0;
  std::vector<double> image(kk, 0.0);
  for (std::size_t j = 0; j < kk; ++j) {
    state.word[0] = static_cast<std::uint32_t>(j);
    k.symbol_weights(state, row);
    for (std::size_t a = 0; a < kk; ++a)
      image[a] += report.marginal[j] * row[a];
  }
  for (std::size_t a = 0; a < kk; ++a)
    report.residual =
        std::max(report.residual, std::fabs(image[a] - report.marginal[a]));
  if (report.residual > tol)
    throw ConvergenceError("stationary marginal check failed (residual " +
                               std::to_string(report.residual) + ")",
                           {report.residual});
  return report;
}

namespace {

struct LogFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
  bool ok = false;
};

LogFit fit_log_linear(const std::vector<std::pair<double, double>>& pts) {
  LogFit fit;
  if (pts.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double det = n * sxx - sx * sx;
  if (det <= 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (auto [x, y] : pts) {
    const double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
    ss_tot += (y - mean) * (y - mean);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.ok = true;
  return fit;
}

}  // namespace

ErgodicityFit geometric_ergodicity_fit(const Kernel& k,
                                       std::span<const TruncatedPoint> x0s,
                                       std::size_t n_max, double c_f,
                                       double alpha, std::size_t atom_cap) {
  if (x0s.empty()) throw UsageError("ergodicity fit needs at least one start");
  ErgodicityFit fit;
  for (const auto& x0 : x0s) {
    DiscreteMeasure mu = DiscreteMeasure::dirac(x0);
    std::vector<double> row;
    row.reserve(n_max);
    for (std::size_t n = 1; n <= n_max; ++n) {
      mu = k.op().dual_apply(mu, atom_cap);
      mu.normalize();
      row.push_back(
          wasserstein(k.alphabet(), mu, k.stationary().nu, c_f, alpha));
    }
    fit.distances.push_back(std::move(row));
  }
  // The ground metric is capped at 1, so distances near the diameter sit in
  // the saturation regime and cannot decay geometrically; the fit uses the
  // entries below half the diameter (falling back to all nonzero entries if
  // n_max never reaches that regime).
  std::vector<std::pair<double, double>> pts, pts_all;
  for (const auto& row : fit.distances)
    for (std::size_t n = 0; n < row.size(); ++n) {
      if (row[n] <= 1e-13) continue;
      pts_all.emplace_back(static_cast<double>(n + 1), std::log(row[n]));
      if (row[n] < 0.5)
        pts.emplace_back(static_cast<double>(n + 1), std::log(row[n]));
    }
  if (pts.size() < 2) pts = pts_all;
  const LogFit lf = fit_log_linear(pts);
  if (!lf.ok) return fit;  // degenerate: the chain forgets immediately
  fit.s_hat = std::exp(lf.slope);
  fit.c_hat = std::exp(lf.intercept);
  fit.r2 = lf.r2;
  fit.degenerate = false;
  return fit;
}

ContractionReport operator_contraction_estimate(
    const Kernel& k,
    std::span<const std::pair<DiscreteMeasure, DiscreteMeasure>> pairs,
    std::size_t m, double c_f, double alpha, std::size_t atom_cap) {
  if (m < 1) throw UsageError("contraction estimate needs m >= 1");
  ContractionReport report;
  for (const auto& [mu0, nu0] : pairs) {
    if (!mu0.is_probability() || !nu0.is_probability())
      throw UsageError("contraction pairs must be probability measures");
    const double before = wasserstein(k.alphabet(), mu0, nu0, c_f, alpha);
    if (before < 1e-12) {
      ++report.skipped_pairs;
      continue;
    }
    DiscreteMeasure mu = mu0, nu = nu0;
    for (std::size_t i = 0; i < m; ++i) {
      mu = k.op().dual_apply(mu, atom_cap);
      mu.normalize();
      nu = k.op().dual_apply(nu, atom_cap);
      nu.normalize();
    }
    const double after = wasserstein(k.alphabet(), mu, nu, c_f, alpha);
    report.t_hat = std::max(report.t_hat, after / before);
    ++report.used_pairs;
  }
  report.contracts = report.used_pairs > 0 && report.t_hat < 1.0;
  return report;
}

VarianceEstimate clt_variance(const Kernel& k, const Potential& xi,
                              std::size_t lag_max, std::size_t n,
                              std::size_t samples, std::uint64_t seed) {
  if (n < 2 * (lag_max + 1))
    throw UsageError("variance trace too short for the requested lag");
  VarianceEstimate est;
  est.mean = k.stationary().nu.integrate(
      [&](const TruncatedPoint& x) { return xi(x); });

  // One long stationary trace for the autocovariance series.
  Rng rng(derive_seed(seed, 0));
  TruncatedPoint x = sample_stationary_start(k, rng);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = xi(x) - est.mean;
    x = step_sample(k, x, rng);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double gamma0 = 0.0;
  for (double v : values) gamma0 += v * v;
  gamma0 *= inv_n;
  double s2 = gamma0;
  for (std::size_t lag = 1; lag <= lag_max; ++lag) {
    double cov = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) cov += values[i] * values[i + lag];
    cov *= inv_n;
    const double taper =
        1.0 - static_cast<double>(lag) / static_cast<double>(lag_max + 1);
    s2 += 2.0 * taper * cov;
  }
  est.autocov_s2 = s2;

  // Direct (1/len) E[S_len^2] over independent stationary traces.
  const std::size_t len = std::max<std::size_t>(64, 4 * (lag_max + 1));
  double acc = 0.0;
  for (std::size_t trace = 0; trace < samples; ++trace) {
    Rng trng(derive_seed(seed, trace + 1));
    TruncatedPoint y = sample_stationary_start(k, trng);
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      sum += xi(y) - est.mean;
      y = step_sample(k, y, trng);
    }
    acc += sum * sum;
  }
  est.direct_s2 = acc / (static_cast<double>(samples) *
                         static_cast<double>(len));

  if (est.autocov_s2 <= 0.0) {
    est.negative_warning = true;
    est.s2 = std::max(est.direct_s2, 0.0);
  } else {
    est.s2 = est.autocov_s2;
  }
  return est;
}

CltResult clt_check(const Kernel& k, const Potential& xi, double s,
                    std::size_t n, std::size_t samples, std::uint64_t seed) {
  if (!(s > 1e-9))
    throw UsageError(
        "clt_check needs s > 0; the observable looks degenerate "
        "(see clt_variance)");
  if (n < 1 || samples < 10)
    throw UsageError("clt_check needs n >= 1 and samples >= 10");
  CltResult result;
  result.s = s;
  result.n = n;
  result.samples = samples;

  const double mean = k.stationary().nu.integrate(
      [&](const TruncatedPoint& x) { return xi(x); });
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  result.normalized_sums.resize(samples);
  for (std::size_t trace = 0; trace < samples; ++trace) {
    Rng rng(derive_seed(seed, trace));
    TruncatedPoint x = sample_stationary_start(k, rng);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += xi(x) - mean;
      x = step_sample(k, x, rng);
    }
    result.normalized_sums[trace] = sum * inv_sqrt_n;
  }

  std::vector<double> sorted = result.normalized_sums;
  std::sort(sorted.begin(), sorted.end());
  const double inv_m = 1.0 / static_cast<double>(samples);
  double ks = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    // Phi(u / s) with Phi the standard normal CDF.
    const double cdf = 0.5 * std::erfc(-sorted[i] / (s * std::sqrt(2.0)));
    ks = std::max(ks, std::fabs(static_cast<double>(i + 1) * inv_m - cdf));
    ks = std::max(ks, std::fabs(cdf - static_cast<double>(i) * inv_m));
  }
  result.ks_stat = ks;
  result.threshold =
      std::max(0.02, 1.36 / std::sqrt(static_cast<double>(samples)) +
                         2.0 / std::sqrt(static_cast<double>(n)));
  result.pass = ks <= result.threshold;
  return result;
}

}  // namespace ruelle
