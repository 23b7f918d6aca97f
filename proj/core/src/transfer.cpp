#include "ruelle/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "ruelle/errors.hpp"
#include "ruelle/ot.hpp"
#include "ruelle/rng.hpp"

namespace ruelle {

namespace {

constexpr double kExpOverflowLimit = 700.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (threads <= 1 || n < 4096) {
    body(0, n);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

bool word_less(const TruncatedPoint& a, const TruncatedPoint& b) {
  if (a.word != b.word) return a.word < b.word;
  return a.anchor < b.anchor;
}

bool word_equal(const TruncatedPoint& a, const TruncatedPoint& b) {
  return a.word == b.word && a.anchor == b.anchor;
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(std::vector<Atom> atoms)
    : atoms_(std::move(atoms)) {
  for (const auto& a : atoms_) {
    if (a.point.word.empty())
      throw UsageError("measure atom needs a nonempty word");
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight))
      throw UsageError("measure weights must be finite and nonnegative");
  }
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& a, const Atom& b) {
              return word_less(a.point, b.point);
            });
  std::size_t out = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (out > 0 && word_equal(atoms_[out - 1].point, atoms_[i].point)) {
      atoms_[out - 1].weight += atoms_[i].weight;
    } else {
      if (out != i) atoms_[out] = std::move(atoms_[i]);
      ++out;
    }
  }
  atoms_.resize(out);
  total_mass_ = 0.0;
  for (const auto& a : atoms_) total_mass_ += a.weight;
}

DiscreteMeasure DiscreteMeasure::dirac(TruncatedPoint x) {
  return DiscreteMeasure({Atom{std::move(x), 1.0}});
}

bool DiscreteMeasure::is_probability(double tol) const {
  return std::fabs(total_mass_ - 1.0) <= tol;
}

double DiscreteMeasure::integrate(
    const std::function<double(const TruncatedPoint&)>& g) const {
  double acc = 0.0;
  for (const auto& a : atoms_) acc += a.weight * g(a.point);
  return acc;
}

double DiscreteMeasure::integrate(const GridFunction& g) const {
  double acc = 0.0;
  for (const auto& a : atoms_) acc += a.weight * g.value_at(a.point);
  return acc;
}

void DiscreteMeasure::scale(double c) {
  for (auto& a : atoms_) a.weight *= c;
  total_mass_ *= c;
}

void DiscreteMeasure::normalize() {
  if (total_mass_ <= 0.0)
    throw UsageError("cannot normalize a zero-mass measure");
  scale(1.0 / total_mass_);
  total_mass_ = 1.0;
}

double DiscreteMeasure::prune(std::size_t cap) {
  if (atoms_.size() <= cap) return 0.0;
  std::vector<std::size_t> idx(atoms_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Heaviest first; equal weights resolved by lexicographic word order so
  // pruning is deterministic.
  std::sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) {
    if (atoms_[a].weight != atoms_[b].weight)
      return atoms_[a].weight > atoms_[b].weight;
    return word_less(atoms_[a].point, atoms_[b].point);
  });
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<Atom> kept;
  kept.reserve(cap);
  double kept_mass = 0.0;
  for (std::size_t i : idx) {
    kept_mass += atoms_[i].weight;
    kept.push_back(std::move(atoms_[i]));
  }
  const double discarded = total_mass_ - kept_mass;
  if (kept_mass > 0.0) {
    const double rescale = total_mass_ / kept_mass;
    for (auto& a : kept) a.weight *= rescale;
  }
  atoms_ = std::move(kept);
  // total mass preserved by the rescale
  double tm = 0.0;
  for (const auto& a : atoms_) tm += a.weight;
  total_mass_ = tm;
  return discarded;
}

double DiscreteMeasure::weight_distance(const DiscreteMeasure& other) const {
  double worst = 0.0;
  std::size_t i = 0, j = 0;
  while (i < atoms_.size() || j < other.atoms_.size()) {
    if (j >= other.atoms_.size() ||
        (i < atoms_.size() && word_less(atoms_[i].point, other.atoms_[j].point))) {
      worst = std::max(worst, atoms_[i].weight);
      ++i;
    } else if (i >= atoms_.size() ||
               word_less(other.atoms_[j].point, atoms_[i].point)) {
      worst = std::max(worst, other.atoms_[j].weight);
      ++j;
    } else {
      worst = std::max(worst,
                       std::fabs(atoms_[i].weight - other.atoms_[j].weight));
      ++i;
      ++j;
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// TransferOperator

TransferOperator::TransferOperator(Potential f, AprioriMeasure p,
                                   std::size_t grid_depth,
                                   std::uint32_t anchor, int threads)
    : f_(std::move(f)), p_(std::move(p)), depth_(grid_depth), anchor_(anchor),
      threads_(std::max(1, threads)) {
  if (grid_depth < 1) throw UsageError("grid depth must be >= 1");
  if (anchor_ >= p_.alphabet().size())
    throw UsageError("anchor node outside the alphabet");
  if (f_.declared_depth() > depth_ + 1) {
    f_ = truncate_depth(f_, depth_ + 1, anchor_);
    truncated_ = true;
  }
  // Grid size guard (apply() materializes nodes^depth values).
  (void)GridFunction(depth_, p_.alphabet().size());
}

GridFunction TransferOperator::ones() const {
  return grid_constant(depth_, p_.alphabet().size(), 1.0);
}

namespace {

// Per-operator table of log(w_a) + f(a x), indexed by a and the first
// (f_depth - 1) coordinates of x; exact because the effective potential is a
// cylinder function of depth <= grid_depth + 1.
struct LogWeightTable {
  std::size_t prefix_len;     // coordinates of x that f sees
  std::size_t prefix_div;     // k^(depth - prefix_len): word_idx / prefix_div
  std::vector<double> value;  // size k^(prefix_len + 1)
  double max_f = 0.0;
};

LogWeightTable build_table(const Potential& f, const AprioriMeasure& p,
                           std::size_t depth, std::uint32_t anchor) {
  const std::size_t k = p.alphabet().size();
  LogWeightTable t;
  t.prefix_len = std::min(depth, f.declared_depth() > 0
                                     ? f.declared_depth() - 1
                                     : 0);
  std::size_t entries = k;
  for (std::size_t i = 0; i < t.prefix_len; ++i) entries *= k;
  t.prefix_div = 1;
  for (std::size_t i = 0; i < depth - t.prefix_len; ++i) t.prefix_div *= k;

  t.value.resize(entries);
  TruncatedPoint ax;
  ax.anchor = anchor;
  ax.word.assign(t.prefix_len + 1, 0);
  for (std::size_t a = 0; a < k; ++a) {
    const double log_w =
        p.weight(a) > 0.0 ? std::log(p.weight(a)) : kNegInf;
    const std::size_t base = a * (entries / k);
    for (std::size_t pre = 0; pre < entries / k; ++pre) {
      ax.word[0] = static_cast<std::uint32_t>(a);
      std::size_t rem = pre;
      for (std::size_t i = t.prefix_len; i >= 1; --i) {
        ax.word[i] = static_cast<std::uint32_t>(rem % k);
        rem /= k;
      }
      const double fv = f(ax);
      t.max_f = std::max(t.max_f, fv);
      t.value[base + pre] = log_w + fv;
    }
  }
  return t;
}

}  // namespace

GridFunction TransferOperator::apply(const GridFunction& phi) const {
  if (phi.depth() != depth_ || phi.nodes() != p_.alphabet().size())
    throw UsageError("grid function shape does not match the operator");
  const LogWeightTable table = build_table(f_, p_, depth_, anchor_);
  if (table.max_f > kExpOverflowLimit)
    throw EvaluationError(
        "exp(f) overflows; rescale the potential or use the log-space path "
        "(sup audit: " + std::to_string(table.max_f) + ")");
  const std::size_t k = p_.alphabet().size();
  const std::size_t stride = phi.size() / k;  // k^(depth-1)
  GridFunction out(depth_, k);
  out.set_holder_alpha(phi.holder_alpha());
  parallel_for(phi.size(), threads_, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const std::size_t pre = idx / table.prefix_div;
      const std::size_t child = idx / k;
      double acc = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        const double lw = table.value[a * (table.value.size() / k) + pre];
        if (lw == kNegInf) continue;
        acc += std::exp(lw) * phi[a * stride + child];
      }
      out[idx] = acc;
    }
  });
  return out;
}

GridFunction TransferOperator::apply_n(const GridFunction& phi,
                                       std::size_t n) const {
  GridFunction out = phi;
  for (std::size_t i = 0; i < n; ++i) out = apply(out);
  return out;
}

GridFunction TransferOperator::apply_log(const GridFunction& log_phi) const {
  if (log_phi.depth() != depth_ || log_phi.nodes() != p_.alphabet().size())
    throw UsageError("grid function shape does not match the operator");
  const LogWeightTable table = build_table(f_, p_, depth_, anchor_);
  const std::size_t k = p_.alphabet().size();
  const std::size_t stride = log_phi.size() / k;
  GridFunction out(depth_, k);
  out.set_holder_alpha(log_phi.holder_alpha());
  parallel_for(log_phi.size(), threads_, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> local(k);
    for (std::size_t idx = lo; idx < hi; ++idx) {
      const std::size_t pre = idx / table.prefix_div;
      const std::size_t child = idx / k;
      double peak = kNegInf;
      for (std::size_t a = 0; a < k; ++a) {
        const double lw = table.value[a * (table.value.size() / k) + pre];
        local[a] = lw + log_phi[a * stride + child];
        peak = std::max(peak, local[a]);
      }
      if (peak == kNegInf) {
        out[idx] = kNegInf;
        continue;
      }
      double acc = 0.0;
      for (std::size_t a = 0; a < k; ++a)
        if (local[a] != kNegInf) acc += std::exp(local[a] - peak);
      out[idx] = peak + std::log(acc);
    }
  });
  return out;
}

GridFunction TransferOperator::pmn_apply(const GridFunction& phi,
                                         std::size_t m, std::size_t n) const {
  if (m < 1) throw UsageError("P^m_n needs m >= 1");
  GridFunction ln1 = apply_n(ones(), n);
  GridFunction numerator = phi;
  for (std::size_t i = 0; i < numerator.size(); ++i) numerator[i] *= ln1[i];
  numerator = apply_n(numerator, m);
  GridFunction denom = apply_n(ones(), m + n);
  GridFunction out(depth_, p_.alphabet().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    // L^{m+n} 1 > 0 always for finite e^f and weights summing to 1.
    out[i] = numerator[i] / denom[i];
  }
  out.set_holder_alpha(phi.holder_alpha());
  return out;
}

DiscreteMeasure TransferOperator::dual_apply(const DiscreteMeasure& mu,
                                             std::size_t cap,
                                             double* pruned_mass) const {
  const std::size_t k = p_.alphabet().size();
  if (cap < k) throw UsageError("atom cap must be >= the alphabet size");
  std::vector<DiscreteMeasure::Atom> out;
  out.reserve(mu.size() * k);
  TruncatedPoint ax;
  for (const auto& atom : mu.atoms()) {
    // f(ax) must see the coordinate that prepend() drops, so evaluate on the
    // depth+1 word before truncating the new atom back to the grid depth.
    ax.anchor = atom.point.anchor;
    ax.word.resize(atom.point.word.size() + 1);
    std::copy(atom.point.word.begin(), atom.point.word.end(),
              ax.word.begin() + 1);
    for (std::uint32_t a = 0; a < k; ++a) {
      const double w = p_.weight(a);
      if (w <= 0.0) continue;
      ax.word[0] = a;
      const double weight = atom.weight * w * std::exp(f_(ax));
      out.push_back({prepend(a, atom.point), weight});
    }
  }
  DiscreteMeasure result(std::move(out));
  const double discarded = result.prune(cap);
  if (pruned_mass) *pruned_mass = discarded;
  return result;
}

DiscreteMeasure TransferOperator::pm0_dual_apply(const DiscreteMeasure& mu,
                                                 std::size_t m,
                                                 std::size_t cap,
                                                 double* pruned_mass) const {
  if (m < 1) throw UsageError("P^m_0 dual needs m >= 1");
  const std::size_t k = p_.alphabet().size();
  double paths = 1.0;
  for (std::size_t i = 0; i < m; ++i) paths *= static_cast<double>(k);
  if (paths > 200000.0)
    throw UsageError("P^m_0 dual: k^m too large, lower m");
  GridFunction lm1 = apply_n(ones(), m);

  std::vector<DiscreteMeasure::Atom> out;
  std::vector<std::uint32_t> word(m, 0);
  TruncatedPoint ext;
  for (const auto& atom : mu.atoms()) {
    const double denom = lm1.value_at(atom.point);
    std::fill(word.begin(), word.end(), 0);
    while (true) {
      // weight w_a e^{f_m(a x)} / L^m 1(x); the images of a probability atom
      // sum to one by the iterated-operator identity.
      ext.anchor = atom.point.anchor;
      ext.word.resize(m + atom.point.word.size());
      std::copy(word.begin(), word.end(), ext.word.begin());
      std::copy(atom.point.word.begin(), atom.point.word.end(),
                ext.word.begin() + static_cast<std::ptrdiff_t>(m));
      double log_w = 0.0;
      bool zero = false;
      for (std::size_t i = 0; i < m; ++i) {
        const double w = p_.weight(word[i]);
        if (w <= 0.0) {
          zero = true;
          break;
        }
        log_w += std::log(w);
      }
      if (!zero) {
        const double fm = birkhoff_sum(f_, ext, m);
        TruncatedPoint img = atom.point;
        for (std::size_t i = m; i-- > 0;) img = prepend(word[i], img);
        out.push_back({std::move(img),
                       atom.weight * std::exp(log_w + fm) / denom});
      }
      // next word (odometer)
      std::size_t pos = m;
      while (pos > 0) {
        if (++word[pos - 1] < k) break;
        word[pos - 1] = 0;
        --pos;
      }
      if (pos == 0) break;
    }
  }
  DiscreteMeasure result(std::move(out));
  const double discarded = result.prune(cap);
  if (pruned_mass) *pruned_mass = discarded;
  return result;
}

EigenTriple TransferOperator::eigen_triple(const EigenOptions& opts) const {
  if (opts.tol <= 0.0) throw UsageError("eigen tolerance must be > 0");
  const std::size_t k = p_.alphabet().size();

  // Primal: log-space power iteration from phi = 1 (or a warm start), with
  // the Collatz-Wielandt bracket min/max log(L phi / phi) pinching log lambda.
  GridFunction log_phi = (opts.warm_start_log != nullptr)
                             ? *opts.warm_start_log
                             : grid_constant(depth_, k, 0.0);
  std::vector<double> history;
  double log_lambda = 0.0;
  double accumulated = 0.0;  // total normalization shift, for the cross-check
  std::size_t iters = 0;
  bool converged = false;
  for (; iters < opts.max_iter; ++iters) {
    GridFunction next = apply_log(log_phi);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double ratio = next[i] - log_phi[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    log_lambda = 0.5 * (lo + hi);
    history.push_back(hi - lo);
    const double shift = next.max_value();
    for (std::size_t i = 0; i < next.size(); ++i) next[i] -= shift;
    accumulated += shift;
    log_phi = std::move(next);
    if (hi - lo < opts.tol) {
      converged = true;
      ++iters;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError(
        "power iteration did not reach tolerance " + std::to_string(opts.tol) +
            " in " + std::to_string(opts.max_iter) + " iterations",
        history);

  EigenTriple triple;
  triple.log_lambda = log_lambda;
  triple.lambda = std::exp(log_lambda);
  triple.residual_history = history;

  // Cross-check: n^{-1} log L^n 1 (x_0) -> log lambda; started from phi = 1
  // the accumulated shifts recover log L^n 1 up to the final profile.
  if (opts.warm_start_log == nullptr && iters > 0) {
    const double birkhoff =
        (accumulated + log_phi[0]) / static_cast<double>(iters);
    triple.birkhoff_gap = std::fabs(birkhoff - log_lambda);
    const double spread =
        log_phi.max_value() - log_phi.min_value() + std::fabs(log_lambda);
    if (triple.birkhoff_gap >
        (2.0 * spread + 1.0) / static_cast<double>(iters) + 1e-8)
      throw ConvergenceError(
          "lambda cross-check failed: Birkhoff average of log L^n 1 "
          "disagrees with the Collatz-Wielandt value",
          history);
  }

  // Dual: nu_{k+1} = retruncated L* nu_k / lambda, renormalized; stop when
  // the word-weight vector stabilizes.
  TruncatedPoint start;
  start.anchor = anchor_;
  start.word.assign(depth_, anchor_);
  DiscreteMeasure nu = DiscreteMeasure::dirac(std::move(start));
  std::size_t dual_iters = 0;
  bool dual_converged = false;
  std::vector<double> dual_history;
  const std::size_t min_dual = depth_ + 1;
  for (; dual_iters < opts.max_iter; ++dual_iters) {
    DiscreteMeasure next = dual_apply(nu, opts.atom_cap);
    next.normalize();
    const double gap = next.weight_distance(nu);
    dual_history.push_back(gap);
    nu = std::move(next);
    if (dual_iters + 1 >= min_dual && gap < opts.tol) {
      dual_converged = true;
      ++dual_iters;
      break;
    }
  }
  if (!dual_converged)
    throw ConvergenceError("dual iteration did not stabilize within tolerance",
                           dual_history);
  triple.nu = std::move(nu);

  // Normalize h so that nu(h) = 1, pinning the scale of the eigenfunction.
  const double log_shift = log_phi.max_value();
  GridFunction h(depth_, k);
  for (std::size_t i = 0; i < h.size(); ++i)
    h[i] = std::exp(log_phi[i] - log_shift);
  const double mass = triple.nu.integrate(h);
  if (!(mass > 0.0))
    throw ConvergenceError("eigenfunction has nonpositive nu-mass", history);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] /= mass;
  triple.h = std::move(h);
  triple.iterations = iters + dual_iters;

  // Residuals: relative eigen residual ||L h / lambda - h|| / ||h|| and the
  // conformality audit over the cylinder dictionary.
  {
    GridFunction log_h(depth_, k);
    for (std::size_t i = 0; i < log_h.size(); ++i)
      log_h[i] = std::log(triple.h[i]);
    GridFunction lh = apply_log(log_h);
    double worst = 0.0;
    for (std::size_t i = 0; i < lh.size(); ++i)
      worst = std::max(worst, std::fabs(std::exp(lh[i] - log_lambda) -
                                        triple.h[i]));
    triple.eigen_residual = worst / triple.h.max_value();

    const auto dict = cylinder_dictionary(k, depth_, 20);
    double conf = 0.0;
    for (const auto& g : dict) {
      GridFunction log_g(depth_, k);
      for (std::size_t i = 0; i < g.size(); ++i)
        log_g[i] = g[i] > 0.0 ? std::log(g[i]) : kNegInf;
      GridFunction lg = apply_log(log_g);
      double lhs = 0.0;
      for (const auto& atom : triple.nu.atoms())
        lhs += atom.weight * std::exp(lg.value_at(atom.point) - log_lambda);
      const double rhs = triple.nu.integrate(g);
      conf = std::max(conf, std::fabs(lhs - rhs) / std::max(1.0, g.sup_norm()));
    }
    triple.conformality_residual = conf;
  }

  if (opts.fit_gap)
    triple.gap = spectral_gap_estimate(*this, triple, opts.gap_n_max);
  return triple;
}

// ---------------------------------------------------------------------------
// Diagnostics

namespace {

// Least squares of log(y) against n over the strictly positive entries.
GapFit fit_geometric(const std::vector<double>& decay) {
  GapFit fit;
  fit.decay = decay;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < decay.size(); ++i)
    if (decay[i] > 1e-14)
      pts.emplace_back(static_cast<double>(i + 1), std::log(decay[i]));
  if (pts.size() < 2) return fit;  // degenerate
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
  const double slope = (n * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (auto [x, y] : pts) {
    const double e = y - (intercept + slope * x);
    ss_res += e * e;
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  fit.s_hat = std::exp(slope);
  fit.c_hat = 0.5 * std::exp(intercept);
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.degenerate = false;
  return fit;
}

}  // namespace

GapFit spectral_gap_estimate(const TransferOperator& op,
                             const EigenTriple& triple, std::size_t n_max) {
  const std::size_t k = op.alphabet().size();
  GridFunction log_r = grid_constant(op.grid_depth(), k, 0.0);
  GridFunction log_h(op.grid_depth(), k);
  for (std::size_t i = 0; i < log_h.size(); ++i)
    log_h[i] = std::log(triple.h[i]);
  std::vector<double> decay;
  decay.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    log_r = op.apply_log(log_r);
    for (std::size_t i = 0; i < log_r.size(); ++i)
      log_r[i] -= triple.log_lambda;
    double en = 0.0;
    for (std::size_t i = 0; i < log_r.size(); ++i)
      en = std::max(en, std::fabs(std::exp(log_r[i] - log_h[i]) - 1.0));
    decay.push_back(en);
  }
  return fit_geometric(decay);
}

std::vector<QnormRow> qnorm_decay(const TransferOperator& op,
                                  const EigenTriple& triple,
                                  const GridFunction& phi, std::size_t n_max,
                                  double* commutation_residual) {
  const std::size_t k = op.alphabet().size();
  const double pi_phi = [&] {
    double acc = 0.0;
    for (const auto& atom : triple.nu.atoms())
      acc += atom.weight * triple.h.value_at(atom.point) *
             phi.value_at(atom.point);
    return acc;
  }();

  auto q_apply = [&](const GridFunction& psi) {
    GridFunction hp = psi;
    for (std::size_t i = 0; i < hp.size(); ++i) hp[i] *= triple.h[i];
    GridFunction num = op.apply(hp);
    GridFunction out(op.grid_depth(), k);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = num[i] / (triple.lambda * triple.h[i]);
    out.set_holder_alpha(psi.holder_alpha());
    return out;
  };

  if (commutation_residual) {
    // Pi Q phi = Q Pi phi = Pi phi.
    GridFunction qphi = q_apply(phi);
    double pi_qphi = 0.0;
    for (const auto& atom : triple.nu.atoms())
      pi_qphi += atom.weight * triple.h.value_at(atom.point) *
                 qphi.value_at(atom.point);
    GridFunction q_piphi =
        q_apply(grid_constant(op.grid_depth(), k, pi_phi));
    double worst = std::fabs(pi_qphi - pi_phi);
    for (std::size_t i = 0; i < q_piphi.size(); ++i)
      worst = std::max(worst, std::fabs(q_piphi[i] - pi_phi));
    *commutation_residual = worst;
  }

  std::vector<QnormRow> rows;
  rows.reserve(n_max);
  GridFunction psi = phi;
  const double alpha = phi.holder_alpha();
  for (std::size_t n = 1; n <= n_max; ++n) {
    psi = q_apply(psi);
    GridFunction diff = psi;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= pi_phi;
    const double sup = diff.sup_norm();
    const double semi = holder_seminorm_estimate(op.alphabet(), diff, alpha,
                                                 2'000'000, op.anchor());
    rows.push_back({n, sup, semi});
  }
  return rows;
}

std::pair<Potential, double> normalize_potential(const TransferOperator& op,
                                                 const EigenTriple& triple,
                                                 double residual_tol) {
  const Potential f = op.potential();
  // The eigenfunction of a shallow potential is itself shallow; restrict it
  // to its effective depth so the normalized potential declares the depth it
  // actually has (a depth-2 potential stays depth-2, so the induced chain
  // keeps its two-coordinate structure).
  const double flat_tol =
      std::max(100.0 * triple.eigen_residual, 1e-10) * triple.h.max_value();
  const std::size_t h_depth = effective_cylinder_depth(triple.h, flat_tol);
  auto h = std::make_shared<const GridFunction>(
      h_depth >= 1 ? restrict_depth(triple.h, h_depth, op.anchor())
                   : grid_constant(1, op.alphabet().size(),
                                   triple.h[0]));
  // log h evaluated as a cylinder function; shifting a point reads one
  // coordinate past its own depth, which the anchor tail supplies.
  const double log_lambda = triple.log_lambda;
  auto eval = [f, h, log_lambda](const TruncatedPoint& x) {
    const double hx = h->value_at(x);
    const double hsx = h->value_at(shift(x));
    return f(x) + std::log(hx) - std::log(hsx) - log_lambda;
  };
  const double log_h_bound =
      std::max(std::fabs(std::log(triple.h.min_value())),
               std::fabs(std::log(triple.h.max_value())));
  const std::size_t depth = std::max(f.declared_depth(), h_depth + 1);
  Potential fbar(f.name() + "-normalized", std::move(eval), depth,
                 f.holder_alpha(),
                 f.sup_bound() + 2.0 * log_h_bound + std::fabs(log_lambda),
                 f.params());

  TransferOperator norm_op(fbar, op.measure(), op.grid_depth(), op.anchor(),
                           1);
  GridFunction check = norm_op.apply_log(
      grid_constant(op.grid_depth(), op.alphabet().size(), 0.0));
  double residual = 0.0;
  std::size_t worst_idx = 0;
  for (std::size_t i = 0; i < check.size(); ++i) {
    const double r = std::fabs(std::exp(check[i]) - 1.0);
    if (r > residual) {
      residual = r;
      worst_idx = i;
    }
  }
  if (residual > residual_tol)
    throw ConvergenceError(
        "normalized potential fails L 1 = 1 at grid point " +
            check.point_at(worst_idx, op.anchor()).to_string() +
            " (residual " + std::to_string(residual) + ")",
        {residual});
  return {std::move(fbar), residual};
}

double distortion_constant(const TransferOperator& op,
                           std::size_t word_len_max, std::size_t pair_budget,
                           std::uint64_t seed) {
  const std::size_t k = op.alphabet().size();
  const std::size_t depth = op.grid_depth();
  const Potential& f = op.potential();
  Rng rng(seed);

  double best = 0.0;
  TruncatedPoint x, y;
  x.anchor = y.anchor = op.anchor();
  x.word.assign(depth, 0);
  y.word.assign(depth, 0);
  std::vector<std::uint32_t> word;
  TruncatedPoint ax, ay;
  for (std::size_t it = 0; it < pair_budget; ++it) {
    for (std::size_t i = 0; i < depth; ++i) {
      x.word[i] = static_cast<std::uint32_t>(rng.next_u64() % k);
      y.word[i] = static_cast<std::uint32_t>(rng.next_u64() % k);
    }
    const double d = metric_dX(op.alphabet(), x, y);
    if (d == 0.0) continue;
    const double dpow = std::pow(d, f.holder_alpha());
    const std::size_t n =
        1 + static_cast<std::size_t>(rng.next_u64() % word_len_max);
    word.resize(n);
    for (auto& w : word)
      w = static_cast<std::uint32_t>(rng.next_u64() % k);
    ax.anchor = ay.anchor = op.anchor();
    ax.word.resize(n + depth);
    ay.word.resize(n + depth);
    std::copy(word.begin(), word.end(), ax.word.begin());
    std::copy(word.begin(), word.end(), ay.word.begin());
    std::copy(x.word.begin(), x.word.end(),
              ax.word.begin() + static_cast<std::ptrdiff_t>(n));
    std::copy(y.word.begin(), y.word.end(),
              ay.word.begin() + static_cast<std::ptrdiff_t>(n));
    const double gap = birkhoff_sum(f, ay, n) - birkhoff_sum(f, ax, n);
    best = std::max(best, std::fabs(1.0 - std::exp(gap)) / dpow);
    best = std::max(best, std::fabs(1.0 - std::exp(-gap)) / dpow);
  }
  return best;
}

double wasserstein(const Alphabet& alphabet, const DiscreteMeasure& mu,
                   const DiscreteMeasure& nu, double c_f, double alpha) {
  if (!mu.is_probability() || !nu.is_probability())
    throw UsageError("wasserstein needs probability measures");
  if (mu.size() > 5000 || nu.size() > 5000)
    throw UsageError("wasserstein supports at most 5000 atoms per side");
  const std::size_t m = mu.size(), n = nu.size();
  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] = metric_dbar(alphabet, mu.atoms()[i].point,
                                    nu.atoms()[j].point, c_f, alpha);
  std::vector<double> supply(m), demand(n);
  for (std::size_t i = 0; i < m; ++i) supply[i] = mu.atoms()[i].weight;
  for (std::size_t j = 0; j < n; ++j) demand[j] = nu.atoms()[j].weight;
  return ot::transport_cost(supply, demand, cost);
}

DiscreteMeasure product_measure(std::span<const double> site_weights,
                                std::size_t grid_depth,
                                std::uint32_t anchor) {
  const std::size_t k = site_weights.size();
  if (k == 0) throw UsageError("product measure needs site weights");
  GridFunction shape(grid_depth, k);
  std::vector<DiscreteMeasure::Atom> atoms;
  atoms.reserve(shape.size());
  for (std::size_t idx = 0; idx < shape.size(); ++idx) {
    TruncatedPoint p = shape.point_at(idx, anchor);
    double w = 1.0;
    for (auto sym : p.word) w *= site_weights[sym];
    if (w > 0.0) atoms.push_back({std::move(p), w});
  }
  DiscreteMeasure mu(std::move(atoms));
  mu.normalize();
  return mu;
}

std::vector<GridFunction> cylinder_dictionary(std::size_t nodes,
                                              std::size_t grid_depth,
                                              std::size_t count) {
  std::vector<GridFunction> dict;
  dict.reserve(count);
  for (std::size_t d = 1; d <= grid_depth && dict.size() < count; ++d) {
    std::size_t cylinders = 1;
    for (std::size_t i = 0; i < d; ++i) cylinders *= nodes;
    for (std::size_t c = 0; c < cylinders && dict.size() < count; ++c) {
      GridFunction g(grid_depth, nodes, 0.0);
      std::size_t block = g.size() / cylinders;
      for (std::size_t i = 0; i < block; ++i) g[c * block + i] = 1.0;
      dict.push_back(std::move(g));
    }
  }
  return dict;
}

}  // namespace ruelle
