#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ruelle/alphabet.hpp"
#include "ruelle/potential.hpp"
#include "ruelle/seqspace.hpp"

namespace ruelle {

/// Weighted atoms on truncated points; the computational stand-in for Borel
/// probability measures and for iterates of the dual operator. Atoms with
/// identical induced words are merged on construction.
class DiscreteMeasure {
 public:
  struct Atom {
    TruncatedPoint point;
    double weight;
  };

  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms);
  static DiscreteMeasure dirac(TruncatedPoint x);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double total_mass() const { return total_mass_; }
  bool is_probability(double tol = 1e-10) const;

  double integrate(
      const std::function<double(const TruncatedPoint&)>& g) const;
  double integrate(const GridFunction& g) const;

  void scale(double c);
  void normalize();
  // Keeps the `cap` heaviest atoms (ties broken by word order), renormalizes
  // to the previous mass, returns the discarded mass.
  double prune(std::size_t cap);

  // Max_i |w_i - other_i| matching atoms by word; unmatched words count.
  double weight_distance(const DiscreteMeasure& other) const;

 private:
  std::vector<Atom> atoms_;  // sorted by (word, anchor)
  double total_mass_ = 0.0;
};

/// Perron data of the transfer operator: leading eigenvalue, positive
/// eigenfunction (normalized against the conformal measure), conformal
/// measure, and convergence diagnostics.
struct GapFit {
  double s_hat = 0.0;
  double c_hat = 0.0;
  double r2 = 0.0;
  bool degenerate = true;
  std::vector<double> decay;  // e_n = ||L^n 1 / (lambda^n h) - 1||_inf
};

struct EigenTriple {
  double lambda = 1.0;
  double log_lambda = 0.0;
  GridFunction h{1, 1, 1.0};
  DiscreteMeasure nu;
  double eigen_residual = 0.0;         // ||L h / lambda - h|| / ||h||
  double conformality_residual = 0.0;  // worst |<nu,L phi>/lambda - <nu,phi>|
  double birkhoff_gap = 0.0;  // |n^{-1} log L^n 1(x0) - log lambda| cross-check
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  std::optional<GapFit> gap;  // s_estimate when fitted
};

struct EigenOptions {
  double tol = 1e-13;
  std::size_t max_iter = 2000;
  std::size_t atom_cap = 4096;
  bool fit_gap = false;
  std::size_t gap_n_max = 12;
  const GridFunction* warm_start_log = nullptr;  // log h from a nearby solve
};

/// The generalized Ruelle operator bound to a potential, an a priori
/// measure, and a grid depth. Potentials deeper than depth+1 are restricted
/// to depth+1 cylinders up front, so every grid application is exact for the
/// effective potential.
class TransferOperator {
 public:
  TransferOperator(Potential f, AprioriMeasure p, std::size_t grid_depth,
                   std::uint32_t anchor = 0, int threads = 1);

  const Potential& potential() const { return f_; }
  const AprioriMeasure& measure() const { return p_; }
  const Alphabet& alphabet() const { return p_.alphabet(); }
  std::size_t grid_depth() const { return depth_; }
  std::uint32_t anchor() const { return anchor_; }
  bool truncated() const { return truncated_; }

  GridFunction ones() const;

  // (L phi)(x) = sum_a w_a e^{f(ax)} phi(ax). Throws on exp overflow.
  GridFunction apply(const GridFunction& phi) const;
  GridFunction apply_n(const GridFunction& phi, std::size_t n) const;

  // log-space application: given log phi (phi > 0) returns log(L phi);
  // stable at large |f| via log-sum-exp.
  GridFunction apply_log(const GridFunction& log_phi) const;

  // P^m_n(phi) = L^m(phi L^n 1) / L^{m+n} 1.
  GridFunction pmn_apply(const GridFunction& phi, std::size_t m,
                         std::size_t n) const;

  // Dual pushforward: each atom delta_x spreads into sum_a w_a e^{f(ax)}
  // delta_{prepend(a,x)}; atoms merged by word, pruned to `cap`, with the
  // pruned mass reported.
  DiscreteMeasure dual_apply(const DiscreteMeasure& mu, std::size_t cap,
                             double* pruned_mass = nullptr) const;

  // Dual of P^m_0: probability-preserving m-step pushforward.
  DiscreteMeasure pm0_dual_apply(const DiscreteMeasure& mu, std::size_t m,
                                 std::size_t cap,
                                 double* pruned_mass = nullptr) const;

  // Power iteration with Collatz-Wielandt bracketing for (lambda, h), dual
  // iteration for nu; residuals audited. Throws ConvergenceError with the
  // residual history when max_iter is exhausted.
  EigenTriple eigen_triple(const EigenOptions& opts = {}) const;

 private:
  Potential f_;
  AprioriMeasure p_;
  std::size_t depth_;
  std::uint32_t anchor_;
  int threads_;
  bool truncated_ = false;
};

// ||L^n 1/(lambda^n h) - 1||_inf for n = 1..n_max, with a least-squares fit
// of log e_n against n. Degenerate (s_hat = 0) when every e_n < 1e-14.
GapFit spectral_gap_estimate(const TransferOperator& op,
                             const EigenTriple& triple, std::size_t n_max);

// Decay table of the normalized operator Q(phi) = L(h phi)/(lambda h)
// against the projection Pi(phi) = integral of phi h dnu: per n reports
// ||Q^n phi - Pi phi||_inf + D_alpha(Q^n phi - Pi phi). Also audits
// Pi Q = Q Pi = Pi; the worst commutation residual is written to
// *commutation_residual when given.
struct QnormRow {
  std::size_t n;
  double sup_norm;
  double seminorm;
  double total() const { return sup_norm + seminorm; }
};
std::vector<QnormRow> qnorm_decay(const TransferOperator& op,
                                  const EigenTriple& triple,
                                  const GridFunction& phi, std::size_t n_max,
                                  double* commutation_residual = nullptr);

// fbar = f + log h - log h(shift .) - log lambda; checks ||L_fbar 1 - 1||
// on the grid against `residual_tol`.
std::pair<Potential, double> normalize_potential(const TransferOperator& op,
                                                 const EigenTriple& triple,
                                                 double residual_tol = 1e-8);

// Empirical distortion constant: max over sampled grid pairs (x,y) and
// words a of length <= word_len_max of |1 - e^{f_n(ay) - f_n(ax)}| /
// d_X(x,y)^alpha.
double distortion_constant(const TransferOperator& op,
                           std::size_t word_len_max, std::size_t pair_budget,
                           std::uint64_t seed = 0xd157u);

// Exact optimal-transport distance between discrete measures under the
// bounded ground metric dbar(x,y) = min{1, 4 c_f d_X(x,y)^alpha}.
double wasserstein(const Alphabet& alphabet, const DiscreteMeasure& mu,
                   const DiscreteMeasure& nu, double c_f, double alpha);

// Deterministic dictionary of cylinder indicator functions used for
// conformality and invariance audits.
std::vector<GridFunction> cylinder_dictionary(std::size_t nodes,
                                              std::size_t grid_depth,
                                              std::size_t count);

// The product measure with the given one-site weights materialized on the
// depth-N word grid (weight of a word = product of its symbol weights).
DiscreteMeasure product_measure(std::span<const double> site_weights,
                                std::size_t grid_depth,
                                std::uint32_t anchor = 0);

}  // namespace ruelle
