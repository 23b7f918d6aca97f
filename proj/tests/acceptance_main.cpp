// Acceptance suite: one binary, one line per criterion, exit code = number
// of failed criteria. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ruelle/config.hpp"
#include "ruelle/io.hpp"
#include "ruelle/markov.hpp"
#include "ruelle/paths.hpp"
#include "ruelle/thermo.hpp"

using namespace ruelle;
namespace fs = std::filesystem;

namespace {

const double kLog2 = std::log(2.0);
const double kLog3 = std::log(3.0);

int g_failures = 0;
std::vector<std::pair<int, std::string>> g_lines;

// Criteria run in dependency order (the beta scan feeds the entropy pool),
// so lines are buffered and printed sorted by criterion id.
void report(int id, bool pass, const std::string& label,
            const std::string& detail) {
  g_lines.emplace_back(id, std::string("criterion ") +
                               (id < 10 ? "0" : "") + std::to_string(id) +
                               " [" + (pass ? "PASS" : "FAIL") + "] " + label +
                               " — " + detail);
  std::fprintf(stderr, "  ran criterion %02d: %s\n", id,
               pass ? "pass" : "FAIL");
  if (!pass) ++g_failures;
}

void note(const std::string& text) {
  g_lines.emplace_back(g_lines.back().first, "    note: " + text);
}

std::string fmt(const char* f, ...) {
  va_list args;
  va_start(args, f);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

SolveContext ctx2(std::size_t depth = 6) {
  return SolveContext{AprioriMeasure::uniform(Alphabet::finite(2)), depth};
}

Potential first_log3() { return first_coordinate_potential({0.0, kLog3}); }

Potential two_coord_A() {
  return two_coordinate_potential({{0.0, kLog2}, {kLog3, 0.0}});
}

TruncatedPoint pt(std::vector<std::uint32_t> w, std::uint32_t anchor = 0) {
  return make_point(std::move(w), anchor);
}

Kernel normalized_kernel(const Potential& f, const SolveContext& c) {
  TransferOperator op = c.op(f);
  auto [fbar, res] = normalize_potential(op, op.eigen_triple(c.eigen));
  (void)res;
  return Kernel(std::move(fbar), c);
}

// ---------------------------------------------------------------------------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  SolveContext c = ctx2(6);
  TransferOperator op = c.op(first_log3());
  const EigenTriple t = op.eigen_triple(c.eigen);
  double h_dev = 0.0;
  for (std::size_t i = 0; i < t.h.size(); ++i)
    h_dev = std::max(h_dev, std::fabs(t.h[i] - 1.0));
  double q1 = 0.0;
  for (const auto& atom : t.nu.atoms())
    if (atom.point.word[0] == 1) q1 += atom.weight;
  const double elapsed = seconds_since(t0);
  const bool pass = std::fabs(t.lambda - 2.0) <= 1e-10 && h_dev <= 1e-10 &&
                    std::fabs(q1 - 0.75) <= 1e-10 &&
                    std::fabs((1.0 - q1) - 0.25) <= 1e-10 && elapsed < 1.0;
  report(1, pass, "eigen oracle, first-coordinate potential",
         fmt("|lambda-2|=%.2e, ||h-1||=%.2e, |nu(1)-0.75|=%.2e, %.2fs",
             std::fabs(t.lambda - 2.0), h_dev, std::fabs(q1 - 0.75), elapsed));
}

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  SolveContext c = ctx2(6);
  TransferOperator op = c.op(two_coord_A());
  const EigenTriple t = op.eigen_triple(c.eigen);
  const oracles::Perron2 p = oracles::perron_2x2({{0.5, 1.5}, {1.0, 0.5}});
  const double lambda_err = std::fabs(t.lambda - p.lambda);

  // nu cylinder oracle from the normalized left Perron eigenvector:
  // nu[y1..yN] = u(yN) prod_k (w e^{A(y_k, y_{k+1})} / lambda)
  std::vector<double> u = p.left;
  const double usum = u[0] + u[1];
  u[0] /= usum;
  u[1] /= usum;
  const double a[2][2] = {{0.0, kLog2}, {kLog3, 0.0}};
  double nu_err = 0.0;
  for (const auto& atom : t.nu.atoms()) {
    double want = u[atom.point.word.back()];
    for (std::size_t i = 0; i + 1 < atom.point.word.size(); ++i)
      want *= 0.5 *
              std::exp(a[atom.point.word[i]][atom.point.word[i + 1]]) /
              p.lambda;
    nu_err = std::max(nu_err, std::fabs(atom.weight - want));
  }
  const double elapsed = seconds_since(t0);
  const bool pass = lambda_err <= 1e-8 && nu_err <= 1e-8 && elapsed < 5.0;
  report(2, pass, "eigen oracle, two-coordinate potential",
         fmt("|lambda-(0.5+sqrt1.5)|=%.2e, nu cylinder err=%.2e, %.2fs",
             lambda_err, nu_err, elapsed));
}

void criterion_3() {
  // As pinned by the spec: order 21, tolerance 1e-8. The order-21 rule's
  // truncation error for e^{-a^2} against N(0,1) is ~4.1e-7, so this check
  // cannot pass as stated; see the decisions ledger.
  AprioriMeasure p21 = AprioriMeasure::gauss_hermite(1, 21);
  TransferOperator op(quadratic_potential(p21.alphabet(), -1.0), p21, 2);
  GridFunction r = op.apply(op.ones());
  double err21 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    err21 = std::max(err21, std::fabs(r[i] - 1.0 / std::sqrt(3.0)));
  const bool pass = err21 <= 1e-8;
  report(3, pass, "gaussian backend, L_f 1 = 3^{-1/2} at order 21",
         fmt("max err=%.3e vs tol 1e-8", err21));
  if (!pass) {
    AprioriMeasure p31 = AprioriMeasure::gauss_hermite(1, 31);
    TransferOperator op31(quadratic_potential(p31.alphabet(), -1.0), p31, 2);
    GridFunction r31 = op31.apply(op31.ones());
    double err31 = 0.0;
    for (std::size_t i = 0; i < r31.size(); ++i)
      err31 = std::max(err31, std::fabs(r31[i] - 1.0 / std::sqrt(3.0)));
    note(fmt("the order-21 rule's truncation error for this integrand is "
             "4.1e-7 (independently cross-checked); the identical code path "
             "at order 31 gives %.2e <= 1e-8", err31));
  }
}

struct Suite {
  std::vector<double> entropies;  // every computed h^v, for criterion 5
};

void criterion_4(Suite& suite) {
  SolveContext c = ctx2(6);
  const Potential f1 = first_log3();

  // (a) variational identity across the built-in Holder suite
  struct Case {
    std::string name;
    SolveContext ctx;
    Potential f;
  };
  SolveContext cg{AprioriMeasure::gauss_hermite(1, 7), 3};
  std::vector<Case> cases;
  cases.push_back({"zero", c, constant_potential(0.0)});
  cases.push_back({"constant", c, constant_potential(0.7)});
  cases.push_back({"first-coordinate", c, f1});
  cases.push_back({"two-coordinate", c, two_coord_A()});
  cases.push_back({"long-range", c,
                   long_range_potential(
                       1.0, 0.5,
                       std::vector<std::vector<double>>{{0.0, 1.0},
                                                        {1.0, 0.0}},
                       0.5)});
  cases.push_back(
      {"combination", c, linear_combination(0.6, f1, 0.4, two_coord_A())});
  cases.push_back({"quadratic-gaussian", cg,
                   quadratic_potential(cg.measure.alphabet(), -1.0)});

  double worst_identity = 0.0;
  std::string worst_name = "-";
  for (const auto& cs : cases) {
    const EquilibriumState eq = equilibrium_state(cs.f, cs.ctx, 1e-6);
    suite.entropies.push_back(eq.entropy);
    if (eq.identity_residual > worst_identity) {
      worst_identity = eq.identity_residual;
      worst_name = cs.name;
    }
  }

  // (b) ten non-equilibrium candidates: deficits >= -1e-6, product-measure
  // deficit at the closed form log2 - 0.5 log3
  const EquilibriumState eq1 = equilibrium_state(f1, c, 1e-6);
  std::vector<std::pair<std::string, DiscreteMeasure>> candidates;
  candidates.emplace_back("product-uniform",
                          product_measure(std::vector<double>{0.5, 0.5}, 6));
  candidates.emplace_back("product-37",
                          product_measure(std::vector<double>{0.3, 0.7}, 6));
  candidates.emplace_back("product-91",
                          product_measure(std::vector<double>{0.9, 0.1}, 6));
  candidates.emplace_back("product-19",
                          product_measure(std::vector<double>{0.1, 0.9}, 6));
  candidates.emplace_back("dirac-0",
                          DiscreteMeasure::dirac(pt({0, 0, 0, 0, 0, 0})));
  candidates.emplace_back("dirac-1",
                          DiscreteMeasure::dirac(pt({1, 1, 1, 1, 1, 1}, 1)));
  candidates.emplace_back(
      "equilibrium-half",
      equilibrium_state(scale_potential(f1, 0.5), c, 1e-6).measure);
  candidates.emplace_back(
      "equilibrium-double",
      equilibrium_state(scale_potential(f1, 2.0), c, 1e-6).measure);
  candidates.emplace_back("equilibrium-A",
                          equilibrium_state(two_coord_A(), c, 1e-6).measure);
  {
    std::vector<DiscreteMeasure::Atom> mix;
    for (const auto& atom : eq1.measure.atoms())
      mix.push_back({atom.point, 0.5 * atom.weight});
    for (const auto& atom :
         product_measure(std::vector<double>{0.5, 0.5}, 6).atoms())
      mix.push_back({atom.point, 0.5 * atom.weight});
    candidates.emplace_back("mixture", DiscreteMeasure(std::move(mix)));
  }

  const auto rows =
      variational_check(f1, candidates, default_entropy_dictionary(f1), c);
  double min_deficit = 1e300, product_deficit = 0.0;
  for (const auto& row : rows) {
    suite.entropies.push_back(row.entropy_estimate);
    min_deficit = std::min(min_deficit, row.deficit);
    if (row.label == "product-uniform") product_deficit = row.deficit;
  }
  const double product_want = kLog2 - 0.5 * kLog3;
  const bool pass = worst_identity <= 1e-6 && min_deficit >= -1e-6 &&
                    std::fabs(product_deficit - product_want) <= 1e-6;
  report(4, pass, "variational identity and candidate deficits",
         fmt("worst identity=%.2e (%s), min deficit=%.2e, "
             "|product deficit-0.143841|=%.2e",
             worst_identity, worst_name.c_str(), min_deficit,
             std::fabs(product_deficit - product_want)));
}

void criterion_5(const Suite& suite) {
  double worst = -1e300;
  for (double h : suite.entropies) worst = std::max(worst, h);
  const bool pass = !suite.entropies.empty() && worst <= 1e-9;
  report(5, pass, "entropy non-positivity across the suite",
         fmt("max h^v = %.2e over %zu values", worst, suite.entropies.size()));
}

void criterion_6() {
  SolveContext c = ctx2(6);
  TransferOperator op = c.op(two_coord_A());
  const EigenTriple t = op.eigen_triple(c.eigen);
  const GapFit g = spectral_gap_estimate(op, t, 14);
  // least squares restricted to n = 2..14 per the criterion
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t n = 2; n <= 14; ++n) {
    const double e = g.decay[n - 1];
    if (e <= 1e-14) continue;
    const double x = double(n), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  const double det = double(m) * sxx - sx * sx;
  const double slope = (double(m) * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / double(m);
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / double(m);
  for (std::size_t n = 2; n <= 14; ++n) {
    const double e = g.decay[n - 1];
    if (e <= 1e-14) continue;
    const double y = std::log(e);
    ss_res += std::pow(y - intercept - slope * double(n), 2);
    ss_tot += std::pow(y - mean, 2);
  }
  const double r2 = 1.0 - ss_res / ss_tot;
  const double s_hat = std::exp(slope);
  const oracles::Perron2 p = oracles::perron_2x2({{0.5, 1.5}, {1.0, 0.5}});
  const double want = std::fabs(p.lambda2) / p.lambda;
  const bool pass = std::fabs(s_hat - want) <= 0.05 && r2 >= 0.99;
  report(6, pass, "spectral-gap fit against the eigenvalue-ratio oracle",
         fmt("s_hat=%.6f (oracle %.6f), R^2=%.6f over n=2..14", s_hat, want,
             r2));
}

void criterion_7() {
  SolveContext c = ctx2(6);
  TransferOperator op = c.op(two_coord_A());
  const EigenTriple t = op.eigen_triple(c.eigen);

  std::vector<GridFunction> phis = cylinder_dictionary(2, 6, 4);
  GridFunction centered(6, 2);
  std::vector<std::uint32_t> w(6);
  for (std::size_t i = 0; i < centered.size(); ++i) {
    centered.index_to_word(i, w);
    centered[i] = double(w[0]) - 0.5;
  }
  phis.push_back(std::move(centered));

  bool decreasing = true;
  double worst_commut = 0.0;
  for (const auto& phi : phis) {
    double commut = 0.0;
    const auto rows = qnorm_decay(op, t, phi, 10, &commut);
    worst_commut = std::max(worst_commut, commut);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double prev = rows[i - 1].total(), cur = rows[i].total();
      if (prev <= 1e-13) continue;  // at the noise floor already
      if (cur > 0.95 * prev + 1e-13) decreasing = false;
    }
  }
  const bool pass = decreasing && worst_commut <= 1e-9;
  report(7, pass, "quasi-compactness decay and Pi Q = Q Pi = Pi",
         fmt("geometric decrease=%s over 5 test functions, commutation "
             "residual=%.2e",
             decreasing ? "yes" : "no", worst_commut));
}

void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  SolveContext c = ctx2(12);  // 4096 grid words: the atom cap is saturated
  c.eigen.atom_cap = 4096;
  Kernel k = normalized_kernel(two_coord_A(), c);
  const double cf = distortion_constant(k.op(), 4, 20000);
  std::vector<TruncatedPoint> starts = {pt(std::vector<std::uint32_t>(12, 0)),
                                        pt(std::vector<std::uint32_t>(12, 1))};
  const ErgodicityFit fit =
      geometric_ergodicity_fit(k, starts, 10, cf, 1.0, 4096);
  bool nonincreasing = true;
  for (const auto& row : fit.distances)
    for (std::size_t n = 1; n < row.size(); ++n)
      if (row[n] > row[n - 1] + 1e-9) nonincreasing = false;
  const double elapsed = seconds_since(t0);
  const bool pass = !fit.degenerate && fit.r2 >= 0.99 && fit.s_hat < 1.0 &&
                    nonincreasing && elapsed < 30.0;
  report(8, pass, "geometric ergodicity of the two-coordinate kernel",
         fmt("s_hat=%.4f, R^2=%.4f, nonincreasing=%s, %.1fs at cap 4096",
             fit.s_hat, fit.r2, nonincreasing ? "yes" : "no", elapsed));
}

void criterion_9() {
  SolveContext c = ctx2(6);
  Rng rng(0xC0117);
  auto random_prob = [&](std::size_t atoms) {
    std::vector<DiscreteMeasure::Atom> out;
    for (std::size_t i = 0; i < atoms; ++i) {
      std::vector<std::uint32_t> w(6);
      for (auto& s : w) s = std::uint32_t(rng.next_u64() % 2);
      out.push_back({pt(std::move(w)), 0.1 + rng.uniform()});
    }
    DiscreteMeasure mu(std::move(out));
    mu.normalize();
    return mu;
  };

  bool pass = true;
  std::string detail;
  for (const auto& [name, f] : std::vector<std::pair<std::string, Potential>>{
           {"first-coordinate", first_log3()},
           {"two-coordinate", two_coord_A()}}) {
    Kernel k = normalized_kernel(f, c);
    // depth-1 normalized potentials audit to zero distortion; any positive
    // constant still defines the bounded metric the theorem contracts in
    const double cf = std::max(distortion_constant(k.op(), 4, 20000), 0.5);
    std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs;
    for (int i = 0; i < 20; ++i)
      pairs.emplace_back(random_prob(5), random_prob(5));
    const ContractionReport rep =
        operator_contraction_estimate(k, pairs, 4, cf, 1.0, 4096);
    pass = pass && rep.used_pairs == 20 && rep.t_hat < 1.0;
    detail += fmt("%s t_hat=%.4f ", name.c_str(), rep.t_hat);
  }
  report(9, pass, "Markov operator contraction at m=4", detail);
}

void criterion_10() {
  const auto t0 = std::chrono::steady_clock::now();
  SolveContext c = ctx2(6);

  // iid kernel, centered coordinate
  Kernel k0(constant_potential(0.0), c);
  Potential xi = first_coordinate_potential({-0.5, 0.5});
  const VarianceEstimate v0 = clt_variance(k0, xi, 50, 200000, 500, 1111);
  const CltResult iid = clt_check(k0, xi, std::sqrt(v0.s2), 1000, 10000, 555);

  // two-coordinate kernel with a centered indicator
  Kernel kA = normalized_kernel(two_coord_A(), c);
  Potential ind = first_coordinate_potential({1.0, 0.0});
  const VarianceEstimate vA = clt_variance(kA, ind, 50, 200000, 500, 2222);
  const CltResult markov =
      clt_check(kA, ind, std::sqrt(vA.s2), 2000, 10000, 777);

  // n^{-1/2} rate: ks * sqrt(n) bounded within a factor 3 across n
  double lo = 1e300, hi = 0.0;
  for (std::size_t n : {250u, 1000u, 4000u}) {
    const CltResult r = clt_check(k0, xi, std::sqrt(v0.s2), n, 10000, 555);
    const double scaled = r.ks_stat * std::sqrt(double(n));
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  const double elapsed = seconds_since(t0);
  const bool pass = iid.ks_stat <= 0.02 && markov.pass && hi / lo <= 3.0 &&
                    elapsed < 60.0;
  report(10, pass, "CLT with rate",
         fmt("iid ks=%.4f (<=0.02), markov ks=%.4f (bar %.4f), "
             "rate spread=%.2f (<=3), %.1fs",
             iid.ks_stat, markov.ks_stat, markov.threshold, hi / lo, elapsed));
}

void criterion_11(Suite& suite) {
  SolveContext c = ctx2(6);
  const Potential f = first_log3();
  const auto rows = beta_scan(f, {1.0, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0}, c);
  bool converged = true;
  for (const auto& r : rows) {
    converged = converged && r.converged;
    if (r.converged) suite.entropies.push_back(r.entropy);
  }
  const double f_int = rows.back().f_integral;

  // marginal mass on symbol 1 at beta = 50
  const EquilibriumState eq =
      equilibrium_state(scale_potential(f, 50.0), c, 1e-6);
  double m1 = 0.0;
  for (const auto& atom : eq.measure.atoms())
    if (atom.point.word[0] == 1) m1 += atom.weight;

  const bool pass =
      converged && std::fabs(f_int - kLog3) <= 1e-9 && m1 >= 1.0 - 1e-9;
  report(11, pass, "beta-scan ground state at beta=50",
         fmt("|<f>-log3|=%.2e, mass(1)=1-%.2e", std::fabs(f_int - kLog3),
             1.0 - m1));
}

void criterion_12() {
  SolveContext c = ctx2(6);
  const auto rows = pressure_convexity_probe(
      first_log3(), constant_potential(0.0), {0.25, 0.5, 0.75}, c);
  double min_slack = 1e300;
  for (const auto& r : rows) min_slack = std::min(min_slack, r.slack);
  const double midpoint_want = std::log((1.0 + std::sqrt(3.0)) / 2.0);
  const double mid_err = std::fabs(rows[1].log_lambda - midpoint_want);
  const bool pass = min_slack >= -1e-9 && mid_err <= 1e-8;
  report(12, pass, "pressure convexity probe",
         fmt("min slack=%.2e, |midpoint-log((1+sqrt3)/2)|=%.2e", min_slack,
             mid_err));
}

void criterion_13() {
  Alphabet alph = Alphabet::finite(2);
  Rng rng(0x0113);
  auto random_prob = [&](std::size_t atoms, std::size_t depth) {
    std::vector<DiscreteMeasure::Atom> out;
    for (std::size_t i = 0; i < atoms; ++i) {
      std::vector<std::uint32_t> w(depth);
      for (auto& s : w) s = std::uint32_t(rng.next_u64() % 2);
      out.push_back({pt(std::move(w)), 0.05 + rng.uniform()});
    }
    DiscreteMeasure mu(std::move(out));
    mu.normalize();
    return mu;
  };

  double worst_gap = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    DiscreteMeasure a = random_prob(2 + inst % 3, 4);
    DiscreteMeasure b = random_prob(2 + (inst + 1) % 3, 4);
    std::vector<double> s, d, cost;
    for (const auto& atom : a.atoms()) s.push_back(atom.weight);
    for (const auto& atom : b.atoms()) d.push_back(atom.weight);
    for (const auto& x : a.atoms())
      for (const auto& y : b.atoms())
        cost.push_back(metric_dbar(alph, x.point, y.point, 0.7, 1.0));
    const double got = wasserstein(alph, a, b, 0.7, 1.0);
    const double want = oracles::transport_vertex_oracle(s, d, cost);
    worst_gap = std::max(worst_gap, std::fabs(got - want));
  }

  double worst_triangle = 0.0, worst_symmetry = 0.0;
  for (int it = 0; it < 100; ++it) {
    DiscreteMeasure a = random_prob(4, 4);
    DiscreteMeasure b = random_prob(4, 4);
    DiscreteMeasure mid = random_prob(4, 4);
    const double ab = wasserstein(alph, a, b, 0.7, 1.0);
    const double ba = wasserstein(alph, b, a, 0.7, 1.0);
    const double ac = wasserstein(alph, a, mid, 0.7, 1.0);
    const double cb = wasserstein(alph, mid, b, 0.7, 1.0);
    worst_symmetry = std::max(worst_symmetry, std::fabs(ab - ba));
    worst_triangle = std::max(worst_triangle, ab - ac - cb);
  }
  const bool pass =
      worst_gap <= 1e-10 && worst_triangle <= 1e-9 && worst_symmetry <= 1e-10;
  report(13, pass, "Wasserstein against the exhaustive vertex oracle",
         fmt("max |OT-oracle|=%.2e, triangle slack=%.2e, symmetry=%.2e",
             worst_gap, worst_triangle, worst_symmetry));
}

void criterion_14() {
  Rng rng(0x14);
  double worst_h = 0.0;
  for (int it = 0; it < 20; ++it) {
    const int dim = 1 + int(rng.next_u64() % 3);
    const paths::PolygonalPath a = paths::sample_path(dim, 5, rng);
    const paths::PolygonalPath b = paths::sample_path(dim, 5, rng);
    worst_h = std::max(worst_h,
                       std::fabs(paths::hausdorff_distance(a, b, 4096) -
                                 paths::hausdorff_distance(a, b, 10000)));
  }

  const paths::PathPotential f(1.0, 0.5, 0.5, 40);
  bool bounds_ok = true;
  double shift_residual = 0.0;
  for (int it = 0; it < 1000; ++it) {
    std::vector<paths::PolygonalPath> seq;
    for (int i = 0; i < 6; ++i) seq.push_back(paths::sample_path(2, 4, rng));
    const double v = f(seq);
    if (v > 0.0 || v < f.lower_bound() - 1e-12) bounds_ok = false;
    if (it < 30) {
      std::vector<paths::PolygonalPath> moved = seq;
      for (auto& p : moved)
        for (auto& cc : p.coords) cc += 1.75;
      shift_residual = std::max(shift_residual, std::fabs(f(moved) - v));
    }
  }

  // stderr scaling: doubling the sample count shrinks it by about sqrt 2
  const paths::GaussianPathMeasure measure(2, 4, 400, 77);
  std::vector<paths::PolygonalPath> state;
  for (int i = 0; i < 6; ++i) state.push_back(measure.sample(rng));
  auto phi = [](std::span<const paths::PolygonalPath> seq) {
    return seq[0].vertex(0)[0] > 0 ? 1.0 : 0.25;
  };
  double ratio = 0.0;
  const int reps = 10;
  for (int r = 0; r < reps; ++r) {
    const paths::McEstimate a =
        paths::mc_apply(f, phi, state, measure, 1500, 300 + r);
    const paths::McEstimate b =
        paths::mc_apply(f, phi, state, measure, 3000, 900 + r);
    ratio += a.stderr_value / b.stderr_value;
  }
  ratio /= reps;
  const double want = std::sqrt(2.0);
  const bool pass = worst_h <= 1e-3 && bounds_ok && shift_residual <= 1e-10 &&
                    std::fabs(ratio - want) <= 0.2 * want;
  report(14, pass, "paths demo: Hausdorff oracle, bounds, MC scaling",
         fmt("hausdorff gap=%.2e, bounds=%s, translation=%.2e, "
             "stderr ratio=%.3f (sqrt2 +-20%%)",
             worst_h, bounds_ok ? "ok" : "violated", shift_residual, ratio));
}

void criterion_15() {
  const fs::path dir = fs::temp_directory_path() / "ruelle_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);

  nlohmann::json cfg = {
      {"alphabet", {{"kind", "finite"}, {"nodes", 2}}},
      {"potential",
       {{"family", "first-coordinate"}, {"values", {0.0, kLog3}}}},
      {"depth", {{"grid", 6}}},
      {"seed", 90210},
      {"betascan", {{"betas", {0.5, 1.0, 2.0, 4.0, 8.0}}}},
      {"markov", {{"length", 2000}}}};
  const fs::path conf = dir / "config.json";
  {
    std::ofstream out(conf);
    out << cfg.dump(2);
  }

  auto run = [&](const std::string& command, const fs::path& out) {
    fs::create_directories(out);
    std::ostringstream cmd;
    cmd << '"' << RUELLE_CLI_PATH << "\" " << command << " --config " << conf
        << " --out " << out << " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.str().c_str()));
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  bool pass = true;
  std::string detail;
  for (const auto& [command, sidecar] :
       std::vector<std::pair<std::string, std::string>>{
           {"eigen", "nu.csv"},
           {"betascan", "scan.csv"},
           {"markov-sim", "trace.csv"}}) {
    const fs::path o1 = dir / (command + "-1"), o2 = dir / (command + "-2");
    const int rc1 = run(command, o1);
    const int rc2 = run(command, o2);
    const std::string b1 = slurp(o1 / sidecar), b2 = slurp(o2 / sidecar);
    const bool same = rc1 == 0 && rc2 == 0 && !b1.empty() && b1 == b2;
    pass = pass && same;
    detail += command + (same ? "=identical " : "=DIFFERS ");
  }
  report(15, pass, "byte-identical reruns of CLI subcommands", detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite (tolerances pinned in code)\n");
  Suite suite;
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4(suite);
  criterion_11(suite);  // runs early so its entropies join the pool
  criterion_5(suite);
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_12();
  criterion_13();
  criterion_14();
  criterion_15();
  std::stable_sort(g_lines.begin(), g_lines.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [id, line] : g_lines) std::printf("%s\n", line.c_str());
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
