#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/markov.hpp"

using namespace ruelle;

namespace {

const double kLog2 = std::log(2.0);
const double kLog3 = std::log(3.0);

SolveContext ctx2(std::size_t depth = 6) {
  return SolveContext{AprioriMeasure::uniform(Alphabet::finite(2)), depth};
}

Potential first_log3() { return first_coordinate_potential({0.0, kLog3}); }

Potential two_coord_A() {
  return two_coordinate_potential({{0.0, kLog2}, {kLog3, 0.0}});
}

Kernel normalized_kernel(const Potential& f, const SolveContext& c) {
  TransferOperator op = c.op(f);
  auto [fbar, res] = normalize_potential(op, op.eigen_triple(c.eigen));
  (void)res;
  return Kernel(std::move(fbar), c);
}

TruncatedPoint pt(std::vector<std::uint32_t> w, std::uint32_t anchor = 0) {
  return make_point(std::move(w), anchor);
}

}  // namespace

TEST_CASE("build_kernel: iid case, normalized table, rejection") {
  SolveContext c = ctx2();
  Kernel k0(constant_potential(0.0), c);
  CHECK(k0.normalization_residual() <= 1e-14);
  std::vector<double> w;
  k0.symbol_weights(pt({1, 0, 1, 0, 1, 0}), w);
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[1] == doctest::Approx(0.5));

  // normalized first-coordinate table: next-symbol law (1/4, 3/4) everywhere
  Kernel k1 = normalized_kernel(first_log3(), c);
  k1.symbol_weights(pt({0, 1, 0, 1, 0, 1}), w);
  CHECK(w[0] == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(w[1] == doctest::Approx(0.75).epsilon(1e-10));
  k1.symbol_weights(pt({1, 1, 1, 1, 1, 1}), w);
  CHECK(w[1] == doctest::Approx(0.75).epsilon(1e-10));

  // a non-normalized potential is refused with instructions
  CHECK_THROWS_AS(Kernel(first_log3(), c), UsageError);
}

TEST_CASE("step_sample: transition frequencies match the kernel") {
  SolveContext c = ctx2();
  Kernel k = normalized_kernel(two_coord_A(), c);

  // exact law at each current symbol
  std::vector<std::vector<double>> law(2, std::vector<double>(2));
  for (std::uint32_t j = 0; j < 2; ++j) {
    std::vector<double> w;
    k.symbol_weights(pt({j, 0, 0, 0, 0, 0}), w);
    law[j] = w;
  }

  Rng rng(1234);
  TruncatedPoint x = pt({0, 0, 0, 0, 0, 0});
  std::vector<std::vector<double>> counts(2, std::vector<double>(2, 0.0));
  std::vector<double> visits(2, 0.0);
  const std::size_t steps = 100000;
  for (std::size_t i = 0; i < steps; ++i) {
    const std::uint32_t from = x.word[0];
    x = step_sample(k, x, rng);
    counts[from][x.word[0]] += 1.0;
    visits[from] += 1.0;
  }
  for (int j = 0; j < 2; ++j)
    for (int a = 0; a < 2; ++a)
      CHECK(std::fabs(counts[j][a] / visits[j] - law[j][a]) <= 0.01);

  // determinism under a fixed seed
  Rng r1(9), r2(9);
  TruncatedPoint y1 = pt({1, 0, 1, 0, 1, 0}), y2 = y1;
  for (int i = 0; i < 100; ++i) {
    y1 = step_sample(k, y1, r1);
    y2 = step_sample(k, y2, r2);
    CHECK(y1.word == y2.word);
  }
}

TEST_CASE("simulate_chain: length, reproducibility, stationary marginal") {
  SolveContext c = ctx2();
  Kernel k = normalized_kernel(first_log3(), c);
  Rng rng(5);
  const TruncatedPoint x0 = sample_stationary_start(k, rng);
  const ChainTrace t = simulate_chain(k, x0, 2000, 77);
  CHECK(t.states.size() == 2001);
  const ChainTrace t2 = simulate_chain(k, x0, 2000, 77);
  for (std::size_t i = 0; i < t.states.size(); ++i)
    CHECK(t.states[i].word == t2.states[i].word);

  // one-site occupancy matches nu's marginal (1/4, 3/4)
  Rng rng2(6);
  TruncatedPoint x = sample_stationary_start(k, rng2);
  double ones = 0.0;
  const std::size_t steps = 100000;
  for (std::size_t i = 0; i < steps; ++i) {
    ones += x.word[0];
    x = step_sample(k, x, rng2);
  }
  CHECK(std::fabs(ones / double(steps) - 0.75) <= 0.01);
}

TEST_CASE("stationary marginal check: oracle for the two-coordinate kernel") {
  SolveContext c = ctx2();
  Kernel k0(constant_potential(0.0), c);
  const StationaryReport r0 = stationary_marginal_check(k0);
  CHECK(r0.residual <= 1e-12);
  CHECK(r0.marginal[0] == doctest::Approx(0.5).epsilon(1e-10));

  Kernel k = normalized_kernel(two_coord_A(), c);
  const StationaryReport r = stationary_marginal_check(k);
  CHECK(r.residual <= 1e-8);
  // oracle: stationary law of the h-transformed chain is u_j h_j (here 1/2)
  CHECK(r.marginal[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.marginal[1] == doctest::Approx(0.5).epsilon(1e-8));

  // depth-3 potentials are refused
  std::vector<std::vector<double>> a(2, std::vector<double>(2, 0.0));
  Potential depth3(
      "depth3",
      [](const TruncatedPoint& x) {
        return 0.1 * double(x.coord(0)) * double(x.coord(2));
      },
      3, 1.0, 0.1);
  TransferOperator op3 = c.op(depth3);
  auto [fbar3, res3] = normalize_potential(op3, op3.eigen_triple(c.eigen));
  (void)res3;
  Kernel k3(std::move(fbar3), c);
  CHECK_THROWS_AS(stationary_marginal_check(k3), UnsupportedCaseError);
}

TEST_CASE("geometric ergodicity: iid kernel degenerates, A-kernel fits") {
  SolveContext c = ctx2();
  Kernel k0(constant_potential(0.0), c);
  const double cf0 = distortion_constant(k0.op(), 4, 4000);
  std::vector<TruncatedPoint> starts = {pt({0, 0, 0, 0, 0, 0}),
                                        pt({1, 1, 1, 1, 1, 1})};
  const ErgodicityFit fit0 =
      geometric_ergodicity_fit(k0, starts, 6, cf0, 1.0, 4096);
  CHECK(fit0.degenerate);

  Kernel k = normalized_kernel(two_coord_A(), c);
  const double cf = distortion_constant(k.op(), 4, 8000);
  const ErgodicityFit fit =
      geometric_ergodicity_fit(k, starts, 10, cf, 1.0, 4096);
  REQUIRE(!fit.degenerate);
  const oracles::Perron2 p = oracles::perron_2x2({{0.5, 1.5}, {1.0, 0.5}});
  CHECK(std::fabs(fit.s_hat - std::fabs(p.lambda2) / p.lambda) <= 0.05);
  CHECK(fit.s_hat < 1.0);
  for (const auto& row : fit.distances)
    for (std::size_t n = 1; n < row.size(); ++n)
      CHECK(row[n] <= row[n - 1] + 1e-9);
}

TEST_CASE("operator contraction: skips identical pairs, contracts at m=4") {
  SolveContext c = ctx2();
  Kernel k = normalized_kernel(two_coord_A(), c);
  const double cf = distortion_constant(k.op(), 4, 8000);

  Rng rng(10);
  auto random_prob = [&](std::size_t atoms) {
    std::vector<DiscreteMeasure::Atom> out;
    for (std::size_t i = 0; i < atoms; ++i) {
      std::vector<std::uint32_t> w(c.grid_depth);
      for (auto& s : w) s = std::uint32_t(rng.next_u64() % 2);
      out.push_back({pt(std::move(w)), 0.1 + rng.uniform()});
    }
    DiscreteMeasure mu(std::move(out));
    mu.normalize();
    return mu;
  };

  std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs;
  DiscreteMeasure same = random_prob(4);
  pairs.emplace_back(same, same);
  for (int i = 0; i < 20; ++i) pairs.emplace_back(random_prob(5), random_prob(5));

  const ContractionReport rep =
      operator_contraction_estimate(k, pairs, 4, cf, 1.0, 4096);
  CHECK(rep.skipped_pairs == 1);
  CHECK(rep.used_pairs == 20);
  CHECK(rep.t_hat < 1.0);
  CHECK(rep.contracts);
}

TEST_CASE("operator contraction: iid kernel halves deep differences") {
  SolveContext c = ctx2();
  Kernel k0(constant_potential(0.0), c);
  // measures agreeing on coordinate 1, differing beyond it
  DiscreteMeasure a = DiscreteMeasure::dirac(pt({0, 0, 0, 0, 0, 0}));
  DiscreteMeasure b = DiscreteMeasure::dirac(pt({0, 1, 1, 1, 1, 1}));
  std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs = {{a, b}};
  // fixed c_f so distances are nonzero for the iid kernel
  const ContractionReport rep =
      operator_contraction_estimate(k0, pairs, 1, 0.05, 1.0, 4096);
  CHECK(rep.used_pairs == 1);
  CHECK(rep.t_hat <= 0.5 + 0.02);
}

TEST_CASE("clt variance: iid Bernoulli, zero observable, coboundary") {
  SolveContext c = ctx2();
  Kernel k0(constant_potential(0.0), c);

  Potential xi = first_coordinate_potential({-0.5, 0.5});
  const VarianceEstimate v =
      clt_variance(k0, xi, 50, 200000, 800, 42);
  CHECK(std::fabs(v.s2 - 0.25) <= 0.01);
  CHECK(std::fabs(v.direct_s2 - 0.25) <= 0.01);

  const VarianceEstimate z =
      clt_variance(k0, constant_potential(0.0), 10, 1000, 50, 1);
  CHECK(std::fabs(z.s2) <= 1e-12);

  // coboundary g - g o shift telescopes; the long-run variance vanishes
  Potential g = first_coordinate_potential({0.0, 1.0});
  Potential cob(
      "coboundary",
      [g](const TruncatedPoint& x) { return g(x) - g(shift(x)); }, 2, 1.0,
      2.0);
  const VarianceEstimate vc = clt_variance(k0, cob, 60, 200000, 800, 7);
  CHECK(std::fabs(vc.s2) <= 0.02);
}

TEST_CASE("clt check: iid case passes, degenerate observable refused") {
  SolveContext c = ctx2();
  Kernel k0(constant_potential(0.0), c);
  Potential xi = first_coordinate_potential({-0.5, 0.5});
  const CltResult r = clt_check(k0, xi, 0.5, 1000, 10000, 20240101);
  CHECK(r.ks_stat <= 0.02);
  CHECK(r.pass);

  CHECK_THROWS_AS(clt_check(k0, xi, 0.0, 1000, 1000, 1), UsageError);

  // determinism: identical seeds give identical statistics
  const CltResult r2 = clt_check(k0, xi, 0.5, 1000, 10000, 20240101);
  CHECK(r.ks_stat == r2.ks_stat);
}

TEST_CASE("clt check: two-coordinate kernel with a centered indicator") {
  SolveContext c = ctx2();
  Kernel k = normalized_kernel(two_coord_A(), c);
  Potential xi = first_coordinate_potential({1.0, 0.0});  // 1{x1 = 0}
  const VarianceEstimate v = clt_variance(k, xi, 50, 200000, 500, 99);
  CHECK(v.s2 > 0.0);
  const CltResult r = clt_check(k, xi, std::sqrt(v.s2), 2000, 10000, 4242);
  CHECK(r.pass);
}
