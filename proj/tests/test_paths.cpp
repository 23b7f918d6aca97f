#include <doctest.h>

#include <cmath>

#include "ruelle/errors.hpp"
#include "ruelle/paths.hpp"

using namespace ruelle;
using namespace ruelle::paths;

TEST_CASE("sampled paths: interpolation endpoints and midpoints") {
  Rng rng(3);
  const PolygonalPath p = sample_path(2, 5, rng);
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto v = path_point(p, double(n));
    const auto q = p.vertex(n - 1);
    CHECK(v[0] == doctest::Approx(q[0]));
    CHECK(v[1] == doctest::Approx(q[1]));
  }
  const auto mid = path_point(p, 2.5);
  const auto q2 = p.vertex(1);
  const auto q3 = p.vertex(2);
  CHECK(mid[0] == doctest::Approx(0.5 * (q2[0] + q3[0])));
  CHECK(mid[1] == doctest::Approx(0.5 * (q2[1] + q3[1])));
}

TEST_CASE("sampled paths: vertex mean near zero over many draws") {
  Rng rng(8);
  double mean0 = 0.0, mean1 = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const PolygonalPath p = sample_path(2, 4, rng);
    for (std::size_t v = 0; v < 4; ++v) {
      mean0 += p.vertex(v)[0];
      mean1 += p.vertex(v)[1];
    }
  }
  mean0 /= draws * 4;
  mean1 /= draws * 4;
  CHECK(std::fabs(mean0) <= 0.05);
  CHECK(std::fabs(mean1) <= 0.05);
}

TEST_CASE("hausdorff: identical paths, symmetry, translation") {
  Rng rng(21);
  const PolygonalPath a = sample_path(2, 5, rng);
  CHECK(hausdorff_distance(a, a, 64) == 0.0);

  const PolygonalPath b = sample_path(2, 5, rng);
  CHECK(hausdorff_distance(a, b, 256) ==
        doctest::Approx(hausdorff_distance(b, a, 256)));

  // shifting by v moves no point farther than ||v||
  PolygonalPath shifted = a;
  for (std::size_t i = 0; i < shifted.coords.size(); i += 2) {
    shifted.coords[i] += 0.3;
    shifted.coords[i + 1] -= 0.4;
  }
  const double d = hausdorff_distance(a, shifted, 2048);
  CHECK(d <= 0.5 + 1e-9);
  CHECK(d > 0.0);
}

TEST_CASE("hausdorff: implementation matches the dense-sampling oracle") {
  Rng rng(5);
  for (int it = 0; it < 20; ++it) {
    const int dim = 1 + int(rng.next_u64() % 3);
    const PolygonalPath a = sample_path(dim, 5, rng);
    const PolygonalPath b = sample_path(dim, 5, rng);
    const double got = hausdorff_distance(a, b, 4096);
    const double oracle = hausdorff_distance(a, b, 10000);
    CHECK(std::fabs(got - oracle) <= 1e-3);
  }
}

TEST_CASE("hausdorff: triangle inequality within the resolution error") {
  Rng rng(33);
  for (int it = 0; it < 15; ++it) {
    const PolygonalPath a = sample_path(2, 4, rng);
    const PolygonalPath b = sample_path(2, 4, rng);
    const PolygonalPath c = sample_path(2, 4, rng);
    const double ab = hausdorff_distance(a, b, 1024);
    const double ac = hausdorff_distance(a, c, 1024);
    const double cb = hausdorff_distance(c, b, 1024);
    CHECK(ab <= ac + cb + 0.02);
  }
}

TEST_CASE("path potential: all-equal vanishes, separation saturates") {
  const PathPotential f(1.0, 0.5, 0.5, 40);
  Rng rng(2);
  const PolygonalPath g = sample_path(2, 4, rng);
  std::vector<PolygonalPath> same(8, g);
  CHECK(f(same) == 0.0);

  // widely separated: every factor with n >= 2 saturates to 1 (the n = 1
  // term is the self-distance and always vanishes), so the sum approaches
  // -J0 sum_{n>=2} r^n = -J0 r^2/(1-r)
  std::vector<PolygonalPath> far;
  far.push_back(g);
  for (int n = 1; n < 45; ++n) {
    PolygonalPath moved = g;
    for (auto& cc : moved.coords) cc += 1.0e6;
    far.push_back(moved);
  }
  const double saturated = -1.0 * 0.5 * 0.5 / (1.0 - 0.5);
  CHECK(f(far) == doctest::Approx(saturated).epsilon(1e-2));
}

TEST_CASE("path potential: bounds and translation invariance") {
  const PathPotential f(2.0, 0.6, 0.5, 50);
  Rng rng(14);
  double worst_shift = 0.0;
  for (int it = 0; it < 1000; ++it) {
    std::vector<PolygonalPath> seq;
    for (int i = 0; i < 6; ++i) seq.push_back(sample_path(2, 4, rng));
    const double v = f(seq);
    CHECK(v <= 0.0);
    CHECK(v >= f.lower_bound() - 1e-12);
    if (it < 25) {
      std::vector<PolygonalPath> moved = seq;
      for (auto& p : moved)
        for (auto& cc : p.coords) cc += 3.25;
      worst_shift = std::max(worst_shift, std::fabs(f(moved) - v));
    }
  }
  CHECK(worst_shift <= 1e-10);
}

TEST_CASE("path potential: truncation guard") {
  CHECK_THROWS_AS(PathPotential(1.0, 0.5, 0.5, 5), UsageError);
}

TEST_CASE("mc_apply: exact for f = 0-like setups and monotone in phi") {
  const GaussianPathMeasure measure(2, 4, 500, 99);
  Rng rng(1);
  std::vector<PolygonalPath> x;
  for (int i = 0; i < 6; ++i) x.push_back(measure.sample(rng));

  // phi = 1 with the all-equal potential evaluated at f = 0 configurations is
  // not available; instead check the bounds e^{lb} <= value <= 1 for phi = 1.
  const PathPotential f(1.0, 0.5, 0.5, 40);
  auto one = [](std::span<const PolygonalPath>) { return 1.0; };
  const McEstimate est = mc_apply(f, one, x, measure, 500, 7);
  CHECK(est.value <= 1.0 + 1e-12);
  CHECK(est.value >= std::exp(f.lower_bound()) - 1e-12);

  // monotonicity under phi <= psi at a fixed seed
  auto half = [](std::span<const PolygonalPath>) { return 0.5; };
  const McEstimate est_half = mc_apply(f, half, x, measure, 500, 7);
  CHECK(est_half.value <= est.value);
}

TEST_CASE("mc_apply: standard error shrinks like sqrt(2) when doubling") {
  const GaussianPathMeasure measure(2, 4, 400, 5);
  Rng rng(77);
  std::vector<PolygonalPath> x;
  for (int i = 0; i < 6; ++i) x.push_back(measure.sample(rng));
  const PathPotential f(1.0, 0.5, 0.5, 40);
  auto phi = [](std::span<const PolygonalPath> seq) {
    return seq[0].vertex(0)[0] > 0 ? 1.0 : 0.25;
  };
  // average the stderr ratio over repeated seeds
  double ratio = 0.0;
  const int reps = 12;
  for (int r = 0; r < reps; ++r) {
    const McEstimate a = mc_apply(f, phi, x, measure, 1000, 100 + r);
    const McEstimate b = mc_apply(f, phi, x, measure, 2000, 900 + r);
    ratio += a.stderr_value / b.stderr_value;
  }
  ratio /= reps;
  CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("gaussian path measure: integrate is deterministic per seed") {
  const GaussianPathMeasure m1(2, 4, 300, 55);
  const GaussianPathMeasure m2(2, 4, 300, 55);
  auto g = [](const PolygonalPath& p) { return p.vertex(0)[0]; };
  CHECK(m1.integrate(g) == m2.integrate(g));
}

TEST_CASE("validation") {
  Rng rng(0);
  CHECK_THROWS_AS(sample_path(0, 4, rng), UsageError);
  CHECK_THROWS_AS(sample_path(2, 1, rng), UsageError);
  const PolygonalPath a = sample_path(2, 4, rng);
  const PolygonalPath b = sample_path(2, 5, rng);
  CHECK_THROWS_AS(hausdorff_distance(a, b, 64), UsageError);
  const PolygonalPath c3 = sample_path(3, 4, rng);
  CHECK_THROWS_AS(hausdorff_distance(a, c3, 64), UsageError);
}
