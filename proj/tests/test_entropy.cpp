#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "salvox/histogram.hpp"
#include "salvox/phantom.hpp"
#include "salvox/rng.hpp"
#include "salvox/window.hpp"

using namespace salvox;

TEST_CASE("entropy of reference histograms") {
  CHECK(entropy_bits(Histogram::delta(16, 3)) == 0.0);
  CHECK(entropy_bits(Histogram::uniform(256)) == doctest::Approx(8.0).epsilon(1e-12));

  Histogram h(4);
  h.p = {0.5, 0.25, 0.25, 0.0};
  h.normalized = true;
  CHECK(entropy_bits(h) == doctest::Approx(1.5).epsilon(1e-12));  // -sum p log2 p by hand

  Histogram un(4);
  un.p = {0.5, 0.2, 0.2, 0.0};
  un.normalized = true;  // lies about its mass
  CHECK_THROWS_AS(entropy_bits(un), std::invalid_argument);
}

TEST_CASE("mixture entropy endpoints match the closed form") {
  CHECK(mixture_entropy(0.0, 64) == 0.0);
  CHECK(mixture_entropy(1.0, 256) == doctest::Approx(std::log(256.0)).epsilon(1e-14));
  CHECK_THROWS_AS(mixture_entropy(-0.1, 8), std::domain_error);
  CHECK_THROWS_AS(mixture_entropy(1.1, 8), std::domain_error);
}

TEST_CASE("mixture entropy equals entropy of the explicit mixture pmf") {
  // alpha blends a uniform over M bins into a delta, all in one shared bin 0.
  Rng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = rng.next_double();
    const int m = 2 + int(rng.next_below(300));
    Histogram h(m);
    h.p[0] = alpha / m + (1.0 - alpha);
    for (int b = 1; b < m; ++b) h.p[b] = alpha / m;
    h.normalized = true;
    CHECK(mixture_entropy(alpha, m) == doctest::Approx(entropy_nats(h)).epsilon(1e-9));
  }
  // the spec's spot value
  Histogram h16(16);
  h16.p[0] = 0.5 / 16 + 0.5;
  for (int b = 1; b < 16; ++b) h16.p[b] = 0.5 / 16;
  h16.normalized = true;
  CHECK(mixture_entropy(0.5, 16) == doctest::Approx(entropy_nats(h16)).epsilon(1e-12));
}

TEST_CASE("mixture entropy derivative: sign, endpoint, finite differences") {
  CHECK(mixture_entropy_derivative(1.0, 64) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(mixture_entropy_derivative(0.1, 4) > 0.0);
  CHECK_THROWS_AS(mixture_entropy_derivative(0.0, 4), std::domain_error);

  const double h = 1e-6;
  for (int m : {2, 4, 16, 256}) {
    for (double alpha = 0.05; alpha <= 0.951; alpha += 0.05) {
      const double fd = (mixture_entropy(alpha + h, m) - mixture_entropy(alpha - h, m)) / (2 * h);
      const double an = mixture_entropy_derivative(alpha, m);
      CHECK(std::abs(fd - an) / std::abs(an) < 1e-5);
    }
  }
}

TEST_CASE("mixture entropy is strictly increasing on (0,1)") {
  for (int m : {2, 3, 4, 16, 64, 256, 1024}) {
    double prev = mixture_entropy(0.0, m);
    for (int i = 1; i <= 100; ++i) {
      const double a = i / 100.0;
      const double cur = mixture_entropy(a, m);
      CHECK(cur > prev);
      prev = cur;
    }
    CHECK(prev == doctest::Approx(std::log(double(m))).epsilon(1e-12));
  }
}

TEST_CASE("bhattacharyya identities") {
  const auto u4 = Histogram::uniform(4);
  CHECK(bhattacharyya(u4, u4) == doctest::Approx(1.0).epsilon(1e-12));

  Histogram p(4), q(4);
  p.p = {0.5, 0.5, 0.0, 0.0};
  q.p = {0.0, 0.0, 0.5, 0.5};
  p.normalized = q.normalized = true;
  CHECK(bhattacharyya(p, q) == 0.0);

  q.p = {0.25, 0.25, 0.25, 0.25};
  CHECK(bhattacharyya(p, q) == doctest::Approx(std::sqrt(0.125) * 2).epsilon(1e-12));  // 0.7071

  CHECK_THROWS_AS(bhattacharyya(p, Histogram::uniform(8)), std::invalid_argument);
}

TEST_CASE("bhattacharyya properties: symmetric, bounded, 1 iff equal") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + int(rng.next_below(64));
    Histogram p(m), q(m);
    for (int b = 0; b < m; ++b) {
      p.p[b] = rng.next_double();
      q.p[b] = rng.next_double();
    }
    p.normalize();
    q.normalize();
    const double pq = bhattacharyya(p, q);
    CHECK(pq == doctest::Approx(bhattacharyya(q, p)).epsilon(1e-12));
    CHECK(pq <= 1.0);
    CHECK(pq >= 0.0);
    if (std::abs(pq - 1.0) < 1e-12) {
      for (int b = 0; b < m; ++b) CHECK(p.p[b] == doctest::Approx(q.p[b]).epsilon(1e-6));
    }
  }
}

TEST_CASE("importance weights") {
  const auto q = Histogram::uniform(8);
  Histogram p(8);
  p.p = {0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125};
  p.normalized = true;
  CHECK(weight_for_bin(p, q, 3) == doctest::Approx(1.0));

  Histogram p2(4), q2(4);
  p2.p = {0.125, 0.375, 0.25, 0.25};
  q2.p = {0.5, 0.1, 0.2, 0.2};
  p2.normalized = q2.normalized = true;
  CHECK(weight_for_bin(p2, q2, 0) == doctest::Approx(2.0));  // sqrt(0.5/0.125)

  Histogram p3(4);
  p3.p = {0.0, 0.5, 0.25, 0.25};
  p3.normalized = true;
  const double w = weight_for_bin(p3, q2, 0);
  CHECK(std::isfinite(w));
  CHECK(w == doctest::Approx(std::sqrt(0.5 / 1e-6)));
}

namespace {

std::pair<Volume, GroundTruth> box_phantom(int dim, int half, int levels, uint64_t seed) {
  PhantomSpec spec;
  spec.dims = {dim, dim, dim};
  RegionSpec r;
  r.shape = RegionSpec::Shape::Box;
  const double c = (dim - 1) / 2.0;
  r.center = {c, c, c};
  r.half_extents = {double(half), double(half), double(half)};
  r.fill.levels = levels;
  spec.regions.push_back(r);
  spec.rng_seed = seed;
  return make_phantom(spec);
}

}  // namespace

TEST_CASE("candidate histogram: delta on constant volumes") {
  Volume v(16, 16, 16);
  for (float& f : v.data()) f = 5.0f;
  IntensityWindow iw(0, 64, 64);
  const auto win = EllipsoidWindow::isotropic({8, 8, 8}, 5.0, false);
  for (Kernel k : {Kernel::Identity, Kernel::Epanechnikov, Kernel::Gaussian}) {
    const Histogram h = candidate_histogram(v, win, iw, k);
    CHECK(entropy_bits(h) == 0.0);
    CHECK(h.p[iw.bin_of(5.0)] == doctest::Approx(1.0));
  }
}

TEST_CASE("candidate histogram: identity kernel over a uniform box region") {
  auto [v, gt] = box_phantom(48, 12, 16, 11);  // 25^3 box, >= 16^3
  IntensityWindow iw(0, 16, 16);
  const double c = (48 - 1) / 2.0;
  // cubic box window fully inside the region: half extents 8 -> inscribed ball
  const auto win = EllipsoidWindow::from_half_extents({c, c, c}, {8, 8, 8});

  const Histogram h = candidate_histogram(v, win, iw, Kernel::Identity);
  CHECK(std::abs(entropy_bits(h) - 4.0) < 0.3);

  // Direct voxel histogram over the same support agrees on the noise bound.
  Histogram direct(16);
  for_each_support_voxel(v, win, [&](int x, int y, int z, double) {
    direct.p[iw.bin_of(v.at(x, y, z))] += 1.0;
  });
  direct.normalize();
  CHECK(std::abs(entropy_bits(direct) - 4.0) < 0.3);
}

TEST_CASE("candidate histogram stays normalized under boundary clipping") {
  auto [v, gt] = box_phantom(32, 8, 64, 3);
  IntensityWindow iw(0, 64, 64);
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    // centers near corners and faces so supports clip
    const Eigen::Vector3d c(rng.next_range(0, 31), rng.next_range(0, 31), rng.next_range(0, 4));
    const auto h =
        try_candidate_histogram(v, EllipsoidWindow::isotropic(c, 6.0, false), iw, Kernel::Identity);
    REQUIRE(h.has_value());
    CHECK(h->mass() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("candidate histogram: empty support is degenerate") {
  Volume v(8, 8, 8);
  IntensityWindow iw(0, 8, 8);
  EllipsoidWindow win = EllipsoidWindow::isotropic({4, 4, 4}, 0.5, false);
  // support radius < 1 voxel: only the center voxel, identity kernel weight 0
  CHECK(!try_candidate_histogram(v, win, iw, Kernel::Identity).has_value());
  CHECK_THROWS_AS(candidate_histogram(v, win, iw, Kernel::Identity), std::invalid_argument);
}

TEST_CASE("pdf difference: zero on constant volumes") {
  Volume v(32, 32, 32);
  for (float& f : v.data()) f = 9.0f;
  IntensityWindow iw(0, 64, 64);
  CHECK(pdf_difference(v, Eigen::Vector3d(16, 16, 16), iw, 6.0, Kernel::Epanechnikov) == 0.0);
}

TEST_CASE("pdf difference peaks at the region boundary scale") {
  PhantomSpec spec;
  spec.dims = {48, 48, 48};
  RegionSpec r;
  r.shape = RegionSpec::Shape::Ball;
  r.center = {23.5, 23.5, 23.5};
  r.radius = 10.0;
  r.fill.levels = 64;
  spec.regions.push_back(r);
  spec.rng_seed = 31;
  auto [v, gt] = make_phantom(spec);
  IntensityWindow iw(0, 64, 64);

  const Eigen::Vector3d c = r.center;
  const double at_radius = pdf_difference(v, c, iw, 10.0, Kernel::Epanechnikov);
  const double inside = pdf_difference(v, c, iw, 5.0, Kernel::Epanechnikov);
  CHECK(at_radius > inside);
}

TEST_CASE("pdf difference decays deep inside a homogeneous region") {
  auto [v, gt] = box_phantom(64, 24, 64, 13);  // 49^3 noisy box
  IntensityWindow iw(0, 64, 64);
  const double c = (64 - 1) / 2.0;
  const double small_win = pdf_difference(v, Eigen::Vector3d(c, c, c), iw, 4.0, Kernel::Epanechnikov);
  const double large_win = pdf_difference(v, Eigen::Vector3d(c, c, c), iw, 16.0, Kernel::Epanechnikov);
  // the s^2-normalized L1 shrinks as the window grows inside pure noise
  CHECK(large_win < small_win);
}

TEST_CASE("pdf difference rejects degenerate scales") {
  Volume v(16, 16, 16);
  IntensityWindow iw(0, 8, 8);
  CHECK_THROWS_AS(pdf_difference(v, Eigen::Vector3d(8, 8, 8), iw, 1.5, Kernel::Epanechnikov),
                  std::invalid_argument);
}

TEST_CASE("empirical monotonicity: entropy rises with overlap on a box phantom") {
  auto [v, gt] = box_phantom(48, 8, 64, 5);  // 17^3 box at center
  IntensityWindow iw(0, 64, 64);
  const double c = (48 - 1) / 2.0;

  std::vector<uint8_t> in_region(v.size(), 0);
  for (uint64_t idx : gt.regions[0].mask) in_region[idx] = 1;

  struct Sample {
    double overlap, entropy;
  };
  std::vector<Sample> samples;
  for (double x = 6.0; x <= c; x += 0.5) {
    const auto win = EllipsoidWindow::isotropic({x, c, c}, 8.0, false);
    uint64_t total = 0, inside = 0;
    for_each_support_voxel(v, win, [&](int sx, int sy, int sz, double) {
      ++total;
      inside += in_region[v.index(sx, sy, sz)];
    });
    const auto h = candidate_histogram(v, win, iw, Kernel::Epanechnikov);
    samples.push_back({double(inside) / double(total), entropy_bits(h)});
  }

  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) { return a.overlap < b.overlap; });
  // Pairs tied in overlap carry no ordering constraint; drops within the
  // sampling tolerance of the entropy estimate (0.01 bits) do not count.
  int violations = 0, pairs = 0;
  for (size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].overlap <= samples[i - 1].overlap + 1e-12) continue;
    ++pairs;
    if (samples[i].entropy < samples[i - 1].entropy - 0.01) ++violations;
  }
  CHECK(double(violations) <= 0.02 * double(pairs));
}
