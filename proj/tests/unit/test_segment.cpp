#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "foodcal/segment.hpp"
#include "foodcal/synth.hpp"
#include "test_util.hpp"

using namespace foodcal;

namespace {

double oracle_log_gauss(double w, const Eigen::Vector3d& mu, const Eigen::Matrix3d& cov, const Eigen::Vector3d& z) {
  const Eigen::Vector3d d = z - mu;
  return std::log(w) - 0.5 * std::log(cov.determinant()) - 1.5 * std::log(2 * std::numbers::pi) -
         0.5 * d.dot(cov.inverse() * d);
}

SquareScene square_scene(std::uint64_t seed) {
  return render_square(64, 48, {20, 14, 43, 33}, {210, 60, 50}, {60, 130, 70}, 4.0, 6, seed);
}

}  // namespace

TEST_SUITE("segment") {

TEST_CASE("mixture density matches the closed form") {
  GaussianMixture g(2);
  Eigen::Matrix3d c0;
  c0 << 40, 5, 2, 5, 30, 1, 2, 1, 20;
  const Eigen::Matrix3d c1 = Eigen::Vector3d(9, 16, 25).asDiagonal();
  g.set_component(0, 0.3, {100, 50, 20}, c0);
  g.set_component(1, 0.7, {110, 60, 30}, c1);
  g.finalize();
  for (const Eigen::Vector3d& z : {Eigen::Vector3d(100, 50, 20), Eigen::Vector3d(105, 58, 25), Eigen::Vector3d(0, 0, 0)}) {
    const double l0 = oracle_log_gauss(0.3, {100, 50, 20}, c0, z);
    const double l1 = oracle_log_gauss(0.7, {110, 60, 30}, c1, z);
    CHECK(g.component_log_density(0, z) == doctest::Approx(l0).epsilon(1e-12));
    CHECK(g.component_log_density(1, z) == doctest::Approx(l1).epsilon(1e-12));
    const double m = std::max(l0, l1);
    CHECK(g.log_likelihood(z) == doctest::Approx(m + std::log(std::exp(l0 - m) + std::exp(l1 - m))).epsilon(1e-12));
  }
}

TEST_CASE("ties go to the lowest component and empty components never win") {
  GaussianMixture g(3);
  const Eigen::Matrix3d c = Eigen::Matrix3d::Identity() * 4;
  g.set_component(0, 0.0, {0, 0, 0}, c);
  g.set_component(1, 0.5, {10, 10, 10}, c);
  g.set_component(2, 0.5, {10, 10, 10}, c);
  g.finalize();
  CHECK(g.most_likely_component({0, 0, 0}) == 1);
  CHECK(g.most_likely_component({10, 10, 10}) == 1);
  CHECK(std::isinf(g.component_log_density(0, {0, 0, 0})));
}

TEST_CASE("non positive definite covariance") {
  GaussianMixture g(1);
  g.set_component(0, 1.0, {0, 0, 0}, Eigen::Matrix3d::Zero());
  CHECK_ERROR_KIND(g.finalize(), ErrorKind::DegenerateColors);
}

TEST_CASE("beta") {
  CHECK(compute_beta(Image(8, 8, {7, 7, 7})) == 0.0);
  Image row(3, 1);
  row.set(0, 0, {0, 0, 0});
  row.set(1, 0, {3, 0, 0});
  row.set(2, 0, {3, 4, 0});
  // Pairs (0,1): 9 and (1,2): 16.
  CHECK(compute_beta(row) == doctest::Approx(1.0 / (2.0 * 12.5)));
}

TEST_CASE("smoothness edges cover each 8-neighbour pair once") {
  const SquareScene s = square_scene(1);
  const SegState st = seg_init(s.image, s.box);
  const int w = 64, h = 48;
  const auto edges = smoothness_edges(st);
  CHECK(edges.size() == static_cast<std::size_t>((w - 1) * h + w * (h - 1) + 2 * (w - 1) * (h - 1)));
  for (const auto& e : edges) {
    const int dx = std::abs(e.u % w - e.v % w), dy = std::abs(e.u / w - e.v / w);
    const double dist = std::sqrt(double(dx * dx + dy * dy));
    const double d2 = (st.color(std::size_t(e.u)) - st.color(std::size_t(e.v))).squaredNorm();
    REQUIRE(e.cap == doctest::Approx(st.gamma * std::exp(-st.beta * d2) / dist));
  }
}

TEST_CASE("initial trimap and validation") {
  const SquareScene s = square_scene(2);
  const SegState st = seg_init(s.image, s.box);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      const Trimap t = st.trimap[std::size_t(y * 64 + x)];
      CHECK(t == (s.box.contains(x, y) ? Trimap::ProbableForeground : Trimap::SureBackground));
    }
  CHECK_ERROR_KIND(seg_init(s.image, Box{50, 10, 70, 30}), ErrorKind::InvalidBox);
  CHECK_ERROR_KIND(seg_init(s.image, Box{10, 10, 9, 30}), ErrorKind::InvalidBox);
  CHECK_ERROR_KIND(seg_init(s.image, Box{10, 10, 16, 16}), ErrorKind::BoxTooSmall);
  CHECK_ERROR_KIND(seg_init(s.image, Box{0, 0, 63, 47}), ErrorKind::DegenerateColors);
  const Image flat(40, 40, {90, 90, 90});
  CHECK_ERROR_KIND(seg_init(flat, Box{5, 5, 30, 30}), ErrorKind::DegenerateColors);
}

TEST_CASE("sure pixels cost nothing on their side and big on the other") {
  const SquareScene s = square_scene(3);
  SegState st = seg_init(s.image, s.box);
  st.trimap[0] = Trimap::SureForeground;
  const DataTerms dt = data_terms(st);
  CHECK(dt.cost_fg[0] == 0.0);
  CHECK(dt.cost_bg[0] == dt.big);
  CHECK(dt.cost_bg[1] == 0.0);
  CHECK(dt.cost_fg[1] == dt.big);
  for (std::size_t p = 0; p < dt.cost_fg.size(); ++p)
    if (!is_sure(st.trimap[p])) REQUIRE(dt.big > std::abs(dt.cost_fg[p] - dt.cost_bg[p]) + st.gamma * (4 + 4 / std::numbers::sqrt2));
}

TEST_CASE("cut value equals the energy of the labelling it produces") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const SquareScene s = square_scene(seed);
    SegState st = seg_init(s.image, s.box);
    assign_components(st);
    learn_gmm(st);
    const PixelGraph g = build_graph(st);
    const CutResult cut = min_cut(g);
    long probable = 0;
    for (std::size_t p = 0; p < st.trimap.size(); ++p) {
      if (is_sure(st.trimap[p])) {
        CHECK(cut.foreground[p] == (st.trimap[p] == Trimap::SureForeground));
        continue;
      }
      ++probable;
      st.trimap[p] = cut.foreground[p] ? Trimap::ProbableForeground : Trimap::ProbableBackground;
    }
    CHECK(seg_energy(st) == doctest::Approx(cut.flow - g.data_offset * double(probable)).epsilon(1e-9));
  }
}

TEST_CASE("pixel graph cut agrees with enumeration") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> cap(0.0, 10.0);
  for (int t = 0; t < 20; ++t) {
    PixelGraph g;
    g.width = 4;
    g.height = 3;
    const int n = 12;
    for (int p = 0; p < n; ++p) {
      g.source_cap.push_back(cap(rng));
      g.sink_cap.push_back(cap(rng));
    }
    for (int p = 0; p < n; ++p) {
      if (p % 4 < 3) g.edges.push_back({p, p + 1, cap(rng)});
      if (p + 4 < n) g.edges.push_back({p, p + 4, cap(rng)});
    }
    double best = 1e300;
    for (unsigned s = 0; s < (1u << n); ++s) {
      double c = 0;
      for (int p = 0; p < n; ++p) c += (s >> p & 1) ? g.sink_cap[std::size_t(p)] : g.source_cap[std::size_t(p)];
      for (const auto& e : g.edges)
        if ((s >> e.u & 1) != (s >> e.v & 1)) c += e.cap;
      best = std::min(best, c);
    }
    CHECK(min_cut(g).flow == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("a starved component is re-seeded at the worst explained pixel") {
  const SquareScene s = square_scene(7);
  SegState st = seg_init(s.image, s.box);
  std::vector<std::size_t> fg;
  for (std::size_t p = 0; p < st.trimap.size(); ++p)
    if (is_foreground(st.trimap[p])) {
      st.component[p] = 0;
      fg.push_back(p);
    }
  // With every pixel in component 0, the remaining model is one Gaussian
  // fitted to the whole foreground.
  Eigen::Vector3d mu = Eigen::Vector3d::Zero();
  for (std::size_t p : fg) mu += st.color(p);
  mu /= double(fg.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t p : fg) cov += (st.color(p) - mu) * (st.color(p) - mu).transpose();
  cov /= double(fg.size());
  cov.diagonal().array() += kCovarianceRegularization;
  std::size_t worst = fg[0];
  double worst_ll = 1e300;
  for (std::size_t p : fg) {
    const double ll = oracle_log_gauss(1.0, mu, cov, st.color(p));
    if (ll < worst_ll) {
      worst_ll = ll;
      worst = p;
    }
  }
  learn_gmm(st);
  CHECK(st.component[worst] == 1);
  for (int k = 0; k < st.fg_gmm.size(); ++k) CHECK(st.fg_gmm.weight(k) > 0.0);
}

TEST_CASE("energy never increases and squares are recovered") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const SquareScene s = square_scene(seed);
    const GrabCutResult r = grabcut_run(s.image, s.box);
    REQUIRE(r.energies.size() == std::size_t(r.cuts) + 1);
    for (std::size_t i = 1; i < r.energies.size(); ++i) CHECK(r.energies[i] <= r.energies[i - 1] + 1e-9);
    CHECK(mask_iou(r.mask, s.truth) >= 0.95);
  }
}

TEST_CASE("largest component with ties") {
  Mask m(6, 3);
  m.set(0, 0);
  m.set(1, 0);
  m.set(4, 2);
  m.set(5, 2);
  const Mask l = largest_component(m);
  CHECK(l.count() == 2);
  CHECK(l.at(0, 0));
  CHECK_FALSE(l.at(4, 2));
  m.set(3, 2);
  CHECK(largest_component(m).at(3, 2));
  // Diagonal contact does not join components.
  Mask d(3, 3);
  d.set(0, 0);
  d.set(1, 1);
  CHECK(largest_component(d).count() == 1);
}

TEST_CASE("contour tracing") {
  Mask one(5, 5);
  one.set(2, 2);
  CHECK(trace_contour(one) == std::vector<Point>{{2, 2}});

  Mask sq(6, 6);
  for (int y = 1; y <= 3; ++y)
    for (int x = 1; x <= 3; ++x) sq.set(x, y);
  const std::vector<Point> want{{1, 1}, {2, 1}, {3, 1}, {3, 2}, {3, 3}, {2, 3}, {1, 3}, {1, 2}};
  CHECK(trace_contour(sq) == want);

  Mask line(6, 3);
  for (int x = 1; x <= 4; ++x) line.set(x, 1);
  const std::vector<Point> there_and_back{{1, 1}, {2, 1}, {3, 1}, {4, 1}, {3, 1}, {2, 1}};
  CHECK(trace_contour(line) == there_and_back);

  CHECK(trace_contour(Mask(4, 4)).empty());
}

TEST_CASE("a box over texture matching its surroundings") {
  Image stripes(40, 40, {30, 30, 30});
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x)
      if ((x / 2 + y / 2) % 2) stripes.set(x, y, {220, 220, 220});
  try {
    const GrabCutResult r = grabcut_run(stripes, {10, 10, 29, 29});
    CHECK(r.mask.count() > 0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyForeground);
  }
}

}
