#include <doctest.h>

#include <cmath>
#include <random>

#include "foodcal/calibrate.hpp"
#include "foodcal/synth.hpp"
#include "test_util.hpp"

using namespace foodcal;

TEST_SUITE("calibrate") {

TEST_CASE("coin of radius 25 at 0.05 cm per pixel") {
  const CoinScene s = render_coin(120, 100, 60.0, 48.0, 25.0, {200, 195, 180}, {60, 120, 70}, 3.0, 6, 1);
  const CircleEstimate c = detect_coin(s.image, s.box);
  CHECK(std::abs(c.cx - 60.0) <= 1.0);
  CHECK(std::abs(c.cy - 48.0) <= 1.0);
  CHECK(std::abs(c.r - 25.0) <= 1.0);
  CHECK(c.support >= 0.8);
  const ScaleFactor sf = scale_from_coin(c);
  CHECK(sf.valid());
  CHECK(sf.cm_per_px == doctest::Approx(2.5 / (2 * c.r)));
  CHECK(std::abs(sf.cm_per_px - 0.05) <= 0.05 * 2.0 / 25.0);
}

TEST_CASE("random coins") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int good = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const double r = 15 + 60 * u(rng);
    const int size = static_cast<int>(2 * r + 60);
    const double cx = 30 + r + 0.5 * u(rng) * 10, cy = 30 + r + u(rng) * 5;
    const auto level = static_cast<std::uint8_t>(120 + 120 * u(rng));
    const CoinScene s = render_coin(size, size, cx, cy, r, {level, level, level}, {50, 80, 60}, 3.0, 5, t);
    const CircleEstimate c = detect_coin(s.image, s.box);
    good += std::hypot(c.cx - cx, c.cy - cy) <= 2.0 && std::abs(c.r - r) <= 2.0;
  }
  CHECK(good >= trials - 1);
}

TEST_CASE("concentric rims resolve to the larger circle") {
  Image img(120, 120, {40, 60, 40});
  const CoinScene outer = render_coin(120, 120, 60, 60, 40, {210, 210, 200}, {40, 60, 40}, 0.0, 6, 0);
  img = outer.image;
  for (int y = 0; y < 120; ++y)
    for (int x = 0; x < 120; ++x)
      if ((x - 60) * (x - 60) + (y - 60) * (y - 60) <= 25 * 25) img.set(x, y, {120, 100, 60});
  const CircleEstimate c = detect_coin(img, outer.box);
  CHECK(std::abs(c.r - 40) <= 1.5);
}

TEST_CASE("failures") {
  const Image blank(80, 80, {128, 128, 128});
  CHECK_ERROR_KIND(detect_coin(blank, {10, 10, 60, 60}), ErrorKind::NoCircle);
  CHECK_ERROR_KIND(detect_coin(blank, {10, 10, 20, 60}), ErrorKind::BoxTooSmall);
  CHECK_ERROR_KIND(detect_coin(blank, {10, 10, 90, 60}), ErrorKind::InvalidBox);
  CHECK_ERROR_KIND(detect_coin(blank, {30, 10, 20, 60}), ErrorKind::InvalidBox);

  // A straight edge is not a circle.
  Image half(80, 80, {40, 40, 40});
  for (int y = 0; y < 80; ++y)
    for (int x = 40; x < 80; ++x) half.set(x, y, {220, 220, 220});
  CHECK_ERROR_KIND(detect_coin(half, {10, 10, 70, 70}), ErrorKind::NoCircle);

  CHECK_ERROR_KIND(scale_from_coin({0, 0, 0, 1}), ErrorKind::InvalidArgument);
  CHECK_FALSE(ScaleFactor{}.valid());
}

TEST_CASE("min support gate") {
  // Only a quarter of the rim is visible: accepted with a low gate, rejected by default.
  Image img(100, 100, {50, 50, 50});
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x)
      if (x < 50 && y < 50 && (x - 50) * (x - 50) + (y - 50) * (y - 50) <= 30 * 30) img.set(x, y, {220, 220, 220});
  CHECK_ERROR_KIND(detect_coin(img, {15, 15, 85, 85}), ErrorKind::NoCircle);
  HoughOptions loose;
  loose.min_support = 0.1;
  CHECK_NOTHROW(detect_coin(img, {15, 15, 85, 85}, loose));
}

TEST_CASE("luma weights") {
  CHECK(luma({255, 255, 255}) == doctest::Approx(255.0));
  CHECK(luma({100, 0, 0}) == doctest::Approx(29.9));
  CHECK(luma({0, 100, 0}) == doctest::Approx(58.7));
  CHECK(luma({0, 0, 100}) == doctest::Approx(11.4));
}

}
