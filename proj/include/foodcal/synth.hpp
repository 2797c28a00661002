#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "foodcal/calibrate.hpp"
#include "foodcal/image.hpp"
#include "foodcal/ingest.hpp"

namespace foodcal {

// Orthographic renderer for test scenes: one food and one coin on a plain
// field, seen from above and from the side at a known scale.

enum class SynthShape { Sphere, Cylinder, Cuboid };

struct SynthFood {
  std::string label = "apple";
  SynthShape shape = SynthShape::Sphere;
  double radius_cm = 2.0;  // sphere, cylinder
  double height_cm = 3.0;  // cylinder, cuboid
  double width_cm = 4.0;   // cuboid, along x in both views
  double depth_cm = 3.0;   // cuboid, along y in the top view
  Rgb color{200, 40, 40};

  double volume_cm3() const;
};

struct SynthOptions {
  double cm_per_px = 0.05;
  double coin_diameter_cm = 2.5;
  Rgb background{60, 130, 70};
  Rgb coin_color{205, 200, 185};
  double noise_sigma = 3.0;
  int margin_px = 24;     // image border around the objects
  int box_margin_px = 8;  // slack of the detection boxes around the objects
  std::uint64_t seed = 1;
};

struct SynthView {
  Image image;
  Mask food_truth;
  Box food_box;
  Box coin_box;
  CircleEstimate coin_truth;  // support = 1
};

struct SynthScene {
  SynthView top;
  SynthView side;
  double true_volume_cm3 = 0.0;
  double cm_per_px = 0.0;
};

SynthScene render_scene(const SynthFood& food, const SynthOptions& options = {});

/// A lone coin disc of radius `r` (px) centred at (cx, cy) on a noisy field.
/// `box` is the circle's bounding box widened by `box_margin` and clipped.
struct CoinScene {
  Image image;
  Box box;
  CircleEstimate truth;
};
CoinScene render_coin(int width, int height, double cx, double cy, double r, Rgb coin, Rgb background,
                      double noise_sigma, int box_margin, std::uint64_t seed);

/// Axis-aligned filled square on a noisy field, with its ground-truth mask.
struct SquareScene {
  Image image;
  Mask truth;
  Box box;
};
SquareScene render_square(int width, int height, const Box& square, Rgb fg, Rgb background, double noise_sigma,
                          int box_margin, std::uint64_t seed);

/// Writes `count` scene pairs with PNGs, detection sidecars and manifest.json
/// under `dir`. Foods cycle through apple (sphere), bread (cuboid) and
/// mooncake (cylinder) with seeded sizes. Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, int count, std::uint64_t seed);

/// Pixel-wise intersection over union of two masks of equal size.
double mask_iou(const Mask& a, const Mask& b);

}  // namespace foodcal
