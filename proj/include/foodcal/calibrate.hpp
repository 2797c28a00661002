#pragma once

#include "foodcal/image.hpp"

namespace foodcal {

struct CircleEstimate {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;
  double support = 0.0;  // fraction of the perimeter backed by edge votes, in [0, 1]
};

/// Physical size of one image pixel in a given view.
struct ScaleFactor {
  double cm_per_px = 0.0;

  bool valid() const noexcept;
};

/// One Yuan coin, 25.0 mm across.
struct CalibrationConstants {
  double coin_diameter_cm = 2.5;
};

struct HoughOptions {
  double min_support = 0.4;
  double min_radius_ratio = 0.25;  // of the box's shorter side
  double max_radius_ratio = 0.6;
  double edge_percentile = 0.8;
};

inline constexpr int kMinCoinBoxSide = 16;

/// Gradient-directed circular Hough transform restricted to `box`.
/// Returns the best-supported circle; equal support resolves to the larger radius.
/// The winner is refined to sub-pixel precision by a least-squares fit to its edge pixels.
/// Throws Error{BoxTooSmall, InvalidBox, NoCircle}.
CircleEstimate detect_coin(const Image& image, const Box& box, const HoughOptions& options = {});

/// cm_per_px = coin diameter / (2 r). Throws Error{InvalidArgument} for r <= 0.
ScaleFactor scale_from_coin(const CircleEstimate& circle, const CalibrationConstants& constants = {});

/// Luma with weights 0.299 / 0.587 / 0.114.
double luma(Rgb c) noexcept;

}  // namespace foodcal
