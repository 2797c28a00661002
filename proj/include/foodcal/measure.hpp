#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "foodcal/calibrate.hpp"
#include "foodcal/image.hpp"

namespace foodcal {

enum class ShapeModel { Ellipsoid, Column, Irregular };

std::string_view to_string(ShapeModel shape) noexcept;
/// Accepts "ellipsoid" | "column" | "irregular"; throws Error{ParseError}.
ShapeModel parse_shape(std::string_view name);

/// Geometric features of one binary silhouette.
struct Silhouette {
  long area_px = 0;
  std::vector<int> row_widths;  // rightmost - leftmost + 1, for each nonempty row, top to bottom
  int height_px = 0;            // number of nonempty rows
  int max_width_px = 0;
  // Full axis lengths of the moment-equivalent ellipse: 4 * sqrt(eigenvalue).
  double major_px = 0.0;
  double minor_px = 0.0;
};

struct VolumeEstimate {
  double volume_cm3 = 0.0;
  ShapeModel shape_used = ShapeModel::Ellipsoid;
  ScaleFactor scale_top;
  ScaleFactor scale_side;
};

/// Throws Error{EmptyMask}.
Silhouette silhouette_features(const Mask& mask);

/// Column:    top area x side height.
/// Ellipsoid: (pi/6) x top major x top minor x side height.
/// Irregular: stack of elliptic discs, one per side row, with the side row
///            width as the major axis and the top minor/major ratio applied.
/// Throws Error{EmptyMask, DegenerateExtent}.
VolumeEstimate estimate_volume(const Silhouette& top, const Silhouette& side, ScaleFactor scale_top,
                               ScaleFactor scale_side, ShapeModel shape);

/// Food label -> shape model assignment, overridable from JSON.
class ShapeTable {
 public:
  static ShapeTable builtin();
  /// JSON object {label: "ellipsoid"|"column"|"irregular"} merged over the built-in table.
  static ShapeTable with_overrides(const std::filesystem::path& path);

  /// Throws Error{UnknownFood}.
  ShapeModel shape_for(std::string_view label) const;
  void set(std::string_view label, ShapeModel shape);
  const std::map<std::string, ShapeModel>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, ShapeModel> entries_;
};

/// Lookup in the built-in table.
ShapeModel shape_for(std::string_view label);

}  // namespace foodcal
