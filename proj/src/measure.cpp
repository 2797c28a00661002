#include "foodcal/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "foodcal/error.hpp"
#include "foodcal/nutrition.hpp"

namespace foodcal {

std::string_view to_string(ShapeModel shape) noexcept {
  switch (shape) {
    case ShapeModel::Ellipsoid: return "ellipsoid";
    case ShapeModel::Column: return "column";
    case ShapeModel::Irregular: return "irregular";
  }
  return "unknown";
}

ShapeModel parse_shape(std::string_view name) {
  if (name == "ellipsoid") return ShapeModel::Ellipsoid;
  if (name == "column") return ShapeModel::Column;
  if (name == "irregular") return ShapeModel::Irregular;
  throw Error(ErrorKind::ParseError, "unknown shape model \"" + std::string(name) + "\"");
}

Silhouette silhouette_features(const Mask& mask) {
  Silhouette s;
  double sx = 0, sy = 0;
  for (int y = 0; y < mask.height(); ++y) {
    int left = -1, right = -1;
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      if (left < 0) left = x;
      right = x;
      ++s.area_px;
      sx += x;
      sy += y;
    }
    if (left >= 0) s.row_widths.push_back(right - left + 1);
  }
  if (s.area_px == 0) throw Error(ErrorKind::EmptyMask, "silhouette has no foreground pixels");
  s.height_px = static_cast<int>(s.row_widths.size());
  s.max_width_px = *std::max_element(s.row_widths.begin(), s.row_widths.end());

  const double n = static_cast<double>(s.area_px);
  const double mx = sx / n, my = sy / n;
  double cxx = 0, cyy = 0, cxy = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) {
        cxx += (x - mx) * (x - mx);
        cyy += (y - my) * (y - my);
        cxy += (x - mx) * (y - my);
      }
  cxx /= n;
  cyy /= n;
  cxy /= n;
  // Eigenvalues of the 2x2 coordinate covariance.
  const double half_trace = 0.5 * (cxx + cyy);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy));
  const double l1 = half_trace + disc;
  const double l2 = std::max(0.0, half_trace - disc);
  s.major_px = 4.0 * std::sqrt(l1);
  s.minor_px = 4.0 * std::sqrt(l2);
  return s;
}

VolumeEstimate estimate_volume(const Silhouette& top, const Silhouette& side, ScaleFactor scale_top,
                               ScaleFactor scale_side, ShapeModel shape) {
  if (top.area_px <= 0 || side.area_px <= 0) throw Error(ErrorKind::EmptyMask, "empty silhouette");
  if (!scale_top.valid() || !scale_side.valid()) throw Error(ErrorKind::InvalidArgument, "invalid scale factor");
  const double st = scale_top.cm_per_px;
  const double ss = scale_side.cm_per_px;

  double volume = 0.0;
  switch (shape) {
    case ShapeModel::Column:
      volume = (static_cast<double>(top.area_px) * st * st) * (side.height_px * ss);
      break;
    case ShapeModel::Ellipsoid:
      if (!(top.major_px > 0.0) || !(top.minor_px > 0.0)) {
        throw Error(ErrorKind::DegenerateExtent, "top silhouette has a zero principal extent");
      }
      volume = std::numbers::pi / 6.0 * (top.major_px * st) * (top.minor_px * st) * (side.height_px * ss);
      break;
    case ShapeModel::Irregular: {
      if (!(top.major_px > 0.0) || !(top.minor_px > 0.0)) {
        throw Error(ErrorKind::DegenerateExtent, "top silhouette has a zero principal extent");
      }
      const double e = top.minor_px / top.major_px;
      double sum = 0.0;
      for (int width : side.row_widths) {
        const double l = width * ss;
        sum += std::numbers::pi / 4.0 * l * l * e * ss;
      }
      volume = sum;
      break;
    }
  }
  return {volume, shape, scale_top, scale_side};
}

ShapeTable ShapeTable::builtin() {
  ShapeTable t;
  for (const char* label : {"apple", "orange", "tomato", "peach", "plum", "lemon", "qiwi", "egg", "pear", "mango",
                            "litchi", "grape"})
    t.set(label, ShapeModel::Ellipsoid);
  for (const char* label : {"bread", "bun", "mooncake", "sachima", "doughnut", "fired dough twist"})
    t.set(label, ShapeModel::Column);
  t.set("banana", ShapeModel::Irregular);
  return t;
}

ShapeTable ShapeTable::with_overrides(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open shape table " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, path.string() + ": expected an object of label -> shape");
  ShapeTable t = builtin();
  for (const auto& [label, value] : j.items()) {
    if (!value.is_string()) throw Error(ErrorKind::SchemaError, path.string() + ": shape for " + label + " must be a string");
    t.set(label, parse_shape(value.get<std::string>()));
  }
  return t;
}

ShapeModel ShapeTable::shape_for(std::string_view label) const {
  const auto it = entries_.find(normalize_label(label));
  if (it == entries_.end()) throw Error(ErrorKind::UnknownFood, "no shape model for \"" + std::string(label) + "\"");
  return it->second;
}

void ShapeTable::set(std::string_view label, ShapeModel shape) { entries_[normalize_label(label)] = shape; }

ShapeModel shape_for(std::string_view label) {
  static const ShapeTable table = ShapeTable::builtin();
  return table.shape_for(label);
}

}  // namespace foodcal
