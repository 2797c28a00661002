#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "foodcal/calibrate.hpp"
#include "foodcal/detect.hpp"
#include "foodcal/ingest.hpp"
#include "foodcal/measure.hpp"
#include "foodcal/nutrition.hpp"
#include "foodcal/segment.hpp"

namespace foodcal {

enum class DetectorKind { Annotations, Sidecar };

struct PipelineConfig {
  DetectorKind detector = DetectorKind::Annotations;
  // Sidecar for image "a/b.png" is "a/b.png" + suffix.
  std::string sidecar_suffix = ".detections.json";
  double score_threshold = kDefaultScoreThreshold;
  int grabcut_iters = 5;
  double grabcut_tol = 1e-3;
  double min_support = 0.4;
  std::optional<std::filesystem::path> shapes_path;
  std::optional<std::filesystem::path> nutrition_path;
  int jobs = 1;

  /// Throws Error{InvalidArgument} naming the first out-of-range setting.
  void validate() const;

  /// Overlays keys present in `j` (same names as the CLI flags, with '_'
  /// for '-'). Relative paths resolve against `base_dir`.
  void merge_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
};

/// Shape and nutrition tables for one run, immutable once loaded.
struct PipelineTables {
  ShapeTable shapes;
  NutritionTable nutrition;

  static PipelineTables load(const PipelineConfig& config);
};

struct ViewResult {
  SceneDetections scene;
  CircleEstimate coin;
  ScaleFactor scale;
  std::vector<std::string> diagnostics;
};

struct FoodEstimate {
  std::string label;
  Box top_box;
  Box side_box;
  GrabCutResult top_segmentation;
  GrabCutResult side_segmentation;
  Silhouette top_silhouette;
  Silhouette side_silhouette;
  VolumeEstimate volume;
  CalorieResult calories;
};

struct EstimateReport {
  ViewResult top;
  ViewResult side;
  std::vector<FoodEstimate> foods;  // sorted by label
  std::map<std::string, double> stage_ms;

  double total_volume_cm3() const;
};

/// Annotation replay or the image's sidecar file, as the config selects.
/// Throws whatever annotation_provider / sidecar_provider throw.
std::unique_ptr<DetectorProvider> provider_for_record(const Manifest& manifest, const ImagePairRecord& record,
                                                      View view, const PipelineConfig& config);

/// Detect -> calibrate -> segment -> measure -> nutrition for one photo pair.
/// Failures are rethrown as StageError; a missing or duplicated coin is
/// reported under "calibrate".
EstimateReport estimate_pair(const Image& top, const Image& side, const DetectorProvider& top_provider,
                             const DetectorProvider& side_provider, const PipelineTables& tables,
                             const PipelineConfig& config);

/// Estimate report as JSON (schema 1). Timings are under "timings".
nlohmann::json report_to_json(const EstimateReport& report);

/// Copy of `image` with boxes, coin circle and food contours drawn in.
Image render_overlay(const Image& image, const EstimateReport& report, View view);

}  // namespace foodcal
