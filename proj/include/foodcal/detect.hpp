#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "foodcal/detection.hpp"
#include "foodcal/ingest.hpp"

namespace foodcal {

enum class View { Top, Side };
std::string_view to_string(View view) noexcept;

/// Exactly one coin and one or two foods with distinct labels.
struct SceneDetections {
  Detection coin;
  std::vector<Detection> foods;
};

/// Source of labeled boxes for one image. Implementations are immutable.
class DetectorProvider {
 public:
  virtual ~DetectorProvider() = default;

  /// Boxes for `image`, clipped to its bounds. Each clip is reported in
  /// `diagnostics`. Throws Error{InvalidBox} for a box with no pixels inside.
  virtual std::vector<Detection> boxes(const Image& image, std::vector<std::string>& diagnostics) const = 0;
};

/// Replays boxes verbatim (clipped to the image).
class AnnotationProvider final : public DetectorProvider {
 public:
  explicit AnnotationProvider(std::vector<Detection> boxes) : boxes_(std::move(boxes)) {}
  std::vector<Detection> boxes(const Image& image, std::vector<std::string>& diagnostics) const override;

 private:
  std::vector<Detection> boxes_;
};

/// Boxes from an external detector's JSON sidecar. Boxes scoring below the
/// threshold are dropped; of two same-label boxes overlapping with IoU >= 0.5
/// only the higher-scoring one is kept.
class SidecarProvider final : public DetectorProvider {
 public:
  SidecarProvider(std::string image, std::vector<Detection> raw, double score_threshold);

  std::vector<Detection> boxes(const Image& image, std::vector<std::string>& diagnostics) const override;

  const std::string& image_name() const noexcept { return image_; }
  const std::vector<Detection>& raw() const noexcept { return raw_; }

 private:
  std::string image_;
  std::vector<Detection> raw_;
  double threshold_;
};

inline constexpr double kDefaultScoreThreshold = 0.5;
inline constexpr double kSameLabelOverlapIou = 0.5;

/// Throws Error{MissingAnnotations}.
std::unique_ptr<DetectorProvider> annotation_provider(const ImagePairRecord& record, View view);

/// Throws Error{MissingFile, ParseError, SchemaError}.
std::unique_ptr<DetectorProvider> sidecar_provider(const std::filesystem::path& path,
                                                   double score_threshold = kDefaultScoreThreshold);

/// Checks the scene rules; never repairs. Throws Error{NoCoin, MultipleCoins,
/// NoFood, DuplicateFoodLabels, TooManyFoods}.
SceneDetections validate_scene(const std::vector<Detection>& boxes);

SceneDetections detect(const Image& image, const DetectorProvider& provider,
                       std::vector<std::string>* diagnostics = nullptr);

}  // namespace foodcal
