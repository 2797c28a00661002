#include "foodcal/detect.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "foodcal/error.hpp"
#include "foodcal/nutrition.hpp"

namespace foodcal {

namespace {

std::vector<Detection> clip_to_image(const std::vector<Detection>& boxes, const Image& image,
                                     std::vector<std::string>& diagnostics) {
  std::vector<Detection> out;
  out.reserve(boxes.size());
  for (Detection d : boxes) {
    const Box original = d.box;
    d.box.xmin = std::clamp(d.box.xmin, 0, image.width() - 1);
    d.box.xmax = std::clamp(d.box.xmax, 0, image.width() - 1);
    d.box.ymin = std::clamp(d.box.ymin, 0, image.height() - 1);
    d.box.ymax = std::clamp(d.box.ymax, 0, image.height() - 1);
    if (!d.box.valid() || !original.valid()) {
      throw Error(ErrorKind::InvalidBox, "box for \"" + d.label + "\" has no extent inside the image");
    }
    if (d.box != original) {
      diagnostics.push_back("box for \"" + d.label + "\" clipped to image bounds");
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

std::string_view to_string(View view) noexcept { return view == View::Top ? "top" : "side"; }

std::vector<Detection> AnnotationProvider::boxes(const Image& image, std::vector<std::string>& diagnostics) const {
  return clip_to_image(boxes_, image, diagnostics);
}

SidecarProvider::SidecarProvider(std::string image, std::vector<Detection> raw, double score_threshold)
    : image_(std::move(image)), raw_(std::move(raw)), threshold_(score_threshold) {}

std::vector<Detection> SidecarProvider::boxes(const Image& image, std::vector<std::string>& diagnostics) const {
  std::vector<Detection> kept;
  for (const Detection& d : raw_) {
    if (d.score < threshold_) continue;
    bool suppressed = false;
    for (Detection& k : kept) {
      if (k.label != d.label || box_iou(k.box, d.box) < kSameLabelOverlapIou) continue;
      if (d.score > k.score) k = d;
      suppressed = true;
      diagnostics.push_back("overlapping \"" + d.label + "\" boxes merged, higher score kept");
      break;
    }
    if (!suppressed) kept.push_back(d);
  }
  return clip_to_image(kept, image, diagnostics);
}

std::unique_ptr<DetectorProvider> annotation_provider(const ImagePairRecord& record, View view) {
  const auto& boxes = view == View::Top ? record.annotations_top : record.annotations_side;
  if (!boxes) {
    throw Error(ErrorKind::MissingAnnotations,
                "record " + record.pair_id + " has no " + std::string(to_string(view)) + " annotations");
  }
  return std::make_unique<AnnotationProvider>(*boxes);
}

std::unique_ptr<DetectorProvider> sidecar_provider(const std::filesystem::path& path, double score_threshold) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open detection sidecar " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  auto schema = [&](const std::string& what) { return Error(ErrorKind::SchemaError, path.string() + ": " + what); };
  if (!j.is_object() || !j.contains("detections") || !j["detections"].is_array()) {
    throw schema("expected {\"image\": str, \"detections\": [...]}");
  }
  const std::string image = j.contains("image") && j["image"].is_string() ? j["image"].get<std::string>() : "";
  std::vector<Detection> raw;
  for (const auto& d : j["detections"]) {
    if (!d.is_object() || !d.contains("label") || !d["label"].is_string() || !d.contains("score") ||
        !d["score"].is_number()) {
      throw schema("each detection needs a string label and a numeric score");
    }
    for (const char* k : {"xmin", "ymin", "xmax", "ymax"}) {
      if (!d.contains(k) || !d[k].is_number_integer()) throw schema(std::string("detection field ") + k + " must be an integer");
    }
    const double score = d["score"].get<double>();
    if (!(score >= 0.0 && score <= 1.0)) throw schema("score must lie in [0, 1]");
    raw.push_back({normalize_label(d["label"].get<std::string>()),
                   {d["xmin"].get<int>(), d["ymin"].get<int>(), d["xmax"].get<int>(), d["ymax"].get<int>()},
                   score});
  }
  return std::make_unique<SidecarProvider>(image, std::move(raw), score_threshold);
}

SceneDetections validate_scene(const std::vector<Detection>& boxes) {
  SceneDetections scene;
  int coins = 0;
  for (const Detection& d : boxes) {
    if (d.is_coin()) {
      if (coins++ == 0) scene.coin = d;
    } else {
      scene.foods.push_back(d);
    }
  }
  if (coins == 0) throw Error(ErrorKind::NoCoin, "no coin detected");
  if (coins > 1) throw Error(ErrorKind::MultipleCoins, std::to_string(coins) + " coins detected");
  if (scene.foods.empty()) throw Error(ErrorKind::NoFood, "no food detected");
  std::set<std::string> labels;
  for (const Detection& f : scene.foods) {
    if (!labels.insert(f.label).second) {
      throw Error(ErrorKind::DuplicateFoodLabels, "food label \"" + f.label + "\" detected more than once");
    }
  }
  if (scene.foods.size() > 2) {
    throw Error(ErrorKind::TooManyFoods, std::to_string(scene.foods.size()) + " foods detected, at most 2 allowed");
  }
  return scene;
}

SceneDetections detect(const Image& image, const DetectorProvider& provider, std::vector<std::string>* diagnostics) {
  std::vector<std::string> local;
  std::vector<std::string>& diag = diagnostics ? *diagnostics : local;
  return validate_scene(provider.boxes(image, diag));
}

}  // namespace foodcal
