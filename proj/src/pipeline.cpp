#include "foodcal/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "foodcal/error.hpp"

namespace foodcal {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

ViewResult detect_and_calibrate(const Image& image, const DetectorProvider& provider, const PipelineConfig& config,
                                std::map<std::string, double>& stage_ms) {
  ViewResult view;
  auto t0 = Clock::now();
  try {
    view.scene = detect(image, provider, &view.diagnostics);
  } catch (const Error& e) {
    // The coin is the calibration object; its absence is a calibration failure.
    const bool coin = e.kind() == ErrorKind::NoCoin || e.kind() == ErrorKind::MultipleCoins;
    throw StageError(coin ? "calibrate" : "detect", e);
  }
  stage_ms["detect"] += ms_since(t0);

  t0 = Clock::now();
  in_stage("calibrate", [&] {
    HoughOptions hough;
    hough.min_support = config.min_support;
    view.coin = detect_coin(image, view.scene.coin.box, hough);
    view.scale = scale_from_coin(view.coin);
  });
  stage_ms["calibrate"] += ms_since(t0);
  return view;
}

json box_json(const Box& b) { return {{"xmin", b.xmin}, {"ymin", b.ymin}, {"xmax", b.xmax}, {"ymax", b.ymax}}; }

json view_json(const ViewResult& v) {
  return {{"coin_box", box_json(v.scene.coin.box)},
          {"coin", {{"cx", v.coin.cx}, {"cy", v.coin.cy}, {"r", v.coin.r}, {"support", v.coin.support}}},
          {"cm_per_px", v.scale.cm_per_px},
          {"diagnostics", v.diagnostics}};
}

void draw_point(Image& img, int x, int y, Rgb c) {
  if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.set(x, y, c);
}

void draw_box(Image& img, const Box& b, Rgb c) {
  for (int x = b.xmin; x <= b.xmax; ++x) {
    draw_point(img, x, b.ymin, c);
    draw_point(img, x, b.ymax, c);
  }
  for (int y = b.ymin; y <= b.ymax; ++y) {
    draw_point(img, b.xmin, y, c);
    draw_point(img, b.xmax, y, c);
  }
}

}  // namespace

void PipelineConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) bad("score threshold must lie in [0, 1]");
  if (grabcut_iters < 1 || grabcut_iters > 100) bad("grabcut iterations must lie in [1, 100]");
  if (!(grabcut_tol >= 0.0 && grabcut_tol < 1.0)) bad("grabcut tolerance must lie in [0, 1)");
  if (!(min_support >= 0.0 && min_support <= 1.0)) bad("min support must lie in [0, 1]");
  if (jobs < 1 || jobs > 256) bad("jobs must lie in [1, 256]");
  if (sidecar_suffix.empty()) bad("sidecar suffix must not be empty");
}

void PipelineConfig::merge_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, "config must be a JSON object");
  auto path_of = [&](const json& v) {
    std::filesystem::path p = v.get<std::string>();
    return p.is_relative() ? base_dir / p : p;
  };
  try {
    if (j.contains("detector")) {
      const std::string d = j["detector"].get<std::string>();
      if (d == "annotations") {
        detector = DetectorKind::Annotations;
      } else if (d == "sidecar") {
        detector = DetectorKind::Sidecar;
      } else {
        throw Error(ErrorKind::SchemaError, "detector must be \"annotations\" or \"sidecar\"");
      }
    }
    if (j.contains("sidecar_suffix")) sidecar_suffix = j["sidecar_suffix"].get<std::string>();
    if (j.contains("score_threshold")) score_threshold = j["score_threshold"].get<double>();
    if (j.contains("iters")) grabcut_iters = j["iters"].get<int>();
    if (j.contains("tol")) grabcut_tol = j["tol"].get<double>();
    if (j.contains("min_support")) min_support = j["min_support"].get<double>();
    if (j.contains("shapes")) shapes_path = path_of(j["shapes"]);
    if (j.contains("nutrition")) nutrition_path = path_of(j["nutrition"]);
    if (j.contains("jobs")) jobs = j["jobs"].get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("config: ") + e.what());
  }
}

PipelineTables PipelineTables::load(const PipelineConfig& config) {
  return {config.shapes_path ? ShapeTable::with_overrides(*config.shapes_path) : ShapeTable::builtin(),
          config.nutrition_path ? NutritionTable::from_json_file(*config.nutrition_path) : NutritionTable::builtin()};
}

std::unique_ptr<DetectorProvider> provider_for_record(const Manifest& manifest, const ImagePairRecord& record,
                                                      View view, const PipelineConfig& config) {
  if (config.detector == DetectorKind::Annotations) return annotation_provider(record, view);
  std::filesystem::path sidecar = manifest.resolve(view == View::Top ? record.top_image : record.side_image);
  sidecar += config.sidecar_suffix;
  return sidecar_provider(sidecar, config.score_threshold);
}

double EstimateReport::total_volume_cm3() const {
  double v = 0.0;
  for (const FoodEstimate& f : foods) v += f.volume.volume_cm3;
  return v;
}

EstimateReport estimate_pair(const Image& top, const Image& side, const DetectorProvider& top_provider,
                             const DetectorProvider& side_provider, const PipelineTables& tables,
                             const PipelineConfig& config) {
  EstimateReport report;
  report.top = detect_and_calibrate(top, top_provider, config, report.stage_ms);
  report.side = detect_and_calibrate(side, side_provider, config, report.stage_ms);

  std::set<std::string> top_labels, side_labels;
  for (const Detection& d : report.top.scene.foods) top_labels.insert(d.label);
  for (const Detection& d : report.side.scene.foods) side_labels.insert(d.label);
  if (top_labels != side_labels) {
    throw StageError("detect", Error(ErrorKind::LabelMismatch, "top and side views show different foods"));
  }

  GrabCutOptions gc;
  gc.max_iters = config.grabcut_iters;
  gc.rel_tol = config.grabcut_tol;

  for (const std::string& label : top_labels) {
    FoodEstimate food;
    food.label = label;
    auto find_box = [&](const ViewResult& v) {
      return std::find_if(v.scene.foods.begin(), v.scene.foods.end(), [&](const Detection& d) { return d.label == label; })->box;
    };
    food.top_box = find_box(report.top);
    food.side_box = find_box(report.side);

    auto t0 = Clock::now();
    in_stage("segment", [&] {
      food.top_segmentation = grabcut_run(top, food.top_box, gc);
      food.side_segmentation = grabcut_run(side, food.side_box, gc);
    });
    report.stage_ms["segment"] += ms_since(t0);

    t0 = Clock::now();
    in_stage("measure", [&] {
      const ShapeModel shape = tables.shapes.shape_for(label);
      food.top_silhouette = silhouette_features(food.top_segmentation.mask);
      food.side_silhouette = silhouette_features(food.side_segmentation.mask);
      food.volume = estimate_volume(food.top_silhouette, food.side_silhouette, report.top.scale, report.side.scale, shape);
    });
    report.stage_ms["measure"] += ms_since(t0);

    in_stage("nutrition", [&] { food.calories = calories_from_volume(food.volume.volume_cm3, tables.nutrition.lookup(label)); });
    report.foods.push_back(std::move(food));
  }
  return report;
}

json report_to_json(const EstimateReport& report) {
  json foods = json::array();
  for (const FoodEstimate& f : report.foods) {
    foods.push_back({{"label", f.label},
                     {"shape", to_string(f.volume.shape_used)},
                     {"volume_cm3", f.volume.volume_cm3},
                     {"mass_g", f.calories.mass_g},
                     {"calories_kcal", f.calories.calories_kcal},
                     {"top_box", box_json(f.top_box)},
                     {"side_box", box_json(f.side_box)},
                     {"top_area_px", f.top_silhouette.area_px},
                     {"side_height_px", f.side_silhouette.height_px},
                     {"grabcut_cuts", {f.top_segmentation.cuts, f.side_segmentation.cuts}}});
  }
  return {{"schema", 1},
          {"top", view_json(report.top)},
          {"side", view_json(report.side)},
          {"foods", foods},
          {"total_volume_cm3", report.total_volume_cm3()},
          {"timings", report.stage_ms}};
}

Image render_overlay(const Image& image, const EstimateReport& report, View view) {
  Image out = image;
  const ViewResult& v = view == View::Top ? report.top : report.side;
  const Rgb yellow{255, 220, 0}, green{0, 230, 0}, magenta{255, 0, 255};
  draw_box(out, v.scene.coin.box, yellow);
  const int steps = std::max(16, static_cast<int>(2 * std::numbers::pi * v.coin.r));
  for (int i = 0; i < steps; ++i) {
    const double a = 2 * std::numbers::pi * i / steps;
    draw_point(out, static_cast<int>(std::lround(v.coin.cx + v.coin.r * std::cos(a))),
               static_cast<int>(std::lround(v.coin.cy + v.coin.r * std::sin(a))), magenta);
  }
  for (const FoodEstimate& f : report.foods) {
    draw_box(out, view == View::Top ? f.top_box : f.side_box, yellow);
    const auto& contour = view == View::Top ? f.top_segmentation.contour : f.side_segmentation.contour;
    for (const Point& p : contour) draw_point(out, p.x, p.y, green);
  }
  return out;
}

}  // namespace foodcal
