// foodcal: calorie estimation from a top/side photo pair with a coin for scale.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "foodcal/calibrate.hpp"
#include "foodcal/error.hpp"
#include "foodcal/eval.hpp"
#include "foodcal/ingest.hpp"
#include "foodcal/nutrition.hpp"
#include "foodcal/pipeline.hpp"
#include "foodcal/segment.hpp"
#include "foodcal/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace foodcal;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStage = 2;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pipeline flags shared by estimate and evaluate. Unset flags leave the
// config file's value alone.
struct ConfigFlags {
  std::string config_file;
  std::string detector;
  std::string sidecar_suffix;
  double score_threshold = 0;
  int iters = 0;
  double tol = 0;
  double min_support = 0;
  std::string shapes;
  std::string nutrition;
  int jobs = 0;

  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> setters;

  void add(CLI::App* app, bool with_jobs) {
    app->add_option("--config", config_file, "JSON config file; flags override it")->check(CLI::ExistingFile);
    bind(app->add_option("--detector", detector, "annotations | sidecar")->check(CLI::IsMember({"annotations", "sidecar"})),
         [this](PipelineConfig& c) { c.detector = detector == "sidecar" ? DetectorKind::Sidecar : DetectorKind::Annotations; });
    bind(app->add_option("--sidecar-suffix", sidecar_suffix, "sidecar file = image path + suffix"),
         [this](PipelineConfig& c) { c.sidecar_suffix = sidecar_suffix; });
    bind(app->add_option("--score-threshold", score_threshold, "drop sidecar boxes scoring below this"),
         [this](PipelineConfig& c) { c.score_threshold = score_threshold; });
    bind(app->add_option("--iters", iters, "GrabCut iterations"), [this](PipelineConfig& c) { c.grabcut_iters = iters; });
    bind(app->add_option("--tol", tol, "GrabCut relative energy tolerance"),
         [this](PipelineConfig& c) { c.grabcut_tol = tol; });
    bind(app->add_option("--min-support", min_support, "Hough perimeter support needed to accept a coin"),
         [this](PipelineConfig& c) { c.min_support = min_support; });
    bind(app->add_option("--shapes", shapes, "JSON shape-model overrides")->check(CLI::ExistingFile),
         [this](PipelineConfig& c) { c.shapes_path = shapes; });
    bind(app->add_option("--nutrition", nutrition, "JSON nutrition table")->check(CLI::ExistingFile),
         [this](PipelineConfig& c) { c.nutrition_path = nutrition; });
    if (with_jobs) bind(app->add_option("--jobs,-j", jobs, "worker threads"), [this](PipelineConfig& c) { c.jobs = jobs; });
  }

  void bind(CLI::Option* opt, std::function<void(PipelineConfig&)> fn) { setters.emplace_back(opt, std::move(fn)); }

  PipelineConfig resolve() const {
    PipelineConfig config;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      json j;
      try {
        in >> j;
      } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, config_file + ": " + e.what());
      }
      config.merge_json(j, fs::path(config_file).parent_path());
    }
    for (const auto& [opt, fn] : setters)
      if (opt->count() > 0) fn(config);
    config.validate();
    return config;
  }
};

Box parse_box(const std::string& text) {
  Box b;
  char c1 = 0, c2 = 0, c3 = 0;
  std::istringstream in(text);
  if (!(in >> b.xmin >> c1 >> b.ymin >> c2 >> b.xmax >> c3 >> b.ymax) || c1 != ',' || c2 != ',' || c3 != ',' ||
      !in.eof()) {
    throw UsageError("--box expects x0,y0,x1,y1");
  }
  return b;
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  out << j.dump(2) << "\n";
}

Image load_in_stage(const fs::path& path) {
  try {
    return load_image(path);
  } catch (const Error& e) {
    throw StageError("ingest", e);
  }
}

// estimate ---------------------------------------------------------------

struct EstimateArgs {
  std::string top, side;
  std::string top_detections, side_detections;
  std::string manifest, pair;
  std::string report;
  bool overlay = false;
  ConfigFlags flags;
};

int run_estimate(const EstimateArgs& a) {
  PipelineConfig config = a.flags.resolve();
  const PipelineTables tables = PipelineTables::load(config);

  Image top, side;
  std::unique_ptr<DetectorProvider> top_provider, side_provider;
  if (!a.manifest.empty()) {
    if (a.pair.empty()) throw UsageError("--manifest needs --pair");
    const Manifest manifest = load_manifest(a.manifest);
    const auto it = std::find_if(manifest.records.begin(), manifest.records.end(),
                                 [&](const ImagePairRecord& r) { return r.pair_id == a.pair; });
    if (it == manifest.records.end()) throw UsageError("no pair \"" + a.pair + "\" in " + a.manifest);
    top = load_in_stage(manifest.resolve(it->top_image));
    side = load_in_stage(manifest.resolve(it->side_image));
    try {
      top_provider = provider_for_record(manifest, *it, View::Top, config);
      side_provider = provider_for_record(manifest, *it, View::Side, config);
    } catch (const Error& e) {
      throw StageError("detect", e);
    }
  } else {
    if (a.top.empty() || a.side.empty()) throw UsageError("estimate needs --top and --side, or --manifest and --pair");
    top = load_in_stage(a.top);
    side = load_in_stage(a.side);
    auto sidecar = [&](const std::string& explicit_path, const std::string& image) {
      try {
        return sidecar_provider(explicit_path.empty() ? image + config.sidecar_suffix : explicit_path,
                                config.score_threshold);
      } catch (const Error& e) {
        throw StageError("detect", e);
      }
    };
    top_provider = sidecar(a.top_detections, a.top);
    side_provider = sidecar(a.side_detections, a.side);
  }

  const EstimateReport report = estimate_pair(top, side, *top_provider, *side_provider, tables, config);
  write_json(report_to_json(report), a.report);
  if (a.overlay) {
    const fs::path dir = a.report.empty() || a.report == "-" ? fs::current_path() : fs::path(a.report).parent_path();
    const std::string stem = a.report.empty() || a.report == "-" ? "estimate" : fs::path(a.report).stem().string();
    save_png(dir / (stem + "_top_overlay.png"), render_overlay(top, report, View::Top));
    save_png(dir / (stem + "_side_overlay.png"), render_overlay(side, report, View::Side));
  }
  for (const std::string& w : tables.nutrition.warnings()) std::cerr << "warning: " << w << "\n";
  return kExitOk;
}

// evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string manifest;
  std::string report;
  bool no_timings = false;
  ConfigFlags flags;
};

int run_evaluate(const EvaluateArgs& a) {
  const PipelineConfig config = a.flags.resolve();
  ManifestLoad load;
  try {
    load = load_manifest_lenient(a.manifest);
  } catch (const Error& e) {
    throw StageError("ingest", e);
  }
  EvaluationReport report;
  try {
    report = evaluate_manifest(load, config);
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw;
    throw StageError("eval", e);
  }
  write_json(evaluation_to_json(report, !a.no_timings), a.report);
  std::cerr << report.estimates.size() << " evaluated, " << report.discarded.size() << " discarded of "
            << report.total_records << "\n";
  return kExitOk;
}

// segment / calibrate / foods / synth -------------------------------------

struct SegmentArgs {
  std::string image, box, out, overlay;
  int iters = 5;
  double tol = 1e-3;
};

int run_segment(const SegmentArgs& a) {
  const Box box = parse_box(a.box);
  const Image image = load_in_stage(a.image);
  GrabCutOptions opts;
  opts.max_iters = a.iters;
  opts.rel_tol = a.tol;
  GrabCutResult result;
  try {
    result = grabcut_run(image, box, opts);
  } catch (const Error& e) {
    throw StageError("segment", e);
  }
  if (!a.out.empty()) save_mask_png(a.out, result.mask);
  if (!a.overlay.empty()) {
    Image over = image;
    for (const Point& p : result.contour) over.set(p.x, p.y, {0, 230, 0});
    save_png(a.overlay, over);
  }
  write_json({{"area_px", result.mask.count()},
              {"contour_points", result.contour.size()},
              {"cuts", result.cuts},
              {"energies", result.energies}},
             "");
  return kExitOk;
}

struct CalibrateArgs {
  std::string image, box;
  double min_support = 0.4;
};

int run_calibrate(const CalibrateArgs& a) {
  const Box box = parse_box(a.box);
  const Image image = load_in_stage(a.image);
  HoughOptions opts;
  opts.min_support = a.min_support;
  try {
    const CircleEstimate c = detect_coin(image, box, opts);
    const ScaleFactor s = scale_from_coin(c);
    write_json({{"cx", c.cx}, {"cy", c.cy}, {"r", c.r}, {"support", c.support}, {"cm_per_px", s.cm_per_px}}, "");
  } catch (const Error& e) {
    throw StageError("calibrate", e);
  }
  return kExitOk;
}

int run_foods(bool as_json, const std::string& nutrition) {
  const NutritionTable table = nutrition.empty() ? NutritionTable::builtin() : NutritionTable::from_json_file(nutrition);
  if (as_json) {
    json rows = json::array();
    for (const FoodSpec& f : table.foods())
      rows.push_back({{"label", f.label},
                      {"density_g_cm3", f.density_g_cm3},
                      {"energy_kcal_g", f.energy_kcal_g},
                      {"shape", std::string(to_string(f.shape))}});
    std::cout << rows.dump(2) << "\n";
  } else {
    std::printf("%-18s %8s %8s  %s\n", "food", "g/cm3", "kcal/g", "shape");
    for (const FoodSpec& f : table.foods())
      std::printf("%-18s %8.2f %8.2f  %s\n", f.label.c_str(), f.density_g_cm3, f.energy_kcal_g,
                  std::string(to_string(f.shape)).c_str());
  }
  for (const std::string& w : table.warnings()) std::cerr << "warning: " << w << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Food volume and calorie estimation from a top and a side photo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "foodcal 0.1.0");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate volume and calories for one photo pair");
  estimate->add_option("--top", est.top, "top-view image");
  estimate->add_option("--side", est.side, "side-view image");
  estimate->add_option("--top-detections", est.top_detections, "sidecar for the top view");
  estimate->add_option("--side-detections", est.side_detections, "sidecar for the side view");
  estimate->add_option("--manifest", est.manifest, "take the pair from a manifest")->check(CLI::ExistingFile);
  estimate->add_option("--pair", est.pair, "pair id within --manifest");
  estimate->add_option("--report,-o", est.report, "write the report here instead of stdout");
  estimate->add_flag("--overlay", est.overlay, "also write annotated top/side PNGs next to the report");
  est.flags.add(estimate, false);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Run every pair of a manifest and report mean volume error per food");
  evaluate->add_option("--manifest", ev.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--report,-o", ev.report, "report path (default stdout)");
  evaluate->add_flag("--no-timings", ev.no_timings, "omit per-pair timings");
  ev.flags.add(evaluate, true);

  SegmentArgs seg;
  auto* segment = app.add_subcommand("segment", "GrabCut one box of one image");
  segment->add_option("--image", seg.image)->required();
  segment->add_option("--box", seg.box, "x0,y0,x1,y1 (inclusive)")->required();
  segment->add_option("--iters", seg.iters)->check(CLI::Range(1, 100));
  segment->add_option("--tol", seg.tol)->check(CLI::Range(0.0, 1.0));
  segment->add_option("--out", seg.out, "mask PNG");
  segment->add_option("--overlay", seg.overlay, "image with the contour drawn in");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Find the coin inside a box and report the scale");
  calibrate->add_option("--image", cal.image)->required();
  calibrate->add_option("--box", cal.box, "x0,y0,x1,y1 (inclusive)")->required();
  calibrate->add_option("--min-support", cal.min_support)->check(CLI::Range(0.0, 1.0));

  bool foods_json = false;
  std::string foods_nutrition;
  auto* foods = app.add_subcommand("foods", "Print the nutrition table");
  foods->add_flag("--json", foods_json);
  foods->add_option("--nutrition", foods_nutrition)->check(CLI::ExistingFile);

  std::string synth_out;
  int synth_count = 6;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with known volumes");
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--count", synth_count)->check(CLI::Range(1, 10000));
  synth->add_option("--seed", synth_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*estimate) return run_estimate(est);
    if (*evaluate) return run_evaluate(ev);
    if (*segment) return run_segment(seg);
    if (*calibrate) return run_calibrate(cal);
    if (*foods) return run_foods(foods_json, foods_nutrition);
    if (*synth) {
      std::cout << write_synthetic_dataset(synth_out, synth_count, synth_seed).string() << "\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const StageError& e) {
    std::cerr << "error: stage=" << e.stage() << " reason=" << e.name() << ": " << e.what() << "\n";
    return kExitStage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::InvalidArgument ? kExitUsage : kExitStage;
  }
  return kExitUsage;
}
