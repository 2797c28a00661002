#include "foodcal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "foodcal/error.hpp"
#include "foodcal/nutrition.hpp"

namespace foodcal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint8_t clamp_channel(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void add_noise(Image& img, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (std::uint8_t& v : img.data()) v = clamp_channel(v + n(rng));
}

// Pixel centres at integer coordinates; inclusive of the boundary.
void fill_disc(Image& img, Mask* mask, double cx, double cy, double r, Rgb c) {
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(cy + r)));
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(cx + r)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) {
        img.set(x, y, c);
        if (mask) mask->set(x, y);
      }
}

void fill_rect(Image& img, Mask* mask, const Box& b, Rgb c) {
  for (int y = std::max(0, b.ymin); y <= std::min(img.height() - 1, b.ymax); ++y)
    for (int x = std::max(0, b.xmin); x <= std::min(img.width() - 1, b.xmax); ++x) {
      img.set(x, y, c);
      if (mask) mask->set(x, y);
    }
}

Box mask_bounds(const Mask& m) {
  Box b{m.width(), m.height(), -1, -1};
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.at(x, y)) {
        b.xmin = std::min(b.xmin, x);
        b.ymin = std::min(b.ymin, y);
        b.xmax = std::max(b.xmax, x);
        b.ymax = std::max(b.ymax, y);
      }
  return b;
}

Box widen(const Box& b, int margin, int w, int h) {
  return {std::max(0, b.xmin - margin), std::max(0, b.ymin - margin), std::min(w - 1, b.xmax + margin),
          std::min(h - 1, b.ymax + margin)};
}

// Food footprint in pixels for one view: (width, height) of its bounding rectangle.
std::pair<double, double> footprint(const SynthFood& f, bool top, double s) {
  switch (f.shape) {
    case SynthShape::Sphere:
      return {2 * f.radius_cm / s, 2 * f.radius_cm / s};
    case SynthShape::Cylinder:
      return {2 * f.radius_cm / s, top ? 2 * f.radius_cm / s : f.height_cm / s};
    case SynthShape::Cuboid:
      return {f.width_cm / s, (top ? f.depth_cm : f.height_cm) / s};
  }
  return {0, 0};
}

SynthView render_view(const SynthFood& f, const SynthOptions& o, bool top, std::uint64_t seed) {
  const double s = o.cm_per_px;
  const double coin_r = o.coin_diameter_cm / 2 / s;
  const auto [fw, fh] = footprint(f, top, s);
  const int m = o.margin_px;
  const int coin_span = static_cast<int>(std::ceil(2 * coin_r)) + 1;
  const int width = m + coin_span + m + static_cast<int>(std::ceil(fw)) + 1 + m;
  const int height = 2 * m + static_cast<int>(std::ceil(std::max(fh, 2 * coin_r))) + 1;

  SynthView v;
  v.image = Image(width, height, o.background);
  v.food_truth = Mask(width, height);
  const double mid_y = (height - 1) / 2.0;
  const double coin_cx = m + coin_r;
  v.coin_truth = {coin_cx, mid_y, coin_r, 1.0};
  fill_disc(v.image, nullptr, coin_cx, mid_y, coin_r, o.coin_color);

  const double fx0 = m + coin_span + m;
  const double fcx = fx0 + fw / 2;
  if (f.shape == SynthShape::Sphere || (f.shape == SynthShape::Cylinder && top)) {
    fill_disc(v.image, &v.food_truth, fcx, mid_y, f.radius_cm / s, f.color);
  } else {
    // Rectangle of fw x fh pixel centres.
    const int x0 = static_cast<int>(std::lround(fx0));
    const int y0 = static_cast<int>(std::lround(mid_y - fh / 2));
    fill_rect(v.image, &v.food_truth,
              {x0, y0, x0 + static_cast<int>(std::lround(fw)) - 1, y0 + static_cast<int>(std::lround(fh)) - 1},
              f.color);
  }
  add_noise(v.image, o.noise_sigma, seed);
  v.food_box = widen(mask_bounds(v.food_truth), o.box_margin_px, width, height);
  const int cr = static_cast<int>(std::ceil(coin_r));
  v.coin_box = widen({static_cast<int>(std::floor(coin_cx)) - cr, static_cast<int>(std::floor(mid_y)) - cr,
                      static_cast<int>(std::ceil(coin_cx)) + cr, static_cast<int>(std::ceil(mid_y)) + cr},
                     o.box_margin_px / 2, width, height);
  return v;
}

json detection_json(const std::string& label, const Box& b, double score) {
  return {{"label", label}, {"xmin", b.xmin}, {"ymin", b.ymin}, {"xmax", b.xmax}, {"ymax", b.ymax}, {"score", score}};
}

}  // namespace

double SynthFood::volume_cm3() const {
  switch (shape) {
    case SynthShape::Sphere:
      return 4.0 / 3.0 * std::numbers::pi * radius_cm * radius_cm * radius_cm;
    case SynthShape::Cylinder:
      return std::numbers::pi * radius_cm * radius_cm * height_cm;
    case SynthShape::Cuboid:
      return width_cm * depth_cm * height_cm;
  }
  return 0.0;
}

SynthScene render_scene(const SynthFood& food, const SynthOptions& options) {
  if (!(options.cm_per_px > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
  SynthScene scene;
  scene.top = render_view(food, options, true, options.seed * 2 + 1);
  scene.side = render_view(food, options, false, options.seed * 2 + 2);
  scene.true_volume_cm3 = food.volume_cm3();
  scene.cm_per_px = options.cm_per_px;
  return scene;
}

CoinScene render_coin(int width, int height, double cx, double cy, double r, Rgb coin, Rgb background,
                      double noise_sigma, int box_margin, std::uint64_t seed) {
  CoinScene out;
  out.image = Image(width, height, background);
  fill_disc(out.image, nullptr, cx, cy, r, coin);
  add_noise(out.image, noise_sigma, seed);
  out.box = widen({static_cast<int>(std::floor(cx - r)), static_cast<int>(std::floor(cy - r)),
                   static_cast<int>(std::ceil(cx + r)), static_cast<int>(std::ceil(cy + r))},
                  box_margin, width, height);
  out.truth = {cx, cy, r, 1.0};
  return out;
}

SquareScene render_square(int width, int height, const Box& square, Rgb fg, Rgb background, double noise_sigma,
                          int box_margin, std::uint64_t seed) {
  SquareScene out;
  out.image = Image(width, height, background);
  out.truth = Mask(width, height);
  fill_rect(out.image, &out.truth, square, fg);
  add_noise(out.image, noise_sigma, seed);
  out.box = widen(square, box_margin, width, height);
  return out;
}

fs::path write_synthetic_dataset(const fs::path& dir, int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "count must be positive");
  fs::create_directories(dir / "images");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  Manifest manifest;
  manifest.dataset_root = dir;
  for (int i = 0; i < count; ++i) {
    SynthFood food;
    switch (i % 3) {
      case 0:
        food.label = "apple";
        food.shape = SynthShape::Sphere;
        food.radius_cm = 2.5 + 1.5 * u(rng);
        food.color = {190, 35, 40};
        break;
      case 1:
        food.label = "bread";
        food.shape = SynthShape::Cuboid;
        food.width_cm = 6.0 + 4.0 * u(rng);
        food.depth_cm = 5.0 + 3.0 * u(rng);
        food.height_cm = 2.0 + 2.0 * u(rng);
        food.color = {225, 185, 120};
        break;
      default:
        food.label = "mooncake";
        food.shape = SynthShape::Cylinder;
        food.radius_cm = 2.5 + 1.0 * u(rng);
        food.height_cm = 2.0 + 1.0 * u(rng);
        food.color = {170, 105, 40};
        break;
    }
    SynthOptions opts;
    opts.cm_per_px = 0.05 + 0.03 * u(rng);
    opts.seed = seed * 1000 + static_cast<std::uint64_t>(i);
    const SynthScene scene = render_scene(food, opts);

    char id[32];
    std::snprintf(id, sizeof id, "synth_%03d", i + 1);
    ImagePairRecord rec;
    rec.pair_id = id;
    rec.food_label = food.label;
    rec.top_image = fs::path("images") / (std::string(id) + "_T.png");
    rec.side_image = fs::path("images") / (std::string(id) + "_S.png");
    rec.true_volume_cm3 = scene.true_volume_cm3;
    rec.true_mass_g = scene.true_volume_cm3 * NutritionTable::builtin().lookup(food.label).density_g_cm3;
    rec.annotations_top = std::vector<Detection>{{"coin", scene.top.coin_box, 1.0}, {food.label, scene.top.food_box, 1.0}};
    rec.annotations_side =
        std::vector<Detection>{{"coin", scene.side.coin_box, 1.0}, {food.label, scene.side.food_box, 1.0}};

    for (const auto& [path, view] : {std::pair{rec.top_image, &scene.top}, std::pair{rec.side_image, &scene.side}}) {
      save_png(dir / path, view->image);
      json sidecar = {{"image", path.filename().string()},
                      {"detections",
                       {detection_json("coin", view->coin_box, 0.97), detection_json(food.label, view->food_box, 0.91)}}};
      std::ofstream out(dir / (path.string() + ".detections.json"));
      out << sidecar.dump(2) << "\n";
    }
    manifest.records.push_back(std::move(rec));
  }
  // A relative root keeps the dataset relocatable.
  manifest.dataset_root = ".";
  const fs::path manifest_path = dir / "manifest.json";
  save_manifest(manifest_path, manifest);
  return manifest_path;
}

double mask_iou(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorKind::InvalidArgument, "mask sizes differ");
  }
  std::size_t inter = 0, uni = 0;
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    inter += (da[i] && db[i]);
    uni += (da[i] || db[i]);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace foodcal
