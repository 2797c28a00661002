#include "foodcal/calibrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "foodcal/error.hpp"

namespace foodcal {

namespace {

constexpr int kSupportSectors = 36;
constexpr int kMaxCandidates = 32;
constexpr double kRefineBand = 2.0;       // px around the voted circle
constexpr double kRadialAlignment = 0.8;  // |cos| between gradient and radius

struct EdgePixel {
  int x;
  int y;
  double ux;  // unit gradient direction
  double uy;
  double mag;
};

class Accumulator {
 public:
  Accumulator(const Box& box, int rmin, int rmax)
      : box_(box), rmin_(rmin), rmax_(rmax), w_(box.width()), h_(box.height()),
        bins_(static_cast<std::size_t>(w_) * h_ * (rmax - rmin + 1), 0) {}

  bool vote(int cx, int cy, int r) {
    if (!box_.contains(cx, cy)) return false;
    ++bins_[index(cx, cy, r)];
    return true;
  }

  std::uint32_t at(int cx, int cy, int r) const {
    if (!box_.contains(cx, cy) || r < rmin_ || r > rmax_) return 0;
    return bins_[index(cx, cy, r)];
  }

  std::size_t index(int cx, int cy, int r) const {
    return (static_cast<std::size_t>(r - rmin_) * h_ + (cy - box_.ymin)) * w_ + (cx - box_.xmin);
  }

  std::uint32_t max() const { return bins_.empty() ? 0 : *std::max_element(bins_.begin(), bins_.end()); }

  template <typename Fn>
  void for_each_bin(Fn&& fn) const {
    std::size_t i = 0;
    for (int r = rmin_; r <= rmax_; ++r)
      for (int y = box_.ymin; y <= box_.ymax; ++y)
        for (int x = box_.xmin; x <= box_.xmax; ++x, ++i) fn(x, y, r, bins_[i]);
  }

  int rmin() const { return rmin_; }
  int rmax() const { return rmax_; }

 private:
  Box box_;
  int rmin_, rmax_, w_, h_;
  std::vector<std::uint32_t> bins_;
};

struct Candidate {
  int cx, cy, r;
  std::uint32_t votes;
  double support = 0.0;
};

std::vector<EdgePixel> edge_pixels(const Image& image, const Box& box, double percentile) {
  // Grey values over the box plus a one-pixel ring, clamped to the image.
  const int x0 = box.xmin - 1, y0 = box.ymin - 1;
  const int gw = box.width() + 2, gh = box.height() + 2;
  std::vector<double> grey(static_cast<std::size_t>(gw) * gh);
  for (int y = 0; y < gh; ++y) {
    const int iy = std::clamp(y0 + y, 0, image.height() - 1);
    for (int x = 0; x < gw; ++x) {
      const int ix = std::clamp(x0 + x, 0, image.width() - 1);
      grey[static_cast<std::size_t>(y) * gw + x] = luma(image.at(ix, iy));
    }
  }
  auto g = [&](int x, int y) { return grey[static_cast<std::size_t>(y - y0) * gw + (x - x0)]; };

  struct Grad {
    double gx, gy, mag;
  };
  std::vector<Grad> grads;
  grads.reserve(static_cast<std::size_t>(box.area()));
  for (int y = box.ymin; y <= box.ymax; ++y) {
    for (int x = box.xmin; x <= box.xmax; ++x) {
      const double gx = (g(x + 1, y - 1) + 2 * g(x + 1, y) + g(x + 1, y + 1)) -
                        (g(x - 1, y - 1) + 2 * g(x - 1, y) + g(x - 1, y + 1));
      const double gy = (g(x - 1, y + 1) + 2 * g(x, y + 1) + g(x + 1, y + 1)) -
                        (g(x - 1, y - 1) + 2 * g(x, y - 1) + g(x + 1, y - 1));
      grads.push_back({gx, gy, std::hypot(gx, gy)});
    }
  }

  std::vector<double> mags;
  mags.reserve(grads.size());
  for (const Grad& gr : grads) mags.push_back(gr.mag);
  const auto k = static_cast<std::size_t>(percentile * static_cast<double>(mags.size() - 1));
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k), mags.end());
  const double threshold = mags[k];

  std::vector<EdgePixel> edges;
  std::size_t i = 0;
  for (int y = box.ymin; y <= box.ymax; ++y) {
    for (int x = box.xmin; x <= box.xmax; ++x, ++i) {
      const Grad& gr = grads[i];
      if (gr.mag > 1e-9 && gr.mag >= threshold) edges.push_back({x, y, gr.gx / gr.mag, gr.gy / gr.mag, gr.mag});
    }
  }
  return edges;
}

// Fraction of angular sectors around (cx, cy) holding at least one edge pixel
// whose gradient-directed vote lands within one bin of the candidate.
double perimeter_support(const std::vector<EdgePixel>& edges, const Candidate& c) {
  std::array<bool, kSupportSectors> covered{};
  for (const EdgePixel& e : edges) {
    bool hit = false;
    for (int r = c.r - 1; r <= c.r + 1 && !hit; ++r) {
      if (r < 1) continue;
      for (int sign : {1, -1}) {
        const long vx = std::lround(e.x + sign * r * e.ux);
        const long vy = std::lround(e.y + sign * r * e.uy);
        if (std::abs(vx - c.cx) <= 1 && std::abs(vy - c.cy) <= 1) {
          hit = true;
          break;
        }
      }
    }
    if (!hit) continue;
    const double angle = std::atan2(e.y - c.cy, e.x - c.cx) + std::numbers::pi;
    auto sector = static_cast<int>(angle / (2 * std::numbers::pi) * kSupportSectors);
    covered[static_cast<std::size_t>(std::clamp(sector, 0, kSupportSectors - 1))] = true;
  }
  return static_cast<double>(std::count(covered.begin(), covered.end(), true)) / kSupportSectors;
}

// Gradient-weighted algebraic circle fit (x^2 + y^2 + a x + b y + c = 0) over
// edge pixels lying near `c` with a roughly radial gradient. Both flanks of a
// step edge respond, so the weighted fit centres on the step itself.
std::optional<CircleEstimate> refine_circle(const std::vector<EdgePixel>& edges, const CircleEstimate& c) {
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  int used = 0;
  for (const EdgePixel& e : edges) {
    const double dx = e.x - c.cx, dy = e.y - c.cy;
    const double d = std::hypot(dx, dy);
    if (d < 1e-9 || std::abs(d - c.r) > kRefineBand) continue;
    if (std::abs(e.ux * dx + e.uy * dy) / d < kRadialAlignment) continue;
    const Eigen::Vector3d row(e.x, e.y, 1.0);
    ata += e.mag * row * row.transpose();
    atb += e.mag * row * -(double(e.x) * e.x + double(e.y) * e.y);
    ++used;
  }
  if (used < 8) return std::nullopt;
  const Eigen::Vector3d sol = ata.ldlt().solve(atb);
  const double cx = -sol[0] / 2, cy = -sol[1] / 2;
  const double r2 = cx * cx + cy * cy - sol[2];
  if (!std::isfinite(r2) || r2 <= 0.0) return std::nullopt;
  const CircleEstimate out{cx, cy, std::sqrt(r2), c.support};
  if (std::hypot(out.cx - c.cx, out.cy - c.cy) > kRefineBand || std::abs(out.r - c.r) > kRefineBand) return std::nullopt;
  return out;
}

}  // namespace

bool ScaleFactor::valid() const noexcept { return std::isfinite(cm_per_px) && cm_per_px > 0.0; }

double luma(Rgb c) noexcept { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

CircleEstimate detect_coin(const Image& image, const Box& box, const HoughOptions& options) {
  if (!box.valid() || !box.within(image.width(), image.height())) {
    throw Error(ErrorKind::InvalidBox, "coin box lies outside the image or is degenerate");
  }
  if (box.min_side() < kMinCoinBoxSide) {
    throw Error(ErrorKind::BoxTooSmall, "coin box shorter side " + std::to_string(box.min_side()) +
                                            " px is below " + std::to_string(kMinCoinBoxSide));
  }
  const int rmin = std::max(1, static_cast<int>(std::ceil(options.min_radius_ratio * box.min_side())));
  const int rmax = static_cast<int>(std::floor(options.max_radius_ratio * box.min_side()));
  if (rmax < rmin) throw Error(ErrorKind::BoxTooSmall, "coin box admits no radius");

  const std::vector<EdgePixel> edges = edge_pixels(image, box, options.edge_percentile);
  if (edges.empty()) throw Error(ErrorKind::NoCircle, "no edges inside the coin box");

  Accumulator acc(box, rmin, rmax);
  for (const EdgePixel& e : edges) {
    for (int r = rmin; r <= rmax; ++r) {
      for (int sign : {1, -1}) {
        acc.vote(static_cast<int>(std::lround(e.x + sign * r * e.ux)),
                 static_cast<int>(std::lround(e.y + sign * r * e.uy)), r);
      }
    }
  }

  // 3x3x3 non-maximum suppression over bins with a meaningful vote count.
  const std::uint32_t floor_votes = std::max<std::uint32_t>(3, acc.max() / 4);
  std::vector<Candidate> candidates;
  acc.for_each_bin([&](int x, int y, int r, std::uint32_t v) {
    if (v < floor_votes) return;
    for (int dr = -1; dr <= 1; ++dr)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if ((dx || dy || dr) && acc.at(x + dx, y + dy, r + dr) > v) return;
    candidates.push_back({x, y, r, v});
  });
  if (candidates.empty()) throw Error(ErrorKind::NoCircle, "no circular structure inside the coin box");

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.votes > b.votes; });
  if (candidates.size() > kMaxCandidates) candidates.resize(kMaxCandidates);
  for (Candidate& c : candidates) c.support = perimeter_support(edges, c);

  const Candidate* best = &candidates.front();
  for (const Candidate& c : candidates) {
    const double ds = c.support - best->support;
    if (ds > 1e-12 || (std::abs(ds) <= 1e-12 && (c.r > best->r || (c.r == best->r && c.votes > best->votes)))) {
      best = &c;
    }
  }
  if (best->support < options.min_support) {
    throw Error(ErrorKind::NoCircle, "best circle support " + std::to_string(best->support) + " is below " +
                                         std::to_string(options.min_support));
  }

  // Vote-weighted centroid in a 5x5x5 window; a rasterised edge splits its
  // votes between neighbouring radii and centres.
  double sw = 0, sx = 0, sy = 0, sr = 0;
  for (int r = best->r - 2; r <= best->r + 2; ++r)
    for (int y = best->cy - 2; y <= best->cy + 2; ++y)
      for (int x = best->cx - 2; x <= best->cx + 2; ++x) {
        const double v = acc.at(x, y, r);
        sw += v;
        sx += v * x;
        sy += v * y;
        sr += v * r;
      }
  const CircleEstimate voted{sx / sw, sy / sw, sr / sw, best->support};
  return refine_circle(edges, voted).value_or(voted);
}

ScaleFactor scale_from_coin(const CircleEstimate& circle, const CalibrationConstants& constants) {
  if (!(circle.r > 0.0) || !std::isfinite(circle.r)) {
    throw Error(ErrorKind::InvalidArgument, "circle radius must be positive");
  }
  return {constants.coin_diameter_cm / (2.0 * circle.r)};
}

}  // namespace foodcal
