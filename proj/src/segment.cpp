#include "foodcal/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include <Eigen/Cholesky>

#include "foodcal/error.hpp"
#include "foodcal/maxflow.hpp"

namespace foodcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::size_t> side_pixels(const SegState& state, bool foreground) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < state.trimap.size(); ++p)
    if (is_foreground(state.trimap[p]) == foreground) out.push_back(p);
  return out;
}

// Farthest-point seeded Lloyd iterations; returns a cluster index per sample.
std::vector<int> kmeans(const SegState& state, const std::vector<std::size_t>& pixels, int k, int iterations) {
  std::vector<int> labels(pixels.size(), 0);
  if (pixels.empty()) return labels;

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t p : pixels) mean += state.color(p);
  mean /= static_cast<double>(pixels.size());

  std::vector<Eigen::Vector3d> centers;
  std::vector<double> nearest(pixels.size(), std::numeric_limits<double>::infinity());
  {
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      const double d = (state.color(pixels[i]) - mean).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    centers.push_back(state.color(pixels[far]));
  }
  while (static_cast<int>(centers.size()) < k) {
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      nearest[i] = std::min(nearest[i], (state.color(pixels[i]) - centers.back()).squaredNorm());
      if (nearest[i] > far_d) {
        far_d = nearest[i];
        far = i;
      }
    }
    centers.push_back(state.color(pixels[far]));
  }

  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      const Eigen::Vector3d z = state.color(pixels[i]);
      int best = 0;
      double best_d = (z - centers[0]).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (z - centers[static_cast<std::size_t>(c)]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      labels[i] = best;
    }
    std::vector<Eigen::Vector3d> sums(static_cast<std::size_t>(k), Eigen::Vector3d::Zero());
    std::vector<long> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      sums[static_cast<std::size_t>(labels[i])] += state.color(pixels[i]);
      ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centers[static_cast<std::size_t>(c)] = sums[static_cast<std::size_t>(c)] / counts[static_cast<std::size_t>(c)];
  }
  return labels;
}

struct ComponentStats {
  long count = 0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
};

ComponentStats component_stats(const SegState& state, const std::vector<std::size_t>& pixels, int k) {
  ComponentStats s;
  for (std::size_t p : pixels) {
    if (state.component[p] != k) continue;
    s.mean += state.color(p);
    ++s.count;
  }
  if (s.count == 0) return s;
  s.mean /= static_cast<double>(s.count);
  for (std::size_t p : pixels) {
    if (state.component[p] != k) continue;
    const Eigen::Vector3d d = state.color(p) - s.mean;
    s.cov += d * d.transpose();
  }
  s.cov /= static_cast<double>(s.count);
  s.cov.diagonal().array() += kCovarianceRegularization;
  return s;
}

GaussianMixture mixture_from(const std::vector<ComponentStats>& stats, long total) {
  GaussianMixture g(static_cast<int>(stats.size()));
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const ComponentStats& s = stats[k];
    if (s.count == 0) {
      g.set_component(static_cast<int>(k), 0.0, Eigen::Vector3d::Zero(),
                      Eigen::Matrix3d::Identity() * kCovarianceRegularization);
    } else {
      g.set_component(static_cast<int>(k), static_cast<double>(s.count) / static_cast<double>(total), s.mean, s.cov);
    }
  }
  g.finalize();
  return g;
}

void learn_side(SegState& state, bool foreground) {
  GaussianMixture& gmm = foreground ? state.fg_gmm : state.bg_gmm;
  const std::vector<std::size_t> pixels = side_pixels(state, foreground);
  if (pixels.empty()) return;
  const int k_total = gmm.size();
  const auto total = static_cast<long>(pixels.size());

  std::vector<ComponentStats> stats(static_cast<std::size_t>(k_total));
  for (int k = 0; k < k_total; ++k) stats[static_cast<std::size_t>(k)] = component_stats(state, pixels, k);

  for (int k = 0; k < k_total; ++k) {
    if (stats[static_cast<std::size_t>(k)].count > 0) continue;
    // Re-seed the starved component at the pixel the other components explain worst.
    const GaussianMixture others = mixture_from(stats, total);
    std::size_t target = pixels.size();
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      const int donor = state.component[pixels[i]];
      if (stats[static_cast<std::size_t>(donor)].count < 2) continue;
      const double ll = others.log_likelihood(state.color(pixels[i]));
      if (ll < worst) {
        worst = ll;
        target = i;
      }
    }
    if (target == pixels.size()) continue;  // fewer pixels than components
    const int donor = state.component[pixels[target]];
    state.component[pixels[target]] = k;
    stats[static_cast<std::size_t>(donor)] = component_stats(state, pixels, donor);
    stats[static_cast<std::size_t>(k)] = component_stats(state, pixels, k);
  }
  gmm = mixture_from(stats, total);
}

struct SideEnergy {
  double fg = 0.0;      // data cost of foreground-labelled pixels
  double bg = 0.0;      // data cost of background-labelled pixels
  double smooth = 0.0;  // smoothness across label changes

  double total() const { return fg + bg + smooth; }
};

SideEnergy energy_parts(const SegState& state) {
  const DataTerms dt = data_terms(state);
  SideEnergy e;
  for (std::size_t p = 0; p < state.trimap.size(); ++p) {
    if (is_foreground(state.trimap[p])) {
      e.fg += dt.cost_fg[p];
    } else {
      e.bg += dt.cost_bg[p];
    }
  }
  for (const PixelGraph::Edge& edge : smoothness_edges(state)) {
    if (is_foreground(state.trimap[static_cast<std::size_t>(edge.u)]) !=
        is_foreground(state.trimap[static_cast<std::size_t>(edge.v)]))
      e.smooth += edge.cap;
  }
  return e;
}

}  // namespace

// --- GaussianMixture --------------------------------------------------------

GaussianMixture::GaussianMixture(int components)
    : weights_(static_cast<std::size_t>(components), 0.0),
      means_(static_cast<std::size_t>(components), Eigen::Vector3d::Zero()),
      covs_(static_cast<std::size_t>(components), Eigen::Matrix3d::Identity()),
      inverses_(static_cast<std::size_t>(components), Eigen::Matrix3d::Identity()),
      log_norms_(static_cast<std::size_t>(components), kNegInf) {}

void GaussianMixture::set_component(int k, double weight, const Eigen::Vector3d& mean, const Eigen::Matrix3d& cov) {
  const auto i = static_cast<std::size_t>(k);
  weights_[i] = weight;
  means_[i] = mean;
  covs_[i] = cov;
}

void GaussianMixture::finalize() {
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const Eigen::LLT<Eigen::Matrix3d> llt(covs_[k]);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::DegenerateColors, "GMM covariance is not positive definite");
    }
    inverses_[k] = llt.solve(Eigen::Matrix3d::Identity());
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    log_norms_[k] = weights_[k] > 0.0
                        ? std::log(weights_[k]) - 0.5 * log_det - 1.5 * std::log(2.0 * std::numbers::pi)
                        : kNegInf;
  }
}

double GaussianMixture::component_log_density(int k, const Eigen::Vector3d& z) const {
  const auto i = static_cast<std::size_t>(k);
  if (log_norms_[i] == kNegInf) return kNegInf;
  const Eigen::Vector3d d = z - means_[i];
  return log_norms_[i] - 0.5 * d.dot(inverses_[i] * d);
}

double GaussianMixture::log_likelihood(const Eigen::Vector3d& z) const {
  // Streaming log-sum-exp.
  double m = kNegInf;
  double s = 0.0;
  for (int k = 0; k < size(); ++k) {
    const double t = component_log_density(k, z);
    if (t == kNegInf) continue;
    if (t > m) {
      s = s * std::exp(m - t) + 1.0;
      m = t;
    } else {
      s += std::exp(t - m);
    }
  }
  if (m == kNegInf) return kNegInf;
  return m + std::log(s);
}

int GaussianMixture::most_likely_component(const Eigen::Vector3d& z) const {
  int best = 0;
  double best_v = component_log_density(0, z);
  for (int k = 1; k < size(); ++k) {
    const double v = component_log_density(k, z);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  return best;
}

// --- SegState ---------------------------------------------------------------

Eigen::Vector3d SegState::color(std::size_t pixel) const {
  const std::uint8_t* px = image->data().data() + pixel * 3;
  return {static_cast<double>(px[0]), static_cast<double>(px[1]), static_cast<double>(px[2])};
}

double compute_beta(const Image& image) {
  const int w = image.width(), h = image.height();
  double sum = 0.0;
  long pairs = 0;
  auto diff2 = [&](int x0, int y0, int x1, int y1) {
    const Rgb a = image.at(x0, y0), b = image.at(x1, y1);
    const double dr = a.r - b.r, dg = a.g - b.g, db = a.b - b.b;
    return dr * dr + dg * dg + db * db;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) sum += diff2(x, y, x + 1, y), ++pairs;
      if (y + 1 < h) sum += diff2(x, y, x, y + 1), ++pairs;
      if (x + 1 < w && y + 1 < h) sum += diff2(x, y, x + 1, y + 1), ++pairs;
      if (x > 0 && y + 1 < h) sum += diff2(x, y, x - 1, y + 1), ++pairs;
    }
  }
  if (pairs == 0 || sum <= 0.0) return 0.0;
  return 1.0 / (2.0 * sum / static_cast<double>(pairs));
}

SegState seg_init(const Image& image, const Box& box, const GrabCutOptions& options) {
  if (!box.valid() || !box.within(image.width(), image.height())) {
    throw Error(ErrorKind::InvalidBox, "segmentation box lies outside the image or is degenerate");
  }
  if (box.area() < 64) {
    throw Error(ErrorKind::BoxTooSmall, "segmentation box area " + std::to_string(box.area()) + " is below 64 px^2");
  }
  if (options.components < 1) throw Error(ErrorKind::InvalidArgument, "GMM needs at least one component");

  SegState state;
  state.image = &image;
  state.box = box;
  state.gamma = options.gamma;
  const std::size_t n = static_cast<std::size_t>(image.width()) * image.height();
  state.trimap.assign(n, Trimap::SureBackground);
  state.component.assign(n, 0);
  for (int y = box.ymin; y <= box.ymax; ++y)
    for (int x = box.xmin; x <= box.xmax; ++x)
      state.trimap[static_cast<std::size_t>(y) * image.width() + x] = Trimap::ProbableForeground;

  const std::vector<std::size_t> fg = side_pixels(state, true);
  const std::vector<std::size_t> bg = side_pixels(state, false);
  if (bg.empty()) throw Error(ErrorKind::DegenerateColors, "box covers the whole image; no background sample");

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t p = 0; p < n; ++p) mean += state.color(p);
  mean /= static_cast<double>(n);
  double variance = 0.0;
  for (std::size_t p = 0; p < n; ++p) variance += (state.color(p) - mean).squaredNorm();
  variance /= static_cast<double>(n);
  if (variance < kDegenerateVariance) throw Error(ErrorKind::DegenerateColors, "image has no colour variation");

  state.beta = compute_beta(image);

  const std::vector<int> fg_labels = kmeans(state, fg, options.components, options.kmeans_iterations);
  const std::vector<int> bg_labels = kmeans(state, bg, options.components, options.kmeans_iterations);
  for (std::size_t i = 0; i < fg.size(); ++i) state.component[fg[i]] = fg_labels[i];
  for (std::size_t i = 0; i < bg.size(); ++i) state.component[bg[i]] = bg_labels[i];

  state.fg_gmm = GaussianMixture(options.components);
  state.bg_gmm = GaussianMixture(options.components);
  learn_gmm(state);
  return state;
}

void assign_components(SegState& state) {
  for (std::size_t p = 0; p < state.trimap.size(); ++p) {
    const GaussianMixture& g = is_foreground(state.trimap[p]) ? state.fg_gmm : state.bg_gmm;
    state.component[p] = g.most_likely_component(state.color(p));
  }
}

void learn_gmm(SegState& state) {
  learn_side(state, true);
  learn_side(state, false);
}

DataTerms data_terms(const SegState& state) {
  const std::size_t n = state.trimap.size();
  DataTerms dt;
  dt.cost_fg.assign(n, 0.0);
  dt.cost_bg.assign(n, 0.0);
  double max_data = 0.0;
  double min_data = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    if (is_sure(state.trimap[p])) continue;
    const Eigen::Vector3d z = state.color(p);
    dt.cost_fg[p] = -state.fg_gmm.log_likelihood(z);
    dt.cost_bg[p] = -state.bg_gmm.log_likelihood(z);
    max_data = std::max({max_data, dt.cost_fg[p], dt.cost_bg[p]});
    min_data = std::min({min_data, dt.cost_fg[p], dt.cost_bg[p]});
  }
  // Exceeds anything a pixel could gain by flipping: its largest shifted
  // data term plus every smoothness edge it touches.
  const double max_incident = state.gamma * (4.0 + 4.0 / std::numbers::sqrt2);
  dt.big = 1.0 + (max_data - min_data) + max_incident;
  for (std::size_t p = 0; p < n; ++p) {
    if (state.trimap[p] == Trimap::SureForeground) {
      dt.cost_bg[p] = dt.big;
    } else if (state.trimap[p] == Trimap::SureBackground) {
      dt.cost_fg[p] = dt.big;
    }
  }
  return dt;
}

std::vector<PixelGraph::Edge> smoothness_edges(const SegState& state) {
  const int w = state.width(), h = state.height();
  std::vector<PixelGraph::Edge> edges;
  edges.reserve(static_cast<std::size_t>(w) * h * 4);
  auto add = [&](int x0, int y0, int x1, int y1, double dist) {
    const int u = y0 * w + x0, v = y1 * w + x1;
    const double d2 = (state.color(static_cast<std::size_t>(u)) - state.color(static_cast<std::size_t>(v))).squaredNorm();
    edges.push_back({u, v, state.gamma * std::exp(-state.beta * d2) / dist});
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) add(x, y, x + 1, y, 1.0);
      if (y + 1 < h) add(x, y, x, y + 1, 1.0);
      if (x + 1 < w && y + 1 < h) add(x, y, x + 1, y + 1, std::numbers::sqrt2);
      if (x > 0 && y + 1 < h) add(x, y, x - 1, y + 1, std::numbers::sqrt2);
    }
  }
  return edges;
}

PixelGraph build_graph(const SegState& state) {
  const DataTerms dt = data_terms(state);
  PixelGraph g;
  g.width = state.width();
  g.height = state.height();
  g.big = dt.big;
  double min_data = 0.0;
  for (std::size_t p = 0; p < state.trimap.size(); ++p)
    if (!is_sure(state.trimap[p])) min_data = std::min({min_data, dt.cost_fg[p], dt.cost_bg[p]});
  g.data_offset = -min_data;

  g.source_cap.resize(state.trimap.size());
  g.sink_cap.resize(state.trimap.size());
  for (std::size_t p = 0; p < state.trimap.size(); ++p) {
    switch (state.trimap[p]) {
      case Trimap::SureBackground:
        g.source_cap[p] = 0.0;
        g.sink_cap[p] = dt.big;
        break;
      case Trimap::SureForeground:
        g.source_cap[p] = dt.big;
        g.sink_cap[p] = 0.0;
        break;
      default:
        g.source_cap[p] = dt.cost_bg[p] + g.data_offset;
        g.sink_cap[p] = dt.cost_fg[p] + g.data_offset;
    }
  }
  g.edges = smoothness_edges(state);
  return g;
}

CutResult min_cut(const PixelGraph& graph) {
  const int n = static_cast<int>(graph.source_cap.size());
  MaxFlowGraph<double> flow_graph(n, graph.edges.size());
  for (int p = 0; p < n; ++p) {
    flow_graph.add_terminal(p, graph.source_cap[static_cast<std::size_t>(p)], graph.sink_cap[static_cast<std::size_t>(p)]);
  }
  for (const PixelGraph::Edge& e : graph.edges) flow_graph.add_edge(e.u, e.v, e.cap, e.cap);
  CutResult result;
  result.flow = flow_graph.solve();
  result.foreground.resize(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) result.foreground[static_cast<std::size_t>(p)] = flow_graph.on_source_side(p) ? 1 : 0;
  return result;
}

double seg_energy(const SegState& state) { return energy_parts(state).total(); }

GrabCutResult grabcut_run(const Image& image, const Box& box, const GrabCutOptions& options) {
  if (options.max_iters < 1) throw Error(ErrorKind::InvalidArgument, "max_iters must be at least 1");
  SegState state = seg_init(image, box, options);

  GrabCutResult result;
  double previous = seg_energy(state);
  result.energies.push_back(previous);

  for (int it = 0; it < options.max_iters; ++it) {
    // A learned model is kept only if it does not raise the data cost of the
    // labelling it was fitted to; hard-assignment EM alone does not promise that.
    const SideEnergy before_learn = energy_parts(state);
    const GaussianMixture old_fg = state.fg_gmm;
    const GaussianMixture old_bg = state.bg_gmm;
    assign_components(state);
    learn_gmm(state);
    const SideEnergy after_learn = energy_parts(state);
    if (after_learn.fg > before_learn.fg) state.fg_gmm = old_fg;
    if (after_learn.bg > before_learn.bg) state.bg_gmm = old_bg;
    const double before_cut = seg_energy(state);

    const CutResult cut = min_cut(build_graph(state));
    ++result.cuts;

    std::vector<Trimap> previous_trimap = state.trimap;
    for (std::size_t p = 0; p < state.trimap.size(); ++p) {
      if (is_sure(state.trimap[p])) continue;
      state.trimap[p] = cut.foreground[p] ? Trimap::ProbableForeground : Trimap::ProbableBackground;
    }
    double current = seg_energy(state);
    // The cut is optimal, so this only catches floating-point round-off.
    if (current > before_cut) {
      state.trimap = std::move(previous_trimap);
      current = before_cut;
    }
    result.energies.push_back(current);

    const bool any_fg = std::any_of(state.trimap.begin(), state.trimap.end(), is_foreground);
    if (!any_fg) break;
    if (previous - current < options.rel_tol * std::max(std::abs(previous), 1e-300)) break;
    previous = current;
  }

  Mask fg(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      if (is_foreground(state.trimap[static_cast<std::size_t>(y) * image.width() + x])) fg.set(x, y);
  if (fg.count() == 0) throw Error(ErrorKind::EmptyForeground, "graph cut left no foreground inside the box");

  result.mask = largest_component(fg);
  result.contour = trace_contour(result.mask);
  return result;
}

// --- Mask post-processing ----------------------------------------------------

Mask largest_component(const Mask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  int best_label = -1;
  long best_size = 0;
  int next = 0;
  std::queue<int> q;
  for (int start = 0; start < w * h; ++start) {
    if (!mask.at(start % w, start / w) || label[static_cast<std::size_t>(start)] >= 0) continue;
    long size = 0;
    label[static_cast<std::size_t>(start)] = next;
    q.push(start);
    while (!q.empty()) {
      const int p = q.front();
      q.pop();
      ++size;
      const int x = p % w, y = p / w;
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int i = 0; i < 4; ++i) {
        if (nx[i] < 0 || ny[i] < 0 || nx[i] >= w || ny[i] >= h) continue;
        const int np = ny[i] * w + nx[i];
        if (mask.at(nx[i], ny[i]) && label[static_cast<std::size_t>(np)] < 0) {
          label[static_cast<std::size_t>(np)] = next;
          q.push(np);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_label = next;
    }
    ++next;
  }
  Mask out(w, h);
  for (int p = 0; p < w * h; ++p)
    if (best_label >= 0 && label[static_cast<std::size_t>(p)] == best_label) out.set(p % w, p / w);
  return out;
}

std::vector<Point> trace_contour(const Mask& mask) {
  // Clockwise on screen (y down), starting west.
  static constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  static constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  auto direction_of = [](int dx, int dy) {
    for (int d = 0; d < 8; ++d)
      if (kDx[d] == dx && kDy[d] == dy) return d;
    return 0;
  };
  auto on = [&](int x, int y) { return x >= 0 && y >= 0 && x < mask.width() && y < mask.height() && mask.at(x, y); };

  std::vector<Point> contour;
  Point start{-1, -1};
  for (int y = 0; y < mask.height() && start.x < 0; ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) {
        start = {x, y};
        break;
      }
  if (start.x < 0) return contour;

  contour.push_back(start);
  Point current = start;
  int backtrack = 0;  // west of the first raster pixel is always background
  Point second{-1, -1};
  const long limit = 4L * mask.width() * mask.height() + 8;
  for (long step = 0; step < limit; ++step) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int d = (backtrack + k) % 8;
      if (on(current.x + kDx[d], current.y + kDy[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const Point next{current.x + kDx[found], current.y + kDy[found]};
    if (second.x >= 0 && current == start && next == second) break;
    if (second.x < 0) second = next;
    const int prev_d = (found + 7) % 8;
    const Point prev{current.x + kDx[prev_d], current.y + kDy[prev_d]};
    backtrack = direction_of(prev.x - next.x, prev.y - next.y);
    current = next;
    contour.push_back(current);
  }
  if (contour.size() > 1 && contour.back() == start) contour.pop_back();
  return contour;
}

}  // namespace foodcal
