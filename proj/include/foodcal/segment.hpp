#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "foodcal/image.hpp"

namespace foodcal {

enum class Trimap : std::uint8_t {
  SureBackground = 0,
  SureForeground = 1,
  ProbableBackground = 2,
  ProbableForeground = 3,
};

inline bool is_foreground(Trimap t) noexcept {
  return t == Trimap::SureForeground || t == Trimap::ProbableForeground;
}
inline bool is_sure(Trimap t) noexcept { return t == Trimap::SureForeground || t == Trimap::SureBackground; }

inline constexpr double kCovarianceRegularization = 1e-3;
inline constexpr double kDegenerateVariance = 1e-9;

/// Full-covariance Gaussian mixture over RGB colours.
class GaussianMixture {
 public:
  GaussianMixture() = default;
  explicit GaussianMixture(int components);

  int size() const noexcept { return static_cast<int>(weights_.size()); }

  double weight(int k) const { return weights_[static_cast<std::size_t>(k)]; }
  const Eigen::Vector3d& mean(int k) const { return means_[static_cast<std::size_t>(k)]; }
  const Eigen::Matrix3d& covariance(int k) const { return covs_[static_cast<std::size_t>(k)]; }

  /// Sets one component; call finalize() once all components are set.
  void set_component(int k, double weight, const Eigen::Vector3d& mean, const Eigen::Matrix3d& cov);
  /// Caches inverses and normalisers. Throws Error{DegenerateColors} if a
  /// covariance is not positive definite.
  void finalize();

  /// log(w_k) + log N(z | mean_k, cov_k); -inf for a zero-weight component.
  double component_log_density(int k, const Eigen::Vector3d& z) const;
  /// log sum_k w_k N(z | mean_k, cov_k).
  double log_likelihood(const Eigen::Vector3d& z) const;
  /// Index maximising component_log_density; ties go to the lowest index.
  int most_likely_component(const Eigen::Vector3d& z) const;

 private:
  std::vector<double> weights_;
  std::vector<Eigen::Vector3d> means_;
  std::vector<Eigen::Matrix3d> covs_;
  std::vector<Eigen::Matrix3d> inverses_;
  std::vector<double> log_norms_;  // log w - 0.5 log det - 1.5 log(2 pi)
};

struct GrabCutOptions {
  int components = 5;
  double gamma = 50.0;
  int kmeans_iterations = 10;
  int max_iters = 5;
  double rel_tol = 1e-3;
};

/// Evolving GrabCut state. `image` is non-owning and must outlive the state.
struct SegState {
  const Image* image = nullptr;
  Box box;
  std::vector<Trimap> trimap;    // row-major
  std::vector<int> component;    // GMM component per pixel, within its side's model
  GaussianMixture fg_gmm;
  GaussianMixture bg_gmm;
  double beta = 0.0;
  double gamma = 50.0;

  int width() const noexcept { return image->width(); }
  int height() const noexcept { return image->height(); }
  Eigen::Vector3d color(std::size_t pixel) const;
};

/// Terminal and 8-neighbour capacities for one graph cut. Node p is pixel p;
/// ending on the source side means foreground.
struct PixelGraph {
  struct Edge {
    int u;
    int v;
    double cap;  // same in both directions
  };

  int width = 0;
  int height = 0;
  std::vector<double> source_cap;  // paid when the pixel ends up background
  std::vector<double> sink_cap;    // paid when the pixel ends up foreground
  std::vector<Edge> edges;
  double big = 0.0;          // hard-constraint capacity
  double data_offset = 0.0;  // added to both data terms of every probable pixel
};

struct CutResult {
  double flow = 0.0;
  std::vector<std::uint8_t> foreground;  // 1 = source side
};

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct GrabCutResult {
  Mask mask;                     // largest 4-connected foreground component
  std::vector<Point> contour;    // outer boundary, clockwise from the first raster pixel
  std::vector<double> energies;  // energy before the first cut, then after every cut
  int cuts = 0;
};

/// Box inside = ProbableForeground, outside = SureBackground; GMMs from
/// k-means. Throws Error{InvalidBox, BoxTooSmall, DegenerateColors}.
SegState seg_init(const Image& image, const Box& box, const GrabCutOptions& options = {});

/// Assigns each pixel the most likely component of its current side's GMM.
void assign_components(SegState& state);

/// Re-estimates both GMMs from the component assignments. Empty components are
/// re-seeded at the pixel least explained by the remaining components.
void learn_gmm(SegState& state);

PixelGraph build_graph(const SegState& state);

/// Exact minimum s/t cut.
CutResult min_cut(const PixelGraph& graph);

/// Data terms of the current labels plus smoothness across label changes.
double seg_energy(const SegState& state);

/// Iterates assign -> learn -> build -> cut. Throws Error{EmptyForeground}
/// plus everything seg_init throws.
GrabCutResult grabcut_run(const Image& image, const Box& box, const GrabCutOptions& options = {});

/// Largest 4-connected component; ties go to the one met first in raster order.
Mask largest_component(const Mask& mask);

/// Moore-neighbour tracing of the outer boundary of the component containing
/// the first foreground pixel in raster order.
std::vector<Point> trace_contour(const Mask& mask);

// Low-level pieces shared by the graph, the energy and the tests.

/// Per-pixel cost of the foreground label and of the background label under
/// the current models (raw negative log-likelihoods; Sure pixels get 0 / big).
struct DataTerms {
  std::vector<double> cost_fg;
  std::vector<double> cost_bg;
  double big = 0.0;
};
DataTerms data_terms(const SegState& state);

/// 1 / (2 * mean squared colour difference over 8-neighbour pairs); 0 for a
/// uniform image.
double compute_beta(const Image& image);

/// gamma * exp(-beta * |z_p - z_q|^2) / dist(p, q) for every unordered
/// 8-neighbour pair, in raster order.
std::vector<PixelGraph::Edge> smoothness_edges(const SegState& state);

}  // namespace foodcal
