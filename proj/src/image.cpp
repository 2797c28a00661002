#include "foodcal/image.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "foodcal/error.hpp"

namespace foodcal {

namespace {

std::vector<char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_jpeg(const std::vector<char>& bytes) {
  return bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
         static_cast<unsigned char>(bytes[1]) == 0xD8 && static_cast<unsigned char>(bytes[2]) == 0xFF;
}

// libjpeg only warns on a missing end-of-image marker and hands back a
// partially grey image, so truncation has to be caught before decoding.
bool jpeg_has_eoi(const std::vector<char>& bytes) {
  std::size_t end = bytes.size();
  while (end > 0 && (bytes[end - 1] == 0 || bytes[end - 1] == '\n' || bytes[end - 1] == '\r')) --end;
  return end >= 2 && static_cast<unsigned char>(bytes[end - 2]) == 0xFF &&
         static_cast<unsigned char>(bytes[end - 1]) == 0xD9;
}

}  // namespace

double box_iou(const Box& a, const Box& b) noexcept {
  const int ix0 = std::max(a.xmin, b.xmin);
  const int iy0 = std::max(a.ymin, b.ymin);
  const int ix1 = std::min(a.xmax, b.xmax);
  const int iy1 = std::min(a.ymax, b.ymax);
  if (ix1 < ix0 || iy1 < iy0) return 0.0;
  const double inter = static_cast<double>(ix1 - ix0 + 1) * (iy1 - iy0 + 1);
  return inter / (static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter);
}

Image::Image(int width, int height, Rgb fill)
    : width_(width), height_(height), pixels_(static_cast<std::size_t>(width) * height * 3) {
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t v) { return v != 0; }));
}

Image load_image(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorKind::MissingFile, "image not found: " + path.string());
  }
  std::vector<char> bytes = read_bytes(path);
  if (is_jpeg(bytes) && !jpeg_has_eoi(bytes)) {
    throw Error(ErrorKind::DecodeError, "truncated JPEG: " + path.string());
  }
  cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, bytes.data());
  cv::Mat bgr;
  try {
    bgr = cv::imdecode(raw, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw Error(ErrorKind::DecodeError, "cannot decode " + path.string() + ": " + e.what());
  }
  if (bgr.empty()) throw Error(ErrorKind::DecodeError, "cannot decode " + path.string());
  if (bgr.cols < kMinImageSide || bgr.rows < kMinImageSide) {
    throw Error(ErrorKind::TooSmall, path.string() + " is " + std::to_string(bgr.cols) + "x" +
                                         std::to_string(bgr.rows) + ", minimum is " +
                                         std::to_string(kMinImageSide) + "x" + std::to_string(kMinImageSide));
  }
  Image image(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) image.set(x, y, {row[x][2], row[x][1], row[x][0]});
  }
  return image;
}

void save_png(const std::filesystem::path& path, const Image& image) {
  cv::Mat bgr(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      const Rgb c = image.at(x, y);
      row[x] = cv::Vec3b(c.b, c.g, c.r);
    }
  }
  if (!cv::imwrite(path.string(), bgr)) {
    throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  }
}

void save_mask_png(const std::filesystem::path& path, const Mask& mask) {
  cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = mask.at(x, y) ? 255 : 0;
  }
  if (!cv::imwrite(path.string(), gray)) {
    throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  }
}

}  // namespace foodcal
