#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace foodcal {

/// Axis-aligned rectangle with inclusive pixel bounds, origin top-left.
struct Box {
  int xmin = 0;
  int ymin = 0;
  int xmax = 0;
  int ymax = 0;

  int width() const noexcept { return xmax - xmin + 1; }
  int height() const noexcept { return ymax - ymin + 1; }
  int min_side() const noexcept { return width() < height() ? width() : height(); }
  long area() const noexcept { return static_cast<long>(width()) * height(); }
  bool contains(int x, int y) const noexcept {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }
  bool valid() const noexcept { return xmin < xmax && ymin < ymax; }
  bool within(int image_width, int image_height) const noexcept {
    return xmin >= 0 && ymin >= 0 && xmax < image_width && ymax < image_height;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Intersection over union of two boxes (inclusive pixel areas).
double box_iou(const Box& a, const Box& b) noexcept;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr int kMinImageSide = 32;

/// Row-major 8-bit RGB image.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  Rgb at(int x, int y) const noexcept {
    const std::uint8_t* p = &pixels_[index(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    std::uint8_t* p = &pixels_[index(x, y)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  std::span<const std::uint8_t> data() const noexcept { return pixels_; }
  std::span<std::uint8_t> data() noexcept { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Binary image; nonzero means foreground.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height) : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int x, int y) const noexcept { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool on = true) noexcept {
    bits_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0;
  }
  std::size_t count() const noexcept;

  std::span<const std::uint8_t> data() const noexcept { return bits_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Decode a PNG or JPEG file. EXIF orientation is applied.
/// Throws Error{MissingFile, DecodeError, TooSmall}.
Image load_image(const std::filesystem::path& path);

void save_png(const std::filesystem::path& path, const Image& image);

/// Single-channel PNG, 255 = foreground.
void save_mask_png(const std::filesystem::path& path, const Mask& mask);

}  // namespace foodcal
