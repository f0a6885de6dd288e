#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace smartinspect {

/// Axis-aligned integer box: columns [x0, x0 + w), rows [y0, y0 + h).
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  int x1() const { return x0 + w; }
  int y1() const { return y0 + h; }
  std::int64_t area() const { return static_cast<std::int64_t>(w) * h; }
  bool contains(int x, int y) const { return x >= x0 && x < x1() && y >= y0 && y < y1(); }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point& a, const Point& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

/// Single-channel 8-bit raster, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return data_[index(x, y)]; }

  std::span<const std::uint8_t> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<std::uint8_t> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Boolean mask, row-major; one byte per pixel (0 or 1).
class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }

  bool at(int x, int y) const { return data_[index(x, y)] != 0; }
  void set(int x, int y, bool v) { data_[index(x, y)] = v ? 1 : 0; }

  std::span<const std::uint8_t> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<std::uint8_t> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  std::size_t count() const;

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// One 8-connected component of a mask. Pixels are in raster order.
struct PixelRegion {
  std::vector<Point> pixels;
  BBox bbox;

  std::int64_t area() const { return static_cast<std::int64_t>(pixels.size()); }
};

/// Separable Sobel coefficient pair for kernel size 3, 5 or 7: `smooth` is
/// the binomial smoothing row, `deriv` the matching derivative row.
struct SobelKernel {
  std::vector<int> smooth;
  std::vector<int> deriv;
};

SobelKernel sobel_kernel(int kernel_size);

/// |Gx| + |Gy| of the unnormalized Sobel operator, clamped to [0, 255].
/// Borders replicate the edge pixel. Throws std::invalid_argument for a
/// kernel size other than 3, 5 or 7.
GrayImage sobel_magnitude(const GrayImage& img, int kernel_size);

/// Pixel is set iff value > t.
BinaryImage threshold_binary(const GrayImage& img, std::uint8_t t);

/// Binary dilation with a kw x kh rectangular window; pixels outside the
/// image count as unset. Both dimensions must be odd and >= 1.
BinaryImage dilate(const BinaryImage& mask, int kw, int kh);

/// 8-connected components sorted by area descending, then bbox (y0, x0),
/// then first pixel in raster order.
std::vector<PixelRegion> connected_regions(const BinaryImage& mask);

namespace serial {

// Single-threaded direct implementations of the parallel kernels above.
// They define the expected output of the OpenMP versions and serve as the
// baseline in bench/.
GrayImage sobel_magnitude(const GrayImage& img, int kernel_size);
BinaryImage threshold_binary(const GrayImage& img, std::uint8_t t);
BinaryImage dilate(const BinaryImage& mask, int kw, int kh);

}  // namespace serial

}  // namespace smartinspect
