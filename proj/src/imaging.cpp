#include "smartinspect/imaging.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace smartinspect {

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("GrayImage: dimensions must be positive, got " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("GrayImage: dimensions must be positive, got " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("GrayImage: data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(width) + "x" + std::to_string(height));
  }
}

BinaryImage::BinaryImage(int width, int height, bool fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("BinaryImage: dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill ? 1 : 0);
}

std::size_t BinaryImage::count() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

SobelKernel sobel_kernel(int kernel_size) {
  switch (kernel_size) {
    case 3:
      return {{1, 2, 1}, {-1, 0, 1}};
    case 5:
      return {{1, 4, 6, 4, 1}, {-1, -2, 0, 2, 1}};
    case 7:
      return {{1, 6, 15, 20, 15, 6, 1}, {-1, -4, -5, 0, 5, 4, 1}};
    default:
      throw std::invalid_argument("sobel_magnitude: unsupported kernel size " + std::to_string(kernel_size) +
                                  " (expected 3, 5 or 7)");
  }
}

GrayImage sobel_magnitude(const GrayImage& img, int kernel_size) {
  const SobelKernel k = sobel_kernel(kernel_size);
  if (img.empty()) throw std::invalid_argument("sobel_magnitude: empty image");
  const int w = img.width();
  const int h = img.height();
  const int r = kernel_size / 2;
  GrayImage out(w, h);

#pragma omp parallel
  {
    // vertical pass results for one output row
    std::vector<int> vsmooth(static_cast<std::size_t>(w));
    std::vector<int> vderiv(static_cast<std::size_t>(w));
    std::vector<const std::uint8_t*> rows(static_cast<std::size_t>(kernel_size));

#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int i = 0; i < kernel_size; ++i) {
        rows[i] = img.row(std::clamp(y + i - r, 0, h - 1)).data();
      }
      for (int x = 0; x < w; ++x) {
        int s = 0;
        int d = 0;
        for (int i = 0; i < kernel_size; ++i) {
          const int v = rows[i][x];
          s += k.smooth[i] * v;
          d += k.deriv[i] * v;
        }
        vsmooth[x] = s;
        vderiv[x] = d;
      }
      auto dst = out.row(y);
      for (int x = 0; x < w; ++x) {
        int gx = 0;
        int gy = 0;
        for (int j = 0; j < kernel_size; ++j) {
          const int xx = std::clamp(x + j - r, 0, w - 1);
          gx += k.deriv[j] * vsmooth[xx];
          gy += k.smooth[j] * vderiv[xx];
        }
        dst[x] = static_cast<std::uint8_t>(std::min(std::abs(gx) + std::abs(gy), 255));
      }
    }
  }
  return out;
}

BinaryImage threshold_binary(const GrayImage& img, std::uint8_t t) {
  BinaryImage out(img.width(), img.height());
  const int h = img.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    auto src = img.row(y);
    auto dst = out.row(y);
    for (std::size_t x = 0; x < src.size(); ++x) dst[x] = src[x] > t ? 1 : 0;
  }
  return out;
}

BinaryImage dilate(const BinaryImage& mask, int kw, int kh) {
  if (kw < 1 || kh < 1 || kw % 2 == 0 || kh % 2 == 0) {
    throw std::invalid_argument("dilate: kernel dimensions must be odd and >= 1, got (" + std::to_string(kw) +
                                "," + std::to_string(kh) + ")");
  }
  const int w = mask.width();
  const int h = mask.height();
  const int rx = kw / 2;
  const int ry = kh / 2;

  BinaryImage horiz(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    auto src = mask.row(y);
    auto dst = horiz.row(y);
    for (int x = 0; x < w; ++x) {
      if (!src[x]) continue;
      const int lo = std::max(0, x - rx);
      const int hi = std::min(w - 1, x + rx);
      for (int xx = lo; xx <= hi; ++xx) dst[xx] = 1;
    }
  }

  BinaryImage out(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    const int lo = std::max(0, y - ry);
    const int hi = std::min(h - 1, y + ry);
    for (int yy = lo; yy <= hi; ++yy) {
      auto src = horiz.row(yy);
      for (int x = 0; x < w; ++x) dst[x] |= src[x];
    }
  }
  return out;
}

namespace {

struct DisjointSet {
  std::vector<std::uint32_t> parent;

  std::uint32_t make() {
    parent.push_back(static_cast<std::uint32_t>(parent.size()));
    return parent.back();
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
};

}  // namespace

std::vector<PixelRegion> connected_regions(const BinaryImage& mask) {
  constexpr std::uint32_t kNone = UINT32_MAX;
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), kNone);
  DisjointSet sets;

  auto label_at = [&](int x, int y) -> std::uint32_t {
    if (x < 0 || x >= w || y < 0) return kNone;
    return labels[static_cast<std::size_t>(y) * w + x];
  };

  // first pass: provisional labels from the already-visited half of the 8-neighbourhood
  for (int y = 0; y < h; ++y) {
    auto row = mask.row(y);
    for (int x = 0; x < w; ++x) {
      if (!row[x]) continue;
      const std::uint32_t neighbours[4] = {label_at(x - 1, y), label_at(x - 1, y - 1), label_at(x, y - 1),
                                           label_at(x + 1, y - 1)};
      std::uint32_t current = kNone;
      for (std::uint32_t n : neighbours) {
        if (n == kNone) continue;
        if (current == kNone) {
          current = n;
        } else {
          sets.unite(current, n);
        }
      }
      if (current == kNone) current = sets.make();
      labels[static_cast<std::size_t>(y) * w + x] = current;
    }
  }

  std::vector<std::uint32_t> component_of(sets.parent.size(), kNone);
  std::vector<PixelRegion> regions;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint32_t l = labels[static_cast<std::size_t>(y) * w + x];
      if (l == kNone) continue;
      const std::uint32_t root = sets.find(l);
      if (component_of[root] == kNone) {
        component_of[root] = static_cast<std::uint32_t>(regions.size());
        regions.emplace_back();
      }
      regions[component_of[root]].pixels.push_back({x, y});
    }
  }

  for (auto& region : regions) {
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (const Point& p : region.pixels) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
    region.bbox = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
  }

  std::stable_sort(regions.begin(), regions.end(), [](const PixelRegion& a, const PixelRegion& b) {
    if (a.area() != b.area()) return a.area() > b.area();
    if (a.bbox.y0 != b.bbox.y0) return a.bbox.y0 < b.bbox.y0;
    if (a.bbox.x0 != b.bbox.x0) return a.bbox.x0 < b.bbox.x0;
    return a.pixels.front() < b.pixels.front();
  });
  return regions;
}

}  // namespace smartinspect
