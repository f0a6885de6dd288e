// Dense, single-threaded versions of the stage I kernels.

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#include "smartinspect/imaging.hpp"

namespace smartinspect::serial {

GrayImage sobel_magnitude(const GrayImage& img, int kernel_size) {
  const SobelKernel k = sobel_kernel(kernel_size);
  if (img.empty()) throw std::invalid_argument("sobel_magnitude: empty image");
  const int w = img.width();
  const int h = img.height();
  const int r = kernel_size / 2;
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      long gx = 0;
      long gy = 0;
      for (int i = 0; i < kernel_size; ++i) {
        const int yy = std::clamp(y + i - r, 0, h - 1);
        for (int j = 0; j < kernel_size; ++j) {
          const int xx = std::clamp(x + j - r, 0, w - 1);
          const long v = img.at(xx, yy);
          gx += static_cast<long>(k.smooth[i]) * k.deriv[j] * v;
          gy += static_cast<long>(k.deriv[i]) * k.smooth[j] * v;
        }
      }
      out.at(x, y) = static_cast<std::uint8_t>(std::min<long>(std::labs(gx) + std::labs(gy), 255));
    }
  }
  return out;
}

BinaryImage threshold_binary(const GrayImage& img, std::uint8_t t) {
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) out.set(x, y, img.at(x, y) > t);
  }
  return out;
}

BinaryImage dilate(const BinaryImage& mask, int kw, int kh) {
  if (kw < 1 || kh < 1 || kw % 2 == 0 || kh % 2 == 0) {
    throw std::invalid_argument("dilate: kernel dimensions must be odd and >= 1");
  }
  const int w = mask.width();
  const int h = mask.height();
  const int rx = kw / 2;
  const int ry = kh / 2;
  BinaryImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool hit = false;
      for (int dy = -ry; dy <= ry && !hit; ++dy) {
        for (int dx = -rx; dx <= rx && !hit; ++dx) {
          const int xx = x + dx;
          const int yy = y + dy;
          hit = xx >= 0 && xx < w && yy >= 0 && yy < h && mask.at(xx, yy);
        }
      }
      out.set(x, y, hit);
    }
  }
  return out;
}

}  // namespace smartinspect::serial
