#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "smartinspect/imaging.hpp"

namespace smartinspect {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // interleaved RGB, row-major

  RgbImage() = default;
  explicit RgbImage(const GrayImage& gray);

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
  }
};

/// Luminance 0.299 R + 0.587 G + 0.114 B, rounded half-up.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Reads an 8-bit PNG or binary PGM (P5), chosen by file signature.
/// Multi-channel input is rejected with IoError unless `luma_convert` is set.
GrayImage read_image(const std::filesystem::path& path, bool luma_convert = false);

GrayImage read_png(const std::filesystem::path& path, bool luma_convert = false);
GrayImage read_pgm(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png(const std::filesystem::path& path, const RgbImage& img);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

}  // namespace smartinspect
