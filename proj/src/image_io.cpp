#include "smartinspect/image_io.hpp"

#include <png.h>

#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <string>

#include "smartinspect/errors.hpp"

namespace smartinspect {

RgbImage::RgbImage(const GrayImage& gray) : width(gray.width()), height(gray.height()) {
  data.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < gray.data().size(); ++i) {
    data[3 * i] = data[3 * i + 1] = data[3 * i + 2] = gray.data()[i];
  }
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  // integer form of 0.299/0.587/0.114 with +0.5 for half-up rounding
  return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

GrayImage read_png(const std::filesystem::path& path, bool luma_convert) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read PNG '" + path.string() + "': " + image.message);
  }
  const bool multi_channel = (image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA)) != 0;
  if (multi_channel && !luma_convert) {
    png_image_free(&image);
    throw IoError("'" + path.string() + "' is not single-channel grayscale (pass --luma to convert)");
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  if (!multi_channel) {
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
      throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
    }
    return GrayImage(w, h, std::move(buf));
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = luma(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
  return GrayImage(w, h, std::move(gray));
}

namespace {

// Skips whitespace and '#' comments between PGM header tokens.
int read_pgm_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.peek();
  while (c != EOF) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
    c = in.peek();
  }
  int value = -1;
  if (!(in >> value) || value < 0) throw IoError("malformed PGM header in '" + path.string() + "'");
  return value;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::array<char, 2> magic{};
  in.read(magic.data(), 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw IoError("'" + path.string() + "' is not a binary PGM (P5)");
  const int w = read_pgm_int(in, path);
  const int h = read_pgm_int(in, path);
  const int maxval = read_pgm_int(in, path);
  if (w < 1 || h < 1) throw IoError("PGM '" + path.string() + "' has empty dimensions");
  if (maxval < 1 || maxval > 255) throw IoError("PGM '" + path.string() + "' must be 8-bit (maxval <= 255)");
  in.get();  // single whitespace before the raster
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size())) {
    throw IoError("PGM '" + path.string() + "' is truncated");
  }
  return GrayImage(w, h, std::move(data));
}

GrayImage read_image(const std::filesystem::path& path, bool luma_convert) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::array<unsigned char, 8> sig{};
  in.read(reinterpret_cast<char*>(sig.data()), sig.size());
  if (in.gcount() >= 2 && sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
  if (in.gcount() == 8 && png_sig_cmp(sig.data(), 0, 8) == 0) return read_png(path, luma_convert);
  throw IoError("'" + path.string() + "' is neither PNG nor binary PGM");
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.data().data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()), static_cast<std::streamsize>(img.data().size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace smartinspect
