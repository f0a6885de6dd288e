#include "smartinspect/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "smartinspect/errors.hpp"
#include "smartinspect/hash.hpp"
#include "smartinspect/proposals.hpp"

namespace smartinspect {

namespace {

constexpr int kGrid = 16;
constexpr int kCell = kCropSize / kGrid;  // 14

static_assert(std::endian::native == std::endian::little, "vec records assume a little-endian host");

}  // namespace

FeatureVector baseline_embed(const GrayImage& crop) {
  if (crop.width() != kCropSize || crop.height() != kCropSize) {
    throw std::invalid_argument("baseline_embed: crop must be 224x224, got " + std::to_string(crop.width()) + "x" +
                                std::to_string(crop.height()));
  }
  const GrayImage grad = sobel_magnitude(crop, 3);
  FeatureVector v(2 * kGrid * kGrid, 0.0);
  constexpr double kScale = 1.0 / (255.0 * kCell * kCell);
  for (int gy = 0; gy < kGrid; ++gy) {
    for (int gx = 0; gx < kGrid; ++gx) {
      long intensity = 0;
      long gradient = 0;
      for (int y = gy * kCell; y < (gy + 1) * kCell; ++y) {
        auto irow = crop.row(y);
        auto grow = grad.row(y);
        for (int x = gx * kCell; x < (gx + 1) * kCell; ++x) {
          intensity += irow[x];
          gradient += grow[x];
        }
      }
      v[gy * kGrid + gx] = intensity * kScale;
      v[kGrid * kGrid + gy * kGrid + gx] = gradient * kScale;
    }
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::string embedding_cache_key(const EmbeddingProvider& provider, const GrayImage& crop) {
  Sha256 h;
  h.update(provider.id());
  h.update(std::string_view("\0", 1));
  const std::string dims = std::to_string(crop.width()) + "x" + std::to_string(crop.height());
  h.update(dims);
  h.update(std::span<const std::uint8_t>(crop.data()));
  return h.hex();
}

void write_vec_record(const std::filesystem::path& path, const FeatureVector& v) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    const auto dim = static_cast<std::uint32_t>(v.size());
    out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::optional<FeatureVector> read_vec_record(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::uint32_t dim = 0;
  in.read(reinterpret_cast<char*>(&dim), sizeof dim);
  if (in.gcount() != sizeof dim || dim == 0 || dim > (1u << 24)) return std::nullopt;
  FeatureVector v(dim);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(dim * sizeof(double))) return std::nullopt;
  if (in.peek() != std::char_traits<char>::eof()) return std::nullopt;
  for (double x : v) {
    if (!std::isfinite(x)) return std::nullopt;
  }
  return v;
}

namespace {

FeatureVector checked_embed(const EmbeddingProvider& provider, const GrayImage& crop) {
  FeatureVector v = provider.embed(crop);
  if (v.size() != provider.dim()) {
    throw ContractViolation("embedding provider '" + provider.id() + "' returned " + std::to_string(v.size()) +
                            " values, declared dim is " + std::to_string(provider.dim()));
  }
  return v;
}

}  // namespace

std::vector<FeatureVector> embed_all(std::span<const GrayImage> crops, const EmbeddingProvider& provider,
                                     const std::optional<std::filesystem::path>& cache_dir) {
  std::vector<FeatureVector> out(crops.size());
  std::vector<std::string> keys(crops.size());
  std::vector<std::size_t> missing;

  if (cache_dir) {
    std::filesystem::create_directories(*cache_dir);
    for (std::size_t i = 0; i < crops.size(); ++i) {
      keys[i] = embedding_cache_key(provider, crops[i]);
      const auto path = *cache_dir / (keys[i] + ".vec");
      if (!std::filesystem::exists(path)) {
        missing.push_back(i);
        continue;
      }
      auto cached = read_vec_record(path);
      if (!cached || cached->size() != provider.dim()) {
        std::cerr << "warning: ignoring corrupt embedding cache record " << path << "; rebuilding\n";
        missing.push_back(i);
        continue;
      }
      out[i] = std::move(*cached);
    }
  } else {
    missing.resize(crops.size());
    for (std::size_t i = 0; i < crops.size(); ++i) missing[i] = i;
  }

  const auto n = static_cast<std::ptrdiff_t>(missing.size());
  if (provider.concurrent_safe()) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t m = 0; m < n; ++m) {
      try {
        out[missing[m]] = checked_embed(provider, crops[missing[m]]);
      } catch (...) {
#pragma omp critical(smartinspect_embed_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (std::ptrdiff_t m = 0; m < n; ++m) out[missing[m]] = checked_embed(provider, crops[missing[m]]);
  }

  if (cache_dir) {
    for (std::size_t i : missing) write_vec_record(*cache_dir / (keys[i] + ".vec"), out[i]);
  }
  return out;
}

namespace serial {

std::vector<FeatureVector> embed_all(std::span<const GrayImage> crops, const EmbeddingProvider& provider) {
  std::vector<FeatureVector> out;
  out.reserve(crops.size());
  for (const GrayImage& c : crops) out.push_back(checked_embed(provider, c));
  return out;
}

}  // namespace serial

}  // namespace smartinspect
