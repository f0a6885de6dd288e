#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smartinspect/imaging.hpp"

namespace smartinspect {

using FeatureVector = std::vector<double>;

inline constexpr std::size_t kDefaultFeatureDim = 512;

/// Maps a kCropSize x kCropSize crop to a fixed-length feature vector.
///
/// Implementations must be deterministic and keep dim() constant. Providers
/// that return false from concurrent_safe() are never called from more than
/// one thread at a time.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dim() const = 0;
  /// Stable identifier; part of the embedding cache key.
  virtual std::string id() const = 0;
  virtual bool concurrent_safe() const = 0;
  virtual FeatureVector embed(const GrayImage& crop) const = 0;
};

/// Hand-crafted descriptor: 16x16 grid of cell mean intensities followed by
/// a 16x16 grid of cell mean Sobel-3 magnitudes (both scaled to [0,1] over
/// 14x14 cells), L2-normalized. The zero vector passes through unchanged.
FeatureVector baseline_embed(const GrayImage& crop);

class BaselineEmbedder final : public EmbeddingProvider {
 public:
  std::size_t dim() const override { return kDefaultFeatureDim; }
  std::string id() const override { return "baseline-grid16-v1"; }
  bool concurrent_safe() const override { return true; }
  FeatureVector embed(const GrayImage& crop) const override { return baseline_embed(crop); }
};

/// Embeds every crop, in input order. With a cache directory, vectors are
/// stored as `<hash>.vec` (little-endian uint32 dim, then dim float64)
/// keyed by sha256(provider id, crop bytes); unreadable records are
/// reported on stderr and rebuilt.
std::vector<FeatureVector> embed_all(std::span<const GrayImage> crops, const EmbeddingProvider& provider,
                                     const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

/// Cache key for one crop.
std::string embedding_cache_key(const EmbeddingProvider& provider, const GrayImage& crop);

void write_vec_record(const std::filesystem::path& path, const FeatureVector& v);
/// Returns nullopt when the record is missing, truncated, has trailing
/// bytes, or holds non-finite values.
std::optional<FeatureVector> read_vec_record(const std::filesystem::path& path);

namespace serial {
/// Sequential embedding without cache; reference ordering for embed_all.
std::vector<FeatureVector> embed_all(std::span<const GrayImage> crops, const EmbeddingProvider& provider);
}  // namespace serial

}  // namespace smartinspect
