#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "smartinspect/embedding.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "si") {
    std::random_device rd;
    path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Baseline descriptor that counts its calls.
class CountingEmbedder final : public smartinspect::EmbeddingProvider {
 public:
  std::size_t dim() const override { return smartinspect::kDefaultFeatureDim; }
  std::string id() const override { return "counting-baseline"; }
  bool concurrent_safe() const override { return true; }
  smartinspect::FeatureVector embed(const smartinspect::GrayImage& crop) const override {
    ++calls;
    return smartinspect::baseline_embed(crop);
  }
  mutable std::atomic<int> calls{0};
};

}  // namespace testing
