#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "smartinspect/embedding.hpp"

namespace smartinspect {

/// Input handling for an external network, read from the JSON sidecar
/// `<model>.json` next to the model file:
///
///   {"dim": 512, "input_size": 224, "channels": 3,
///    "mean": [0.485, 0.456, 0.406], "std": [0.229, 0.224, 0.225],
///    "output": ""}
///
/// Each input channel is (pixel / 255 - mean[c]) / std[c]; the grayscale
/// crop is replicated across channels. An empty "output" takes the
/// network's final output, which should be the global-pooled activations.
struct ModelSidecar {
  std::size_t dim = kDefaultFeatureDim;
  int input_size = 224;
  int channels = 3;
  std::vector<double> mean{0.485, 0.456, 0.406};
  std::vector<double> stddev{0.229, 0.224, 0.225};
  std::string output;

  static ModelSidecar load(const std::filesystem::path& path);
};

/// ONNX network behind the EmbeddingProvider contract (OpenCV dnn runtime).
/// Not safe for concurrent calls; embed_all serializes them.
class ModelEmbedder final : public EmbeddingProvider {
 public:
  /// Throws IoError if the model or sidecar cannot be loaded.
  ModelEmbedder(const std::filesystem::path& model_path, ModelSidecar sidecar);
  explicit ModelEmbedder(const std::filesystem::path& model_path);
  ~ModelEmbedder() override;

  std::size_t dim() const override { return sidecar_.dim; }
  std::string id() const override { return id_; }
  bool concurrent_safe() const override { return false; }
  /// Throws ContractViolation if the network output length differs from dim().
  FeatureVector embed(const GrayImage& crop) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ModelSidecar sidecar_;
  std::string id_;
};

}  // namespace smartinspect
