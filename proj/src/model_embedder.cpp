#include "smartinspect/model_embedder.hpp"

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

#include <fstream>
#include <mutex>
#include "json.hpp"

#include "smartinspect/errors.hpp"
#include "smartinspect/hash.hpp"

namespace smartinspect {

ModelSidecar ModelSidecar::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model sidecar '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("model sidecar '" + path.string() + "': " + e.what());
  }
  ModelSidecar s;
  try {
    s.dim = j.value("dim", s.dim);
    s.input_size = j.value("input_size", s.input_size);
    s.channels = j.value("channels", s.channels);
    s.mean = j.value("mean", s.mean);
    s.stddev = j.value("std", s.stddev);
    s.output = j.value("output", s.output);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("model sidecar '" + path.string() + "': " + e.what());
  }
  if (s.dim == 0 || s.input_size < 1 || s.channels < 1 || s.mean.size() != static_cast<std::size_t>(s.channels) ||
      s.stddev.size() != static_cast<std::size_t>(s.channels)) {
    throw IoError("model sidecar '" + path.string() + "': inconsistent dim/channels/mean/std");
  }
  for (double sd : s.stddev) {
    if (sd == 0.0) throw IoError("model sidecar '" + path.string() + "': std must be non-zero");
  }
  return s;
}

struct ModelEmbedder::Impl {
  cv::dnn::Net net;
  std::mutex mutex;
};

ModelEmbedder::ModelEmbedder(const std::filesystem::path& model_path, ModelSidecar sidecar)
    : impl_(std::make_unique<Impl>()), sidecar_(std::move(sidecar)) {
  if (!std::filesystem::exists(model_path)) throw IoError("model file '" + model_path.string() + "' not found");
  try {
    impl_->net = cv::dnn::readNetFromONNX(model_path.string());
  } catch (const cv::Exception& e) {
    throw IoError("cannot load model '" + model_path.string() + "': " + e.what());
  }
  if (impl_->net.empty()) throw IoError("cannot load model '" + model_path.string() + "'");
  impl_->net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
  impl_->net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
  id_ = "onnx:" + sha256_file(model_path) + ":" + std::to_string(sidecar_.dim);
}

ModelEmbedder::ModelEmbedder(const std::filesystem::path& model_path)
    : ModelEmbedder(model_path, ModelSidecar::load(std::filesystem::path(model_path).replace_extension(".json"))) {}

ModelEmbedder::~ModelEmbedder() = default;

FeatureVector ModelEmbedder::embed(const GrayImage& crop) const {
  const int size = sidecar_.input_size;
  const int channels = sidecar_.channels;
  const int shape[4] = {1, channels, size, size};
  cv::Mat blob(4, shape, CV_32F);
  float* dst = blob.ptr<float>();
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < size; ++y) {
      // nearest-neighbour in case the network input differs from the crop size
      const int sy = y * crop.height() / size;
      for (int x = 0; x < size; ++x) {
        const int sx = x * crop.width() / size;
        const double v = crop.at(sx, sy) / 255.0;
        *dst++ = static_cast<float>((v - sidecar_.mean[c]) / sidecar_.stddev[c]);
      }
    }
  }

  cv::Mat out;
  {
    std::lock_guard lock(impl_->mutex);
    try {
      impl_->net.setInput(blob);
      out = sidecar_.output.empty() ? impl_->net.forward() : impl_->net.forward(sidecar_.output);
    } catch (const cv::Exception& e) {
      throw ContractViolation(std::string("model forward pass failed: ") + e.what());
    }
  }
  if (out.total() != sidecar_.dim) {
    throw ContractViolation("model emits " + std::to_string(out.total()) + " values but dim is declared as " +
                            std::to_string(sidecar_.dim));
  }
  cv::Mat flat = out.reshape(1, 1);
  flat.convertTo(flat, CV_64F);
  return FeatureVector(flat.ptr<double>(), flat.ptr<double>() + flat.total());
}

}  // namespace smartinspect
