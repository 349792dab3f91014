#pragma once

#include "robustcf/classifier.hpp"
#include "robustcf/dataset.hpp"
#include "robustcf/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace robustcf {

struct MlpLayer {
  Eigen::MatrixXd weights;  // rows = outputs, cols = inputs
  Eigen::VectorXd bias;
};

// Feed-forward net k -> 20 -> 10 -> 2 with rectifier hidden activations and
// two output logits; the predicted label is the argmax, ties go to label 0.
class MlpClassifier final : public Classifier {
 public:
  explicit MlpClassifier(std::vector<MlpLayer> layers);

  Label classify(const Vector& x) const override;
  Eigen::Index dimension() const override;

  Eigen::VectorXd logits(const Vector& x) const;
  const std::vector<MlpLayer>& layers() const { return layers_; }

  // JSON weights file; writing then reading yields bit-identical weights.
  void save(const std::filesystem::path& path) const;
  static MlpClassifier load(const std::filesystem::path& path);

 private:
  std::vector<MlpLayer> layers_;
};

struct TrainOptions {
  std::uint64_t seed = 0;
  int epochs = 100;
  int batch_size = 8;
  double learning_rate = 0.01;
  std::vector<int> hidden = {20, 10};
};

struct TrainResult {
  MlpClassifier model;
  double train_accuracy;
};

// Deterministic mini-batch gradient descent on softmax cross-entropy.
// Requires both classes in the training data.
TrainResult train_mlp(const Dataset& dataset, const TrainOptions& options = {});

}  // namespace robustcf
