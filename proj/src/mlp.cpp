#include "robustcf/mlp.hpp"

#include "robustcf/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace robustcf {

using nlohmann::json;

MlpClassifier::MlpClassifier(std::vector<MlpLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) {
    throw std::invalid_argument("MlpClassifier: no layers");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const MlpLayer& layer = layers_[i];
    if (layer.weights.rows() != layer.bias.size()) {
      throw std::invalid_argument("MlpClassifier: bias size mismatch in layer " +
                                  std::to_string(i));
    }
    if (i > 0 && layer.weights.cols() != layers_[i - 1].weights.rows()) {
      throw std::invalid_argument("MlpClassifier: shape chain broken at layer " +
                                  std::to_string(i));
    }
  }
  if (layers_.back().weights.rows() != 2) {
    throw std::invalid_argument("MlpClassifier: output layer must have two logits");
  }
}

Eigen::Index MlpClassifier::dimension() const { return layers_.front().weights.cols(); }

Eigen::VectorXd MlpClassifier::logits(const Vector& x) const {
  check_dimension(x);
  Eigen::VectorXd h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = (layers_[i].weights * h + layers_[i].bias).eval();
    if (i + 1 < layers_.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

Label MlpClassifier::classify(const Vector& x) const {
  const Eigen::VectorXd out = logits(x);
  return out[1] > out[0] ? 1 : 0;  // tie -> label 0
}

void MlpClassifier::save(const std::filesystem::path& path) const {
  json doc;
  doc["schema_version"] = 1;
  doc["label_names"] = {"0", "1"};
  json layer_list = json::array();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const MlpLayer& layer = layers_[i];
    json entry;
    entry["rows"] = layer.weights.rows();
    entry["cols"] = layer.weights.cols();
    std::vector<double> weights(static_cast<std::size_t>(layer.weights.size()));
    // row-major serialization
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        weights[static_cast<std::size_t>(r * layer.weights.cols() + c)] = layer.weights(r, c);
      }
    }
    entry["weights"] = weights;
    entry["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    entry["activation"] = (i + 1 < layers_.size()) ? "relu" : "linear";
    layer_list.push_back(std::move(entry));
  }
  doc["layers"] = std::move(layer_list);

  std::ofstream file(path);
  if (!file) {
    throw std::runtime_error("MlpClassifier::save: cannot open '" + path.string() + "'");
  }
  file << doc.dump(2) << "\n";
}

MlpClassifier MlpClassifier::load(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("MlpClassifier::load: cannot open '" + path.string() + "'");
  }
  json doc = json::parse(file);
  std::vector<MlpLayer> layers;
  for (const json& entry : doc.at("layers")) {
    MlpLayer layer;
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    const auto weights = entry.at("weights").get<std::vector<double>>();
    const auto bias = entry.at("bias").get<std::vector<double>>();
    if (weights.size() != static_cast<std::size_t>(rows * cols) ||
        bias.size() != static_cast<std::size_t>(rows)) {
      throw std::runtime_error("MlpClassifier::load: inconsistent layer shape in '" +
                               path.string() + "'");
    }
    layer.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        layer.weights(r, c) = weights[static_cast<std::size_t>(r * cols + c)];
      }
    }
    layer.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), rows);
    layers.push_back(std::move(layer));
  }
  return MlpClassifier(std::move(layers));
}

namespace {

Eigen::MatrixXd glorot_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      w(r, c) = rng.uniform(-bound, bound);
    }
  }
  return w;
}

}  // namespace

TrainResult train_mlp(const Dataset& dataset, const TrainOptions& options) {
  if (dataset.size() < 2) {
    throw std::invalid_argument("train_mlp: need at least 2 examples");
  }
  const bool has0 = std::find(dataset.labels.begin(), dataset.labels.end(), 0) !=
                    dataset.labels.end();
  const bool has1 = std::find(dataset.labels.begin(), dataset.labels.end(), 1) !=
                    dataset.labels.end();
  if (!has0 || !has1) {
    throw std::invalid_argument("train_mlp: training data contains a single class");
  }
  if (options.epochs < 1 || options.batch_size < 1 || options.learning_rate <= 0.0) {
    throw std::invalid_argument("train_mlp: invalid training options");
  }

  const Eigen::Index k = dataset.dimension();
  Rng rng(derive_seed(options.seed, 0x717a));

  std::vector<Eigen::Index> sizes;
  sizes.push_back(k);
  for (int h : options.hidden) sizes.push_back(h);
  sizes.push_back(2);

  std::vector<MlpLayer> layers(sizes.size() - 1);
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    layers[i].weights = glorot_init(sizes[i + 1], sizes[i], rng);
    layers[i].bias = Eigen::VectorXd::Zero(sizes[i + 1]);
  }

  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  const std::size_t layer_count = layers.size();
  std::vector<Eigen::VectorXd> pre(layer_count);   // pre-activation per layer
  std::vector<Eigen::VectorXd> post(layer_count);  // post-activation per layer

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t stop = std::min(n, start + options.batch_size);
      std::vector<Eigen::MatrixXd> grad_w(layer_count);
      std::vector<Eigen::VectorXd> grad_b(layer_count);
      for (std::size_t i = 0; i < layer_count; ++i) {
        grad_w[i] = Eigen::MatrixXd::Zero(layers[i].weights.rows(), layers[i].weights.cols());
        grad_b[i] = Eigen::VectorXd::Zero(layers[i].bias.size());
      }
      for (std::size_t b = start; b < stop; ++b) {
        const Vector& x = dataset.points[order[b]];
        const Label y = dataset.labels[order[b]];

        Eigen::VectorXd h = x;
        for (std::size_t i = 0; i < layer_count; ++i) {
          pre[i] = layers[i].weights * h + layers[i].bias;
          post[i] = (i + 1 < layer_count) ? pre[i].cwiseMax(0.0).eval() : pre[i];
          h = post[i];
        }

        // softmax cross-entropy gradient
        const Eigen::VectorXd& z = post[layer_count - 1];
        const double zmax = z.maxCoeff();
        Eigen::VectorXd p = (z.array() - zmax).exp();
        p /= p.sum();
        Eigen::VectorXd delta = p;
        delta[y] -= 1.0;

        for (std::size_t i = layer_count; i-- > 0;) {
          const Eigen::VectorXd& input = (i == 0) ? x : post[i - 1];
          grad_w[i] += delta * input.transpose();
          grad_b[i] += delta;
          if (i > 0) {
            delta = (layers[i].weights.transpose() * delta).eval();
            delta = delta.cwiseProduct((pre[i - 1].array() > 0.0).cast<double>().matrix());
          }
        }
      }
      const double scale = options.learning_rate / static_cast<double>(stop - start);
      for (std::size_t i = 0; i < layer_count; ++i) {
        layers[i].weights -= scale * grad_w[i];
        layers[i].bias -= scale * grad_b[i];
      }
    }
  }

  MlpClassifier model(std::move(layers));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (model.classify(dataset.points[i]) == dataset.labels[i]) ++correct;
  }
  return TrainResult{std::move(model), static_cast<double>(correct) / static_cast<double>(n)};
}

}  // namespace robustcf
