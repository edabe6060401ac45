#include "scil/model.hpp"

#include <iostream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scil/errors.hpp"

namespace scil {

using json = nlohmann::json;

const char* recon_loss_name(ReconLossKind kind) {
  return kind == ReconLossKind::SquaredError ? "squared_error" : "binary_cross_entropy";
}

ReconLossKind recon_loss_from_name(const std::string& name) {
  if (name == "squared_error") return ReconLossKind::SquaredError;
  if (name == "binary_cross_entropy") return ReconLossKind::BinaryCrossEntropy;
  throw_config("unknown reconstruction loss: " + name);
}

MatrixXd one_hot(const std::vector<int>& labels, int class_count) {
  MatrixXd y = MatrixXd::Zero(class_count, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      std::ostringstream oss;
      oss << "label " << labels[i] << " outside [0, " << class_count - 1 << "]";
      throw_config(oss.str());
    }
    y(labels[i], static_cast<Eigen::Index>(i)) = 1.0;
  }
  return y;
}

namespace {

std::vector<int> reversed(std::vector<int> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

}  // namespace

UnifiedModel::UnifiedModel(const ModelArch& arch, double alpha, ReconLossKind recon_kind,
                           std::uint64_t run_seed, Rng& init_rng)
    : arch_(arch), alpha_(alpha), recon_kind_(recon_kind), run_seed_(run_seed) {
  if (arch.input_dim <= 0 || arch.bottleneck <= 0 || arch.class_count <= 0) {
    throw_config("model architecture dimensions must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw_config("alpha must lie strictly inside (0, 1)");
  }
  encoder = nn::make_network("encoder", arch.input_dim, arch.ae_hidden, arch.bottleneck,
                             nn::Activation::LeakyReLU, nn::Activation::LeakyReLU, init_rng);
  decoder = nn::make_network("decoder", arch.bottleneck, reversed(arch.ae_hidden), arch.input_dim,
                             nn::Activation::LeakyReLU, nn::Activation::Sigmoid, init_rng);
  classifier = nn::make_network("classifier", arch.bottleneck, arch.mlp_hidden, arch.class_count,
                                nn::Activation::LeakyReLU, nn::Activation::Identity, init_rng);
}

Prediction UnifiedModel::predict(const VectorXd& x) const {
  if (x.size() != arch_.input_dim) {
    std::ostringstream oss;
    oss << "predict expects dim " << arch_.input_dim << ", got " << x.size();
    throw_config(oss.str());
  }
  Prediction p;
  p.embedding = encoder.forward(x);
  p.probabilities = nn::softmax(classifier.forward(p.embedding));
  const VectorXd xhat = decoder.forward(p.embedding);
  p.recon_loss = recon_kind_ == ReconLossKind::SquaredError ? nn::mse_recon_single(x, xhat)
                                                            : nn::bce_recon_single(x, xhat);
  Eigen::Index best = 0;
  p.probabilities.maxCoeff(&best);
  p.label = static_cast<int>(best);
  return p;
}

double UnifiedModel::recon_loss_single(const VectorXd& x) const {
  const VectorXd xhat = decoder.forward(encoder.forward(x));
  return recon_kind_ == ReconLossKind::SquaredError ? nn::mse_recon_single(x, xhat)
                                                    : nn::bce_recon_single(x, xhat);
}

double UnifiedModel::total_loss(const MatrixXd& x, const std::vector<int>& labels) const {
  if (x.cols() == 0) throw_config("total_loss: empty batch");
  return evaluate_loss(x, labels, alpha_);
}

double UnifiedModel::evaluate_loss(const MatrixXd& x, const std::vector<int>& labels,
                                   double alpha_eff) const {
  const MatrixXd emb = encoder.forward(x);
  double loss = 0.0;
  if (alpha_eff != 0.0) {
    const MatrixXd xhat = decoder.forward(emb);
    loss += alpha_eff * (recon_kind_ == ReconLossKind::SquaredError
                             ? nn::mse_recon_loss(x, xhat)
                             : nn::bce_recon_loss(x, xhat));
  }
  if (alpha_eff != 1.0) {
    const MatrixXd probs = nn::softmax_cols(classifier.forward(emb));
    loss += (1.0 - alpha_eff) * nn::ce_clf_loss(one_hot(labels, arch_.class_count), probs);
  }
  return loss;
}

double UnifiedModel::compute_gradients(const MatrixXd& x, const std::vector<int>& labels,
                                       double alpha_eff) {
  encoder.zero_grads();
  decoder.zero_grads();
  classifier.zero_grads();
  const double b = static_cast<double>(x.cols());
  const MatrixXd emb = encoder.forward_cached(x);
  MatrixXd grad_emb = MatrixXd::Zero(emb.rows(), emb.cols());
  double loss = 0.0;

  if (alpha_eff != 0.0) {
    const MatrixXd xhat = decoder.forward_cached(emb);
    if (recon_kind_ == ReconLossKind::SquaredError) {
      loss += alpha_eff * nn::mse_recon_loss(x, xhat);
      grad_emb += decoder.backward(alpha_eff * nn::mse_recon_grad(x, xhat));
    } else {
      loss += alpha_eff * nn::bce_recon_loss(x, xhat);
      grad_emb += decoder.backward(alpha_eff * nn::bce_recon_grad(x, xhat));
    }
  }
  if (alpha_eff != 1.0) {
    const MatrixXd probs = nn::softmax_cols(classifier.forward_cached(emb));
    const MatrixXd targets = one_hot(labels, arch_.class_count);
    loss += (1.0 - alpha_eff) * nn::ce_clf_loss(targets, probs);
    // d(ce)/d(logits) through the softmax.
    grad_emb += classifier.backward((1.0 - alpha_eff) * (probs - targets) / b);
  }
  encoder.backward(grad_emb);
  return loss;
}

std::vector<double> UnifiedModel::train_session(const MatrixXd& x, const std::vector<int>& labels,
                                                int epochs, const nn::OptimizerConfig& opt_config,
                                                Rng& rng, int batch_size) {
  if (x.cols() == 0) {
    std::cerr << "warning: train_session called with empty dataset; skipping\n";
    return {};
  }
  if (static_cast<std::size_t>(x.cols()) != labels.size()) {
    throw_config("train_session: label count does not match batch size");
  }
  nn::Optimizer opt(opt_config);
  opt.attach({&encoder, &decoder, &classifier});

  const Eigen::Index n = x.cols();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> epoch_losses;
  epoch_losses.reserve(static_cast<std::size_t>(std::max(epochs, 0)));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += batch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(batch_size, n - start);
      MatrixXd xb(x.rows(), count);
      std::vector<int> yb(static_cast<std::size_t>(count));
      for (Eigen::Index i = 0; i < count; ++i) {
        xb.col(i) = x.col(order[static_cast<std::size_t>(start + i)]);
        yb[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(order[static_cast<std::size_t>(start + i)])];
      }
      loss_sum += compute_gradients(xb, yb, alpha_);
      opt.step();
      ++batches;
    }
    epoch_losses.push_back(loss_sum / static_cast<double>(batches));
  }
  return epoch_losses;
}

void UnifiedModel::expand_classes(int new_count, Rng& rng) {
  if (new_count != arch_.class_count + 1) {
    std::ostringstream oss;
    oss << "expand_classes: new count " << new_count << " must be exactly "
        << arch_.class_count + 1;
    throw_config(oss.str());
  }
  arch_.class_count = new_count;
  classifier = nn::make_network("classifier", arch_.bottleneck, arch_.mlp_hidden, new_count,
                                nn::Activation::LeakyReLU, nn::Activation::Identity, rng);
}

namespace {

json layer_to_json(const nn::DenseLayer& layer) {
  json w = json::array();
  for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
    w.push_back(std::move(row));
  }
  json b = json::array();
  for (Eigen::Index i = 0; i < layer.biases.size(); ++i) b.push_back(layer.biases(i));
  return json{{"weights", std::move(w)},
              {"biases", std::move(b)},
              {"activation", nn::activation_name(layer.activation)}};
}

nn::DenseLayer layer_from_json(const json& j) {
  nn::DenseLayer layer;
  const auto& w = j.at("weights");
  const Eigen::Index rows = static_cast<Eigen::Index>(w.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(w[0].size()) : 0;
  layer.weights.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = w[r][c].get<double>();
  }
  const auto& b = j.at("biases");
  layer.biases.resize(static_cast<Eigen::Index>(b.size()));
  for (Eigen::Index i = 0; i < layer.biases.size(); ++i) layer.biases(i) = b[i].get<double>();
  layer.activation = nn::activation_from_name(j.at("activation").get<std::string>());
  return layer;
}

json network_to_json(const nn::Network& net) {
  json layers = json::array();
  for (const auto& layer : net.layers) layers.push_back(layer_to_json(layer));
  return layers;
}

nn::Network network_from_json(const std::string& name, const json& j) {
  std::vector<nn::DenseLayer> layers;
  for (const auto& lj : j) layers.push_back(layer_from_json(lj));
  return nn::Network(name, std::move(layers));
}

}  // namespace

std::string UnifiedModel::to_json_string() const {
  json j;
  j["format"] = "scil-model";
  j["input_dim"] = arch_.input_dim;
  j["ae_hidden"] = arch_.ae_hidden;
  j["bottleneck"] = arch_.bottleneck;
  j["mlp_hidden"] = arch_.mlp_hidden;
  j["class_count"] = arch_.class_count;
  j["alpha"] = alpha_;
  j["recon_loss"] = recon_loss_name(recon_kind_);
  j["run_seed"] = run_seed_;
  j["encoder"] = network_to_json(encoder);
  j["decoder"] = network_to_json(decoder);
  j["classifier"] = network_to_json(classifier);
  return j.dump(2);
}

UnifiedModel UnifiedModel::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_io(std::string("model snapshot parse error: ") + e.what());
  }
  if (j.value("format", "") != "scil-model") throw_io("not a model snapshot file");
  UnifiedModel m;
  m.arch_.input_dim = j.at("input_dim").get<int>();
  m.arch_.ae_hidden = j.at("ae_hidden").get<std::vector<int>>();
  m.arch_.bottleneck = j.at("bottleneck").get<int>();
  m.arch_.mlp_hidden = j.at("mlp_hidden").get<std::vector<int>>();
  m.arch_.class_count = j.at("class_count").get<int>();
  m.alpha_ = j.at("alpha").get<double>();
  m.recon_kind_ = recon_loss_from_name(j.at("recon_loss").get<std::string>());
  m.run_seed_ = j.at("run_seed").get<std::uint64_t>();
  m.encoder = network_from_json("encoder", j.at("encoder"));
  m.decoder = network_from_json("decoder", j.at("decoder"));
  m.classifier = network_from_json("classifier", j.at("classifier"));
  return m;
}

}  // namespace scil
