#include "scil/nn.hpp"

#include <cmath>
#include <sstream>

#include "scil/errors.hpp"

namespace scil::nn {

MatrixXd activate(Activation act, const MatrixXd& z) {
  switch (act) {
    case Activation::LeakyReLU:
      return z.array().max(z.array() * kLeakySlope);
    case Activation::Sigmoid:
      return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    case Activation::Tanh:
      return z.array().tanh().matrix();
    case Activation::ReLU:
      return z.array().max(0.0).matrix();
    case Activation::Identity:
      return z;
  }
  throw_internal("unknown activation");
}

MatrixXd activate_grad(Activation act, const MatrixXd& z, const MatrixXd& a) {
  switch (act) {
    case Activation::LeakyReLU:
      return (z.array() > 0.0).select(MatrixXd::Ones(z.rows(), z.cols()),
                                      MatrixXd::Constant(z.rows(), z.cols(), kLeakySlope));
    case Activation::Sigmoid:
      return (a.array() * (1.0 - a.array())).matrix();
    case Activation::Tanh:
      return (1.0 - a.array().square()).matrix();
    case Activation::ReLU:
      return (z.array() > 0.0).select(MatrixXd::Ones(z.rows(), z.cols()),
                                      MatrixXd::Zero(z.rows(), z.cols()));
    case Activation::Identity:
      return MatrixXd::Ones(z.rows(), z.cols());
  }
  throw_internal("unknown activation");
}

const char* activation_name(Activation act) {
  switch (act) {
    case Activation::LeakyReLU: return "leaky_relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::ReLU: return "relu";
    case Activation::Identity: return "identity";
  }
  return "?";
}

Activation activation_from_name(const std::string& name) {
  if (name == "leaky_relu") return Activation::LeakyReLU;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::ReLU;
  if (name == "identity") return Activation::Identity;
  throw_config("unknown activation name: " + name);
}

VectorXd DenseLayer::forward(const VectorXd& x) const {
  if (x.size() != in_dim()) {
    std::ostringstream oss;
    oss << "layer expects input of dim " << in_dim() << ", got " << x.size();
    throw_config(oss.str());
  }
  return activate(activation, weights * x + biases);
}

MatrixXd DenseLayer::forward(const MatrixXd& x) const {
  if (x.rows() != in_dim()) {
    std::ostringstream oss;
    oss << "layer expects input of dim " << in_dim() << ", got " << x.rows();
    throw_config(oss.str());
  }
  return activate(activation, (weights * x).colwise() + biases);
}

DenseLayer make_dense_layer(int in_dim, int out_dim, Activation act, Rng& rng) {
  DenseLayer layer;
  layer.weights.resize(out_dim, in_dim);
  const double stddev = std::sqrt(2.0 / static_cast<double>(in_dim));
  for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      layer.weights(i, j) = rng.normal(0.0, stddev);
    }
  }
  layer.biases = VectorXd::Zero(out_dim);
  layer.activation = act;
  return layer;
}

VectorXd softmax(const VectorXd& logits) {
  const double m = logits.maxCoeff();
  VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

MatrixXd softmax_cols(const MatrixXd& logits) {
  MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    out.col(c) = softmax(logits.col(c));
  }
  return out;
}

namespace {

void check_same_shape(const MatrixXd& a, const MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream oss;
    oss << what << ": shape mismatch (" << a.rows() << "x" << a.cols() << " vs "
        << b.rows() << "x" << b.cols() << ")";
    throw_config(oss.str());
  }
}

inline double clip_prob(double p) {
  return std::min(1.0 - kEpsClip, std::max(kEpsClip, p));
}

}  // namespace

double bce_recon_loss(const MatrixXd& x, const MatrixXd& xhat) {
  check_same_shape(x, xhat, "bce_recon_loss");
  if ((x.array() < 0.0).any() || (x.array() > 1.0).any()) {
    throw_input_domain("bce_recon_loss: targets must lie in [0,1]");
  }
  double total = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double t = x(r, c);
      const double p = clip_prob(xhat(r, c));
      total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
  }
  return total;
}

double mse_recon_loss(const MatrixXd& x, const MatrixXd& xhat) {
  check_same_shape(x, xhat, "mse_recon_loss");
  const double b = static_cast<double>(x.cols());
  return (xhat - x).squaredNorm() / (2.0 * b);
}

double bce_recon_single(const VectorXd& x, const VectorXd& xhat) {
  return bce_recon_loss(x, xhat);
}

double mse_recon_single(const VectorXd& x, const VectorXd& xhat) {
  return mse_recon_loss(x, xhat);
}

double ce_clf_loss(const MatrixXd& targets_onehot, const MatrixXd& probs) {
  check_same_shape(targets_onehot, probs, "ce_clf_loss");
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    if (std::abs(probs.col(c).sum() - 1.0) > 1e-6) {
      throw_internal("ce_clf_loss: prediction column is not a probability vector");
    }
  }
  double total = 0.0;
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
      const double t = targets_onehot(r, c);
      if (t != 0.0) {
        total -= t * std::log(clip_prob(probs(r, c)));
      }
    }
  }
  return total / static_cast<double>(probs.cols());
}

MatrixXd bce_recon_grad(const MatrixXd& x, const MatrixXd& xhat) {
  MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double t = x(r, c);
      const double p = clip_prob(xhat(r, c));
      g(r, c) = -(t / p) + (1.0 - t) / (1.0 - p);
    }
  }
  return g;
}

MatrixXd mse_recon_grad(const MatrixXd& x, const MatrixXd& xhat) {
  return (xhat - x) / static_cast<double>(x.cols());
}

Network::Network(std::string name, std::vector<DenseLayer> layers)
    : layers(std::move(layers)), name_(std::move(name)) {
  zero_grads();
}

VectorXd Network::forward(const VectorXd& x) const {
  VectorXd a = x;
  for (const auto& layer : layers) a = layer.forward(a);
  return a;
}

MatrixXd Network::forward(const MatrixXd& x) const {
  MatrixXd a = x;
  for (const auto& layer : layers) a = layer.forward(a);
  return a;
}

MatrixXd Network::forward_cached(const MatrixXd& x) {
  input_ = x;
  preacts_.resize(layers.size());
  acts_.resize(layers.size());
  const MatrixXd* in = &input_;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    preacts_[i] = (layers[i].weights * (*in)).colwise() + layers[i].biases;
    acts_[i] = activate(layers[i].activation, preacts_[i]);
    in = &acts_[i];
  }
  return acts_.back();
}

MatrixXd Network::backward(const MatrixXd& grad_output) {
  if (preacts_.empty()) throw_internal(name_ + ": backward without cached forward");
  MatrixXd grad = grad_output;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const MatrixXd gz =
        grad.cwiseProduct(activate_grad(layers[k].activation, preacts_[k], acts_[k]));
    const MatrixXd& below = (k == 0) ? input_ : acts_[k - 1];
    weight_grads[k] += gz * below.transpose();
    bias_grads[k] += gz.rowwise().sum();
    grad = layers[k].weights.transpose() * gz;
  }
  return grad;
}

void Network::zero_grads() {
  weight_grads.resize(layers.size());
  bias_grads.resize(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    weight_grads[i] = MatrixXd::Zero(layers[i].out_dim(), layers[i].in_dim());
    bias_grads[i] = VectorXd::Zero(layers[i].out_dim());
  }
}

Network make_network(std::string name, int input_dim, const std::vector<int>& hidden,
                     int output_dim, Activation hidden_act, Activation output_act, Rng& rng) {
  std::vector<DenseLayer> layers;
  int in = input_dim;
  for (int width : hidden) {
    layers.push_back(make_dense_layer(in, width, hidden_act, rng));
    in = width;
  }
  layers.push_back(make_dense_layer(in, output_dim, output_act, rng));
  return Network(std::move(name), std::move(layers));
}

void Optimizer::attach(std::vector<Network*> nets) {
  nets_ = std::move(nets);
  m_w_.clear();
  v_w_.clear();
  m_b_.clear();
  v_b_.clear();
  step_count_ = 0;
  for (Network* net : nets_) {
    for (const auto& layer : net->layers) {
      m_w_.push_back(MatrixXd::Zero(layer.out_dim(), layer.in_dim()));
      v_w_.push_back(MatrixXd::Zero(layer.out_dim(), layer.in_dim()));
      m_b_.push_back(VectorXd::Zero(layer.out_dim()));
      v_b_.push_back(VectorXd::Zero(layer.out_dim()));
    }
  }
}

void Optimizer::step() {
  ++step_count_;
  std::size_t slot = 0;
  for (Network* net : nets_) {
    for (std::size_t k = 0; k < net->layers.size(); ++k, ++slot) {
      DenseLayer& layer = net->layers[k];
      const MatrixXd& gw = net->weight_grads[k];
      const VectorXd& gb = net->bias_grads[k];
      if (!gw.allFinite() || !gb.allFinite()) {
        std::ostringstream oss;
        oss << "non-finite gradient in " << net->name() << " layer " << k;
        throw_training(oss.str());
      }
      if (config_.method == OptimMethod::Sgd) {
        layer.weights -= config_.learning_rate * gw;
        layer.biases -= config_.learning_rate * gb;
      } else {
        const double b1 = config_.beta1;
        const double b2 = config_.beta2;
        const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
        const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
        m_w_[slot] = b1 * m_w_[slot] + (1.0 - b1) * gw;
        v_w_[slot] = b2 * v_w_[slot].array().matrix() + (1.0 - b2) * gw.cwiseProduct(gw);
        m_b_[slot] = b1 * m_b_[slot] + (1.0 - b1) * gb;
        v_b_[slot] = b2 * v_b_[slot] + (1.0 - b2) * gb.cwiseProduct(gb);
        layer.weights.array() -= config_.learning_rate * (m_w_[slot].array() / corr1) /
                                 ((v_w_[slot].array() / corr2).sqrt() + config_.eps);
        layer.biases.array() -= config_.learning_rate * (m_b_[slot].array() / corr1) /
                                ((v_b_[slot].array() / corr2).sqrt() + config_.eps);
      }
      if (!layer.weights.allFinite() || !layer.biases.allFinite()) {
        std::ostringstream oss;
        oss << "non-finite parameter after update in " << net->name() << " layer " << k;
        throw_training(oss.str());
      }
    }
    net->zero_grads();
  }
}

}  // namespace scil::nn
