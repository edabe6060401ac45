#ifndef SCIL_NN_HPP
#define SCIL_NN_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scil/rng.hpp"

namespace scil::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { LeakyReLU, Sigmoid, Tanh, ReLU, Identity };

constexpr double kLeakySlope = 0.01;

// Clip applied to probabilities inside log() terms.
constexpr double kEpsClip = 1e-7;

MatrixXd activate(Activation act, const MatrixXd& z);

// Elementwise da/dz, given both the pre-activation z and a = activate(z).
MatrixXd activate_grad(Activation act, const MatrixXd& z, const MatrixXd& a);

const char* activation_name(Activation act);
Activation activation_from_name(const std::string& name);

struct DenseLayer {
  MatrixXd weights;  // out_dim x in_dim
  VectorXd biases;   // out_dim
  Activation activation = Activation::Identity;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }

  VectorXd forward(const VectorXd& x) const;
  // Batch forward; columns are instances.
  MatrixXd forward(const MatrixXd& x) const;
};

// He-normal weights (variance 2/fan_in), zero biases.
DenseLayer make_dense_layer(int in_dim, int out_dim, Activation act, Rng& rng);

VectorXd softmax(const VectorXd& logits);
MatrixXd softmax_cols(const MatrixXd& logits);

// Reconstruction losses over a batch (columns are instances).
// Binary cross-entropy sums over the batch; squared error averages with
// the 1/(2B) convention. Per-instance values follow the same formulas
// with B = 1.
double bce_recon_loss(const MatrixXd& x, const MatrixXd& xhat);
double mse_recon_loss(const MatrixXd& x, const MatrixXd& xhat);
double bce_recon_single(const VectorXd& x, const VectorXd& xhat);
double mse_recon_single(const VectorXd& x, const VectorXd& xhat);

// Mean categorical cross-entropy; targets are one-hot columns and every
// prediction column must already be normalized to 1 within 1e-6.
double ce_clf_loss(const MatrixXd& targets_onehot, const MatrixXd& probs);

// Gradients of the batch losses with respect to xhat.
MatrixXd bce_recon_grad(const MatrixXd& x, const MatrixXd& xhat);
MatrixXd mse_recon_grad(const MatrixXd& x, const MatrixXd& xhat);

// A stack of dense layers with cached activations for backprop.
class Network {
public:
  Network() = default;
  Network(std::string name, std::vector<DenseLayer> layers);

  VectorXd forward(const VectorXd& x) const;
  MatrixXd forward(const MatrixXd& x) const;

  // Forward pass that caches pre-activations for a later backward().
  MatrixXd forward_cached(const MatrixXd& x);

  // grad_output = dL/d(network output) for the cached batch; accumulates
  // parameter gradients and returns dL/d(network input).
  MatrixXd backward(const MatrixXd& grad_output);

  void zero_grads();

  Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

  const std::string& name() const { return name_; }

  std::vector<DenseLayer> layers;
  std::vector<MatrixXd> weight_grads;
  std::vector<VectorXd> bias_grads;

private:
  std::string name_;
  MatrixXd input_;                // cached batch input
  std::vector<MatrixXd> preacts_; // z per layer
  std::vector<MatrixXd> acts_;    // a per layer
};

Network make_network(std::string name, int input_dim, const std::vector<int>& hidden,
                     int output_dim, Activation hidden_act, Activation output_act, Rng& rng);

enum class OptimMethod { Sgd, Adam };

struct OptimizerConfig {
  OptimMethod method = OptimMethod::Adam;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment (or plain) gradient steps over one or more networks.
// Moment accumulators mirror parameter shapes; the step counter is
// shared across all attached networks.
class Optimizer {
public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  void attach(std::vector<Network*> nets);

  // Applies one update from the accumulated gradients, then clears them.
  void step();

  long step_count() const { return step_count_; }

private:
  OptimizerConfig config_;
  std::vector<Network*> nets_;
  std::vector<MatrixXd> m_w_, v_w_;
  std::vector<VectorXd> m_b_, v_b_;
  long step_count_ = 0;
};

}  // namespace scil::nn

#endif
