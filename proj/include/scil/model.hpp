#ifndef SCIL_MODEL_HPP
#define SCIL_MODEL_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scil/nn.hpp"
#include "scil/rng.hpp"

namespace scil {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ReconLossKind { SquaredError, BinaryCrossEntropy };

const char* recon_loss_name(ReconLossKind kind);
ReconLossKind recon_loss_from_name(const std::string& name);

// Widths of the two fixed architectures. The decoder mirrors ae_hidden
// in reverse; bottleneck is both the decoder input and the classifier
// input dimension.
struct ModelArch {
  int input_dim = 0;
  std::vector<int> ae_hidden;
  int bottleneck = 0;
  std::vector<int> mlp_hidden;
  int class_count = 0;
};

struct Prediction {
  int label = 0;
  VectorXd probabilities;
  double recon_loss = 0.0;
  VectorXd embedding;
};

// Composite model: classifier(encoder(x)) with a decoder branch.
// Trained jointly on alpha * L_recon + (1 - alpha) * L_clf.
class UnifiedModel {
public:
  UnifiedModel(const ModelArch& arch, double alpha, ReconLossKind recon_kind,
               std::uint64_t run_seed, Rng& init_rng);

  Prediction predict(const VectorXd& x) const;

  double recon_loss_single(const VectorXd& x) const;

  // alpha * L_recon + (1 - alpha) * L_clf on the batch (columns are
  // instances).
  double total_loss(const MatrixXd& x, const std::vector<int>& labels) const;

  // Loss with an explicit recon weight; alpha_eff = 1 gives the pure
  // reconstruction loss, 0 the pure classification loss.
  double evaluate_loss(const MatrixXd& x, const std::vector<int>& labels, double alpha_eff) const;

  // Accumulates parameter gradients of evaluate_loss into the three
  // networks and returns the loss value.
  double compute_gradients(const MatrixXd& x, const std::vector<int>& labels, double alpha_eff);

  // Mini-batch training; returns the mean batch loss per epoch.
  std::vector<double> train_session(const MatrixXd& x, const std::vector<int>& labels, int epochs,
                                    const nn::OptimizerConfig& opt_config, Rng& rng,
                                    int batch_size = 32);

  // Replaces the classifier with a freshly initialized head of width
  // new_count; encoder and decoder are carried over untouched.
  void expand_classes(int new_count, Rng& rng);

  int class_count() const { return arch_.class_count; }
  int input_dim() const { return arch_.input_dim; }
  double alpha() const { return alpha_; }
  ReconLossKind recon_kind() const { return recon_kind_; }
  const ModelArch& arch() const { return arch_; }
  std::uint64_t run_seed() const { return run_seed_; }

  std::string to_json_string() const;
  static UnifiedModel from_json_string(const std::string& text);

  nn::Network encoder;
  nn::Network decoder;
  nn::Network classifier;

private:
  UnifiedModel() = default;

  ModelArch arch_;
  double alpha_ = 0.2;
  ReconLossKind recon_kind_ = ReconLossKind::SquaredError;
  std::uint64_t run_seed_ = 0;
};

MatrixXd one_hot(const std::vector<int>& labels, int class_count);

}  // namespace scil

#endif
