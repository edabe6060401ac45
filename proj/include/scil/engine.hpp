#ifndef SCIL_ENGINE_HPP
#define SCIL_ENGINE_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "scil/corrector.hpp"
#include "scil/memory.hpp"
#include "scil/model.hpp"
#include "scil/novelty.hpp"
#include "scil/resampler.hpp"
#include "scil/streams.hpp"

namespace scil {

struct EngineConfig {
  int t_train = 2000;
  int majority_queue_size = 1000;  // m
  int minority_queue_size = 30;    // l
  int epochs_offline = 20;
  int epochs_online = 10;
  double alpha = 0.2;
  int pretrain_majority_count = 1000;
  int pretrain_minority_count = 30;
  // false = Baseline mode: the model is frozen after pretraining. The
  // dynamic memory keeps operating (queues update, full buffers are
  // promoted) but no training, head expansion, or threshold update ever
  // happens.
  bool incremental_enabled = true;
  std::uint64_t seed = 0;

  std::vector<int> ae_hidden = {8};
  int bottleneck = 2;
  std::vector<int> mlp_hidden = {2};
  ReconLossKind recon_loss = ReconLossKind::SquaredError;
  nn::OptimizerConfig optimizer;
  int batch_size = 32;

  RetentionPolicy retention;
  SmoteConfig smote;

  void validate() const;
};

enum class StepEvent { None, NewModelTrained, IncrementalTrained };

const char* step_event_name(StepEvent event);

struct StepOutcome {
  long timestep = 0;
  // Post-detection label: the predicted class, or the novel sentinel
  // (current class count) when flagged novel.
  int predicted_label = 0;
  bool is_novel = false;
  double recon_loss = 0.0;
  double theta_of_predicted = 0.0;
  StepEvent event = StepEvent::None;
  // True whenever the novel buffer was promoted this step (in Baseline
  // mode promotion happens without a NewModelTrained event).
  bool class_promoted = false;
  // Ride-along ground truths of the promoted buffer, for scoring only.
  std::vector<int> promoted_truths;
};

struct CorrectionEvent {
  long timestep = 0;
  std::vector<CorrectionRecord> records;
};

// Owns the model, memory, and thresholds, and runs the one-by-one loop:
// predict, detect, store, and retrain when the novel buffer fills or the
// training interval elapses.
class Engine {
public:
  explicit Engine(const EngineConfig& config);

  // D[c] holds the labeled pretraining instances of class c; trains the
  // initial model and computes the initial thresholds.
  void pretrain(const std::vector<std::vector<VectorXd>>& pretrain_data);

  StepOutcome step(const VectorXd& x, int true_label_for_eval = -1);

  std::vector<StepOutcome> run_stream(const std::vector<StreamItem>& items);

  const UnifiedModel& model() const;
  const DynamicMemory& memory() const;
  const NoveltyThresholds& thresholds() const;
  const std::vector<CorrectionEvent>& correction_log() const { return corrections_; }
  long timestep() const { return t_; }
  std::size_t peak_stored() const { return peak_stored_; }
  bool pretrained() const { return model_.has_value(); }

private:
  void train_new_model();
  void train_incremental();
  TrainingSet balanced_training_set();

  EngineConfig config_;
  std::optional<UnifiedModel> model_;
  std::optional<DynamicMemory> memory_;
  NoveltyThresholds thresholds_;
  long t_ = 0;
  long sessions_ = 0;
  Rng rng_;
  std::vector<CorrectionEvent> corrections_;
  std::size_t peak_stored_ = 0;
};

}  // namespace scil

#endif
