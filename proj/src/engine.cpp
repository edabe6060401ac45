#include "scil/engine.hpp"

#include <sstream>

#include "scil/errors.hpp"

namespace scil {

namespace {

constexpr std::uint64_t kTagModelInit = 0x4d4f44;
constexpr std::uint64_t kTagTrain = 0x545249;
constexpr std::uint64_t kTagSmote = 0x534d4f;
constexpr std::uint64_t kTagHead = 0x484541;

}  // namespace

void EngineConfig::validate() const {
  if (t_train < 1) throw_config("t_train must be >= 1");
  if (minority_queue_size > majority_queue_size) throw_config("l must not exceed m");
  if (minority_queue_size < 1 || majority_queue_size < 1) throw_config("queue sizes must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw_config("alpha must lie in (0, 1)");
  if (epochs_offline < 0 || epochs_online < 0) throw_config("epoch counts must be non-negative");
  if (pretrain_majority_count < 1 || pretrain_minority_count < 1) {
    throw_config("pretraining counts must be positive");
  }
}

const char* step_event_name(StepEvent event) {
  switch (event) {
    case StepEvent::None: return "None";
    case StepEvent::NewModelTrained: return "NewModelTrained";
    case StepEvent::IncrementalTrained: return "IncrementalTrained";
  }
  return "?";
}

Engine::Engine(const EngineConfig& config) : config_(config), rng_(config.seed) {
  config_.validate();
}

void Engine::pretrain(const std::vector<std::vector<VectorXd>>& pretrain_data) {
  if (pretrain_data.empty() || pretrain_data[0].empty()) {
    throw_config("pretraining requires majority-class data");
  }
  for (std::size_t c = 0; c < pretrain_data.size(); ++c) {
    if (pretrain_data[c].empty()) {
      throw_config("pretraining data for class " + std::to_string(c) + " is missing");
    }
  }

  const int class_count = static_cast<int>(pretrain_data.size());
  const int input_dim = static_cast<int>(pretrain_data[0][0].size());

  ModelArch arch;
  arch.input_dim = input_dim;
  arch.ae_hidden = config_.ae_hidden;
  arch.bottleneck = config_.bottleneck;
  arch.mlp_hidden = config_.mlp_hidden;
  arch.class_count = class_count;
  Rng init_rng = rng_.derive(kTagModelInit);
  model_.emplace(arch, config_.alpha, config_.recon_loss, config_.seed, init_rng);

  memory_.emplace(config_.majority_queue_size, config_.minority_queue_size, class_count - 1);
  for (int c = 0; c < class_count; ++c) {
    for (const auto& x : pretrain_data[static_cast<std::size_t>(c)]) {
      // Pretraining labels are true labels, so the ride-along truth is
      // the class itself.
      memory_->append(c, StoredInstance{x, 0, c});
    }
  }

  const TrainingSet set = balanced_training_set();
  Rng train_rng = rng_.derive(kTagTrain).derive(static_cast<std::uint64_t>(sessions_++));
  model_->train_session(set.x, set.labels, config_.epochs_offline, config_.optimizer, train_rng,
                        config_.batch_size);
  thresholds_ = compute_thresholds(*model_, *memory_, 0);
  peak_stored_ = memory_->total_stored();
}

TrainingSet Engine::balanced_training_set() {
  SmoteConfig smote = config_.smote;
  smote.target_count = config_.smote.target_count > 0 ? config_.smote.target_count
                                                      : config_.majority_queue_size;
  Rng smote_rng = rng_.derive(kTagSmote).derive(static_cast<std::uint64_t>(sessions_));
  return build_training_set(*memory_, smote, smote_rng);
}

void Engine::train_new_model() {
  CorrectionEvent event;
  event.timestep = t_;
  event.records = correct(*memory_, config_.retention);
  corrections_.push_back(std::move(event));

  Rng head_rng = rng_.derive(kTagHead).derive(static_cast<std::uint64_t>(sessions_));
  model_->expand_classes(model_->class_count() + 1, head_rng);

  const TrainingSet set = balanced_training_set();
  Rng train_rng = rng_.derive(kTagTrain).derive(static_cast<std::uint64_t>(sessions_++));
  model_->train_session(set.x, set.labels, config_.epochs_offline, config_.optimizer, train_rng,
                        config_.batch_size);
  thresholds_ = compute_thresholds(*model_, *memory_, t_);
}

void Engine::train_incremental() {
  const TrainingSet set = balanced_training_set();
  Rng train_rng = rng_.derive(kTagTrain).derive(static_cast<std::uint64_t>(sessions_++));
  model_->train_session(set.x, set.labels, config_.epochs_online, config_.optimizer, train_rng,
                        config_.batch_size);
  thresholds_ = compute_thresholds(*model_, *memory_, t_);
}

StepOutcome Engine::step(const VectorXd& x, int true_label_for_eval) {
  if (!model_) throw_internal("engine step before pretraining");
  ++t_;

  const Prediction pred = model_->predict(x);
  const Detection det = detect(pred, thresholds_);

  StepOutcome outcome;
  outcome.timestep = t_;
  outcome.is_novel = det.is_novel;
  outcome.recon_loss = pred.recon_loss;
  outcome.theta_of_predicted = thresholds_.theta(pred.label);
  outcome.predicted_label = det.is_novel ? memory_->class_count() : pred.label;

  if (det.is_novel) {
    memory_->append_novel(StoredInstance{x, t_, true_label_for_eval});
  } else {
    memory_->append(pred.label, StoredInstance{x, t_, true_label_for_eval});
  }

  if (memory_->novel_full()) {
    for (const auto& item : memory_->novel_buffer().items()) {
      outcome.promoted_truths.push_back(item.true_label);
    }
    memory_->promote_novel();
    outcome.class_promoted = true;
    if (config_.incremental_enabled) {
      train_new_model();
      outcome.event = StepEvent::NewModelTrained;
    }
  } else if (t_ % config_.t_train == 0 && config_.incremental_enabled) {
    train_incremental();
    outcome.event = StepEvent::IncrementalTrained;
  }

  peak_stored_ = std::max(peak_stored_, memory_->total_stored());
  if (memory_->total_stored() > memory_->capacity_bound()) {
    throw_internal("memory bound violated");
  }
  return outcome;
}

std::vector<StepOutcome> Engine::run_stream(const std::vector<StreamItem>& items) {
  std::vector<StepOutcome> outcomes;
  outcomes.reserve(items.size());
  for (const auto& item : items) {
    outcomes.push_back(step(item.x, item.label));
  }
  return outcomes;
}

const UnifiedModel& Engine::model() const {
  if (!model_) throw_internal("engine has no model yet");
  return *model_;
}

const DynamicMemory& Engine::memory() const {
  if (!memory_) throw_internal("engine has no memory yet");
  return *memory_;
}

const NoveltyThresholds& Engine::thresholds() const { return thresholds_; }

}  // namespace scil
