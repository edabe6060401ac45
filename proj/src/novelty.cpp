#include "scil/novelty.hpp"

#include <sstream>

#include "scil/errors.hpp"

namespace scil {

NoveltyThresholds compute_thresholds(const UnifiedModel& model, const DynamicMemory& memory,
                                     long timestep) {
  NoveltyThresholds thresholds;
  thresholds.theta.resize(memory.class_count());
  thresholds.computed_at = timestep;
  for (int c = 0; c < memory.class_count(); ++c) {
    const ClassQueue& queue = memory.class_queue(c);
    if (queue.items().empty()) {
      std::ostringstream oss;
      oss << "cannot compute threshold for class " << c << ": queue is empty";
      throw_threshold(oss.str());
    }
    double max_loss = 0.0;
    bool first = true;
    for (const auto& item : queue.items()) {
      const double loss = model.recon_loss_single(item.features);
      if (first || loss > max_loss) {
        max_loss = loss;
        first = false;
      }
    }
    thresholds.theta(c) = max_loss;
  }
  return thresholds;
}

Detection detect(const Prediction& prediction, const NoveltyThresholds& thresholds) {
  if (prediction.label < 0 || prediction.label >= thresholds.class_count()) {
    throw_internal("detect: predicted label outside threshold range");
  }
  return Detection{prediction.recon_loss > thresholds.theta(prediction.label)};
}

}  // namespace scil
