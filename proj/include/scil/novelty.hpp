#ifndef SCIL_NOVELTY_HPP
#define SCIL_NOVELTY_HPP

#include <Eigen/Dense>

#include "scil/memory.hpp"
#include "scil/model.hpp"

namespace scil {

// Per-class reconstruction-loss cutoffs theta_0..theta_n. theta[i] is
// the maximum per-instance reconstruction loss over queue q_i at the
// time of computation.
struct NoveltyThresholds {
  Eigen::VectorXd theta;
  long computed_at = 0;

  int class_count() const { return static_cast<int>(theta.size()); }
};

NoveltyThresholds compute_thresholds(const UnifiedModel& model, const DynamicMemory& memory,
                                     long timestep);

struct Detection {
  bool is_novel = false;
};

// Novel iff the instance's reconstruction loss strictly exceeds the
// threshold of its predicted class; equality stays Known.
Detection detect(const Prediction& prediction, const NoveltyThresholds& thresholds);

}  // namespace scil

#endif
