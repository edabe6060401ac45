#ifndef SCIL_RESAMPLER_HPP
#define SCIL_RESAMPLER_HPP

#include <Eigen/Dense>
#include <vector>

#include "scil/memory.hpp"
#include "scil/rng.hpp"

namespace scil {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SmoteConfig {
  int k_neighbors = 5;
  // Per-minority-class row count after oversampling; defaults to the
  // majority queue size so classes train fully balanced.
  int target_count = 1000;
};

// Originals plus synthetics interpolated between queue members and
// their k nearest same-class neighbors. Queues already at or above
// target pass through unchanged, as do queues too small to define a
// segment.
std::vector<VectorXd> smote_class(const std::vector<VectorXd>& queue, const SmoteConfig& config,
                                  Rng& rng);

struct TrainingSet {
  MatrixXd x;               // columns are instances
  std::vector<int> labels;  // pseudo-labels, parallel to columns
};

// Majority rows as-is with label 0; every minority queue oversampled to
// the target and labeled with its queue index; rows shuffled.
TrainingSet build_training_set(const std::vector<std::vector<VectorXd>>& classes,
                               const SmoteConfig& config, Rng& rng);

TrainingSet build_training_set(const DynamicMemory& memory, const SmoteConfig& config, Rng& rng);

}  // namespace scil

#endif
