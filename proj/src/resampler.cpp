#include "scil/resampler.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "scil/errors.hpp"

namespace scil {

std::vector<VectorXd> smote_class(const std::vector<VectorXd>& queue, const SmoteConfig& config,
                                  Rng& rng) {
  if (config.k_neighbors < 1) throw_config("smote k_neighbors must be >= 1");
  if (queue.size() < 2) {
    std::cerr << "warning: smote skipped for a queue of size " << queue.size()
              << " (no segment to interpolate)\n";
    return queue;
  }
  const std::size_t n = queue.size();
  if (n >= static_cast<std::size_t>(config.target_count)) return queue;

  const int k = std::min(config.k_neighbors, static_cast<int>(n) - 1);

  // k nearest neighbors per member, distance ties broken by index.
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back((queue[i] - queue[j]).norm(), j);
    }
    std::sort(dist.begin(), dist.end());
    neighbors[i].reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) neighbors[i].push_back(dist[static_cast<std::size_t>(t)].second);
  }

  std::vector<VectorXd> out = queue;
  const std::size_t synth_count = static_cast<std::size_t>(config.target_count) - n;
  out.reserve(static_cast<std::size_t>(config.target_count));
  for (std::size_t s = 0; s < synth_count; ++s) {
    const std::size_t a = s % n;
    const std::size_t b = neighbors[a][rng.uniform_int(static_cast<std::uint64_t>(k))];
    const double gap = rng.uniform();
    out.push_back(queue[a] + gap * (queue[b] - queue[a]));
  }
  return out;
}

TrainingSet build_training_set(const std::vector<std::vector<VectorXd>>& classes,
                               const SmoteConfig& config, Rng& rng) {
  if (classes.empty()) throw_config("build_training_set: no classes");
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (classes[c].empty()) {
      throw_config("build_training_set: class " + std::to_string(c) + " has no instances");
    }
  }

  std::vector<VectorXd> rows;
  std::vector<int> labels;
  for (const auto& x : classes[0]) {
    rows.push_back(x);
    labels.push_back(0);
  }
  for (std::size_t c = 1; c < classes.size(); ++c) {
    Rng class_rng = rng.derive(0x534d4f54ULL + c);
    const std::vector<VectorXd> sampled = smote_class(classes[c], config, class_rng);
    for (const auto& x : sampled) {
      rows.push_back(x);
      labels.push_back(static_cast<int>(c));
    }
  }

  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = rng.derive(0x53485546ULL);
  shuffle_rng.shuffle(order);

  TrainingSet set;
  set.x.resize(rows[0].size(), static_cast<Eigen::Index>(rows.size()));
  set.labels.resize(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    set.x.col(static_cast<Eigen::Index>(i)) = rows[order[i]];
    set.labels[i] = labels[order[i]];
  }
  return set;
}

TrainingSet build_training_set(const DynamicMemory& memory, const SmoteConfig& config, Rng& rng) {
  return build_training_set(memory.snapshot_for_training(), config, rng);
}

}  // namespace scil
