#include "scil/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "scil/errors.hpp"

namespace scil {

PrequentialScorer::PrequentialScorer(double fading_factor, int initial_classes)
    : gamma_(fading_factor) {
  if (fading_factor <= 0.0 || fading_factor > 1.0) {
    throw_config("fading factor must lie in (0, 1]");
  }
  label_map_.resize(static_cast<std::size_t>(initial_classes));
  for (int c = 0; c < initial_classes; ++c) {
    label_map_[static_cast<std::size_t>(c)] = c;  // pretraining labels are true
    known_.insert(c);
  }
}

void PrequentialScorer::record(int true_label, int predicted_internal, bool is_novel) {
  ++n_;
  for (auto& [cls, v] : faded_correct_) v *= gamma_;
  for (auto& [cls, v] : faded_total_) v *= gamma_;

  int mapped = -1;
  if (!is_novel && predicted_internal >= 0 &&
      predicted_internal < static_cast<int>(label_map_.size())) {
    mapped = label_map_[static_cast<std::size_t>(predicted_internal)];
  }

  const bool emerging = known_.count(true_label) == 0;
  const bool correct = emerging ? (is_novel || mapped == true_label)
                                : (!is_novel && mapped == true_label);
  if (correct) {
    if (emerging) ++a_new_; else ++a_old_;
  }

  faded_total_[true_label] += 1.0;
  if (correct) faded_correct_[true_label] += 1.0;
  appeared_.insert(true_label);

  if (true_label != 0) {
    const bool predicted_majority = !is_novel && mapped == 0;
    if (predicted_majority) ++fn_; else ++tp_;
  }
}

void PrequentialScorer::update_label_map(int promoted_internal,
                                         const std::vector<int>& buffer_truths) {
  std::map<int, int> votes;
  for (int truth : buffer_truths) {
    if (truth >= 0) ++votes[truth];
  }
  int winner = -1;
  int best = 0;
  for (const auto& [label, count] : votes) {
    if (count > best) {  // std::map iterates ascending, so ties keep the smallest
      best = count;
      winner = label;
    }
  }
  if (promoted_internal >= static_cast<int>(label_map_.size())) {
    label_map_.resize(static_cast<std::size_t>(promoted_internal) + 1, -1);
  }
  label_map_[static_cast<std::size_t>(promoted_internal)] = winner;
  if (winner >= 0) known_.insert(winner);
}

double PrequentialScorer::en_accuracy() const {
  if (n_ == 0) return 0.0;
  return static_cast<double>(a_new_ + a_old_) / static_cast<double>(n_);
}

double PrequentialScorer::faded_recall(int true_label) const {
  const auto it = faded_total_.find(true_label);
  if (it == faded_total_.end() || it->second <= 0.0) return 0.0;
  const auto ic = faded_correct_.find(true_label);
  const double correct = ic == faded_correct_.end() ? 0.0 : ic->second;
  return correct / it->second;
}

double PrequentialScorer::g_mean() const {
  if (appeared_.empty()) return 0.0;
  double log_sum = 0.0;
  for (int cls : appeared_) {
    const double r = faded_recall(cls);
    if (r <= 0.0) return 0.0;
    log_sum += std::log(r);
  }
  return std::exp(log_sum / static_cast<double>(appeared_.size()));
}

double PrequentialScorer::false_negative_rate() const {
  const long denom = fn_ + tp_;
  if (denom == 0) return 0.0;
  return static_cast<double>(fn_) / static_cast<double>(denom);
}

double mdc(const std::vector<VectorXd>& points, const VectorXd& centroid) {
  if (points.empty()) throw_config("mdc of empty point set");
  double total = 0.0;
  for (const auto& p : points) total += (p - centroid).norm();
  return total / static_cast<double>(points.size());
}

}  // namespace scil
