#ifndef SCIL_EVALUATION_HPP
#define SCIL_EVALUATION_HPP

#include <Eigen/Dense>
#include <map>
#include <set>
#include <vector>

namespace scil {

using Eigen::VectorXd;

// Prequential scoring with exponential fading. Ground-truth labels are
// consumed only here; the engine itself never sees them.
//
// An instance whose true class is not yet covered by the label map is
// an emerging-class instance: it scores correct when flagged novel (or
// when its predicted internal class happens to map to it). Instances of
// mapped classes score correct only when the mapped prediction matches.
class PrequentialScorer {
public:
  explicit PrequentialScorer(double fading_factor = 0.99, int initial_classes = 2);

  void record(int true_label, int predicted_internal, bool is_novel);

  // Maps a newly promoted internal class to the majority ground truth
  // among the buffer's ride-along labels; ties break to the smallest
  // label. Unlabeled entries (-1) are ignored.
  void update_label_map(int promoted_internal, const std::vector<int>& buffer_truths);

  double en_accuracy() const;
  double g_mean() const;
  double false_negative_rate() const;

  // Faded recall of one ground-truth class (0 when the class has not
  // appeared or its faded total has vanished).
  double faded_recall(int true_label) const;
  const std::set<int>& appeared_classes() const { return appeared_; }
  const std::vector<int>& label_map() const { return label_map_; }
  bool is_known(int true_label) const { return known_.count(true_label) > 0; }

  long instances_seen() const { return n_; }

private:
  double gamma_;
  std::vector<int> label_map_;  // internal class -> ground truth
  std::set<int> known_;
  std::set<int> appeared_;
  std::map<int, double> faded_correct_;
  std::map<int, double> faded_total_;
  long n_ = 0;
  long a_new_ = 0;
  long a_old_ = 0;
  long fn_ = 0;
  long tp_ = 0;
};

// Mean Euclidean distance to a given centroid.
double mdc(const std::vector<VectorXd>& points, const VectorXd& centroid);

}  // namespace scil

#endif
