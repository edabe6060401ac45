#ifndef SCIL_CORRECTOR_HPP
#define SCIL_CORRECTOR_HPP

#include <Eigen/Dense>
#include <vector>

#include "scil/memory.hpp"

namespace scil {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct RetentionPolicy {
  double keep_min = 0.5;
  double keep_max = 0.95;
  double lambda = 0.5;
  int min_keep = 5;
  int k_density = 5;
  // Returned density when every pairwise distance is zero.
  double rho_cap = 1e6;
  // Fraction of the queue (closest to the geometric median) used for
  // the covariance estimate.
  double cov_trim = 0.75;
};

struct ClassStats {
  double rho = 0.0;       // 1 / median k-NN distance
  double s = 0.0;         // mean distance to the geometric median
  VectorXd mu;            // geometric median
  double rho_comp = 0.0;  // rho * s
  MatrixXd sigma;         // covariance about mu, diagonally loaded
  int queue_size = 0;
};

// Inverse of the median k-th-nearest-neighbor distance. Requires at
// least two points and 1 <= k < |points|.
double local_density(const std::vector<VectorXd>& points, int k, double rho_cap = 1e6);

// Weiszfeld iteration started at the coordinate-wise median, with the
// Vardi-Zhang correction when an iterate lands on a data point.
VectorXd geometric_median(const std::vector<VectorXd>& points, double tol = 1e-7,
                          int max_iters = 500);

double class_scale(const std::vector<VectorXd>& points, const VectorXd& mu);

// Second moment about mu over the trim fraction of points closest to
// mu, plus diagonal loading of 1e-6 * trace / d. The trimming keeps a
// handful of far contaminants from inflating the variance along their
// own direction, which would otherwise mask them from the Mahalanobis
// ranking; the loading keeps 30-point queues invertible in higher
// dimensions.
MatrixXd robust_covariance(const std::vector<VectorXd>& points, const VectorXd& mu,
                           double trim = 0.75);

ClassStats compute_class_stats(const std::vector<VectorXd>& points, const RetentionPolicy& policy);

// r_i = keep_min + (lambda * rho_hat + (1 - lambda) * l_hat) *
// (keep_max - keep_min), with rho_comp and queue sizes min-max
// normalized across classes; a degenerate spread normalizes to 1.
std::vector<double> retention_ratios(const std::vector<ClassStats>& stats,
                                     const RetentionPolicy& policy);

struct CoreSubset {
  std::vector<std::size_t> kept_indices;  // ascending, so order is preserved
  double tau = 0.0;                       // k-th order statistic of distances
  bool euclidean_fallback = false;
};

// Keeps the max(min_keep, floor(r * |points|)) members closest to mu in
// Mahalanobis distance (capped at |points|). Falls back to Euclidean
// ranking when sigma is not positive-definite.
CoreSubset core_subset(const std::vector<VectorXd>& points, const VectorXd& mu,
                       const MatrixXd& sigma, double r, const RetentionPolicy& policy);

struct CorrectionRecord {
  int class_index = 0;
  double rho = 0.0;
  double s = 0.0;
  double rho_comp = 0.0;
  double r = 0.0;
  int kept = 0;
  double tau = 0.0;
  double mdc_before = 0.0;
  double mdc_after = 0.0;
};

// Purifies every minority queue (the majority queue is untouched).
std::vector<CorrectionRecord> correct(DynamicMemory& memory, const RetentionPolicy& policy);

}  // namespace scil

#endif
