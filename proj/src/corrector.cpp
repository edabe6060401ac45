#include "scil/corrector.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <iostream>
#include <numeric>

#include "scil/errors.hpp"

namespace scil {

namespace {

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) throw_internal("median of empty set");
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean_distance_to(const std::vector<VectorXd>& points, const VectorXd& center) {
  double total = 0.0;
  for (const auto& p : points) total += (p - center).norm();
  return total / static_cast<double>(points.size());
}

}  // namespace

double local_density(const std::vector<VectorXd>& points, int k, double rho_cap) {
  const std::size_t n = points.size();
  if (n < 2) throw_config("local_density requires at least two points");
  if (k < 1 || static_cast<std::size_t>(k) >= n) {
    throw_config("local_density requires 1 <= k < |points|");
  }
  std::vector<double> knn(n);
  std::vector<double> dists;
  dists.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    dists.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dists.push_back((points[i] - points[j]).norm());
    }
    std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
    knn[i] = dists[static_cast<std::size_t>(k - 1)];
  }
  const double med = median_of(std::move(knn));
  if (med <= 0.0) return rho_cap;
  return 1.0 / med;
}

VectorXd geometric_median(const std::vector<VectorXd>& points, double tol, int max_iters) {
  if (points.empty()) throw_config("geometric_median of empty set");
  const std::size_t n = points.size();
  if (n == 1) return points[0];
  const Eigen::Index dim = points[0].size();

  // Coordinate-wise median as the starting iterate.
  VectorXd mu(dim);
  {
    std::vector<double> coord(n);
    for (Eigen::Index d = 0; d < dim; ++d) {
      for (std::size_t i = 0; i < n; ++i) coord[i] = points[i](d);
      mu(d) = median_of(coord);
    }
  }

  constexpr double kAnchorEps = 1e-12;
  for (int iter = 0; iter < max_iters; ++iter) {
    // Locate a coincident data point, counting multiplicity.
    int anchor = -1;
    int multiplicity = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((points[i] - mu).norm() <= kAnchorEps) {
        if (anchor < 0) anchor = static_cast<int>(i);
        ++multiplicity;
      }
    }

    VectorXd next;
    if (anchor < 0) {
      double wsum = 0.0;
      VectorXd acc = VectorXd::Zero(dim);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (points[i] - mu).norm();
        const double w = 1.0 / d;
        wsum += w;
        acc += w * points[i];
      }
      next = acc / wsum;
    } else {
      // Vardi-Zhang step at an anchor point.
      VectorXd r_vec = VectorXd::Zero(dim);
      double wsum = 0.0;
      VectorXd acc = VectorXd::Zero(dim);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (points[i] - mu).norm();
        if (d <= kAnchorEps) continue;
        r_vec += (points[i] - mu) / d;
        wsum += 1.0 / d;
        acc += points[i] / d;
      }
      const double r_norm = r_vec.norm();
      if (r_norm <= static_cast<double>(multiplicity) || wsum == 0.0) {
        return mu;  // the anchor is the median
      }
      const VectorXd t = acc / wsum;
      const double eta = static_cast<double>(multiplicity) / r_norm;
      next = (1.0 - eta) * t + eta * mu;
    }

    const double shift = (next - mu).norm();
    mu = next;
    if (shift < tol) break;
  }
  return mu;
}

double class_scale(const std::vector<VectorXd>& points, const VectorXd& mu) {
  if (points.empty()) throw_config("class_scale of empty set");
  return mean_distance_to(points, mu);
}

MatrixXd robust_covariance(const std::vector<VectorXd>& points, const VectorXd& mu,
                           double trim) {
  const Eigen::Index dim = mu.size();
  const std::size_t n = points.size();

  std::vector<std::pair<double, std::size_t>> by_dist(n);
  for (std::size_t i = 0; i < n; ++i) by_dist[i] = {(points[i] - mu).norm(), i};
  std::sort(by_dist.begin(), by_dist.end());
  const std::size_t keep = std::min(
      n, std::max(static_cast<std::size_t>(std::ceil(trim * static_cast<double>(n))),
                  std::min(n, static_cast<std::size_t>(dim) + 1)));

  MatrixXd sigma = MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < keep; ++i) {
    const VectorXd c = points[by_dist[i].second] - mu;
    sigma += c * c.transpose();
  }
  sigma /= static_cast<double>(keep);
  const double loading = 1e-6 * sigma.trace() / static_cast<double>(dim);
  sigma += loading * MatrixXd::Identity(dim, dim);
  return sigma;
}

ClassStats compute_class_stats(const std::vector<VectorXd>& points,
                               const RetentionPolicy& policy) {
  if (points.empty()) throw_config("compute_class_stats of empty queue");
  ClassStats stats;
  stats.queue_size = static_cast<int>(points.size());
  stats.mu = geometric_median(points);
  stats.s = class_scale(points, stats.mu);
  if (points.size() >= 2) {
    const int k = std::min(policy.k_density, static_cast<int>(points.size()) - 1);
    stats.rho = local_density(points, k, policy.rho_cap);
  } else {
    stats.rho = policy.rho_cap;
  }
  stats.rho_comp = stats.rho * stats.s;
  stats.sigma = robust_covariance(points, stats.mu, policy.cov_trim);
  return stats;
}

std::vector<double> retention_ratios(const std::vector<ClassStats>& stats,
                                     const RetentionPolicy& policy) {
  if (stats.empty()) throw_config("retention_ratios with no classes");
  const std::size_t n = stats.size();
  double rho_min = stats[0].rho_comp, rho_max = stats[0].rho_comp;
  double l_min = stats[0].queue_size, l_max = stats[0].queue_size;
  for (const auto& st : stats) {
    rho_min = std::min(rho_min, st.rho_comp);
    rho_max = std::max(rho_max, st.rho_comp);
    l_min = std::min(l_min, static_cast<double>(st.queue_size));
    l_max = std::max(l_max, static_cast<double>(st.queue_size));
  }
  std::vector<double> ratios(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rho_hat =
        rho_max > rho_min ? (stats[i].rho_comp - rho_min) / (rho_max - rho_min) : 1.0;
    const double l_hat =
        l_max > l_min ? (static_cast<double>(stats[i].queue_size) - l_min) / (l_max - l_min) : 1.0;
    double r = policy.keep_min + (policy.lambda * rho_hat + (1.0 - policy.lambda) * l_hat) *
                                     (policy.keep_max - policy.keep_min);
    r = std::clamp(r, policy.keep_min, policy.keep_max);
    ratios[i] = r;
  }
  return ratios;
}

CoreSubset core_subset(const std::vector<VectorXd>& points, const VectorXd& mu,
                       const MatrixXd& sigma, double r, const RetentionPolicy& policy) {
  if (points.empty()) throw_config("core_subset of empty queue");
  const std::size_t n = points.size();
  const std::size_t keep = std::min(
      n, static_cast<std::size_t>(std::max<long>(
             policy.min_keep, static_cast<long>(std::floor(r * static_cast<double>(n))))));

  CoreSubset result;
  Eigen::LLT<MatrixXd> llt(sigma);
  result.euclidean_fallback = llt.info() != Eigen::Success;
  if (result.euclidean_fallback) {
    std::cerr << "warning: covariance not positive-definite; ranking by Euclidean distance\n";
  }

  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const VectorXd c = points[i] - mu;
    const double d = result.euclidean_fallback
                         ? c.norm()
                         : std::sqrt(c.dot(llt.solve(c)));
    dist[i] = {d, i};
  }
  std::sort(dist.begin(), dist.end());
  result.tau = dist[keep - 1].first;
  result.kept_indices.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) result.kept_indices.push_back(dist[i].second);
  std::sort(result.kept_indices.begin(), result.kept_indices.end());
  return result;
}

std::vector<CorrectionRecord> correct(DynamicMemory& memory, const RetentionPolicy& policy) {
  const int n = memory.minority_count();
  std::vector<CorrectionRecord> records;
  if (n == 0) return records;

  std::vector<std::vector<VectorXd>> features(static_cast<std::size_t>(n));
  std::vector<ClassStats> stats;
  stats.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const auto& items = memory.minority(i).items();
    if (items.empty()) throw_config("correct: minority queue " + std::to_string(i) + " is empty");
    auto& pts = features[static_cast<std::size_t>(i - 1)];
    pts.reserve(items.size());
    for (const auto& item : items) pts.push_back(item.features);
    stats.push_back(compute_class_stats(pts, policy));
  }
  const std::vector<double> ratios = retention_ratios(stats, policy);

  for (int i = 1; i <= n; ++i) {
    const auto& pts = features[static_cast<std::size_t>(i - 1)];
    const ClassStats& st = stats[static_cast<std::size_t>(i - 1)];
    const CoreSubset subset = core_subset(pts, st.mu, st.sigma, ratios[static_cast<std::size_t>(i - 1)], policy);

    ClassQueue& queue = memory.minority_mut(i);
    std::vector<StoredInstance> kept;
    kept.reserve(subset.kept_indices.size());
    std::vector<VectorXd> kept_features;
    kept_features.reserve(subset.kept_indices.size());
    for (std::size_t idx : subset.kept_indices) {
      kept.push_back(queue.items()[idx]);
      kept_features.push_back(pts[idx]);
    }

    CorrectionRecord rec;
    rec.class_index = i;
    rec.rho = st.rho;
    rec.s = st.s;
    rec.rho_comp = st.rho_comp;
    rec.r = ratios[static_cast<std::size_t>(i - 1)];
    rec.kept = static_cast<int>(kept.size());
    rec.tau = subset.tau;
    {
      VectorXd centroid = VectorXd::Zero(pts[0].size());
      for (const auto& p : pts) centroid += p;
      centroid /= static_cast<double>(pts.size());
      rec.mdc_before = mean_distance_to(pts, centroid);
      VectorXd centroid_after = VectorXd::Zero(pts[0].size());
      for (const auto& p : kept_features) centroid_after += p;
      centroid_after /= static_cast<double>(kept_features.size());
      rec.mdc_after = mean_distance_to(kept_features, centroid_after);
    }
    records.push_back(rec);

    queue.replace_items(std::move(kept));
  }
  return records;
}

}  // namespace scil
