#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "scil/corrector.hpp"
#include "scil/errors.hpp"
#include "scil/evaluation.hpp"
#include "scil/rng.hpp"

using namespace scil;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec1(double a) {
  VectorXd v(1);
  v << a;
  return v;
}

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

double sum_of_distances(const std::vector<VectorXd>& pts, const VectorXd& m) {
  double total = 0.0;
  for (const auto& p : pts) total += (p - m).norm();
  return total;
}

// Two-stage grid search: coarse pass over the bounding box, then a fine
// pass around the coarse minimizer. Resolves the argmin to ~1e-4.
VectorXd grid_median(const std::vector<VectorXd>& pts) {
  const Eigen::Index dim = pts[0].size();
  VectorXd lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  VectorXd best = pts[0];
  double best_val = sum_of_distances(pts, best);
  auto scan = [&](const VectorXd& a, const VectorXd& b, int steps) {
    if (dim == 1) {
      for (int i = 0; i <= steps; ++i) {
        VectorXd m = vec1(a(0) + (b(0) - a(0)) * i / steps);
        const double v = sum_of_distances(pts, m);
        if (v < best_val) {
          best_val = v;
          best = m;
        }
      }
    } else {
      for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
          VectorXd m = vec2(a(0) + (b(0) - a(0)) * i / steps, a(1) + (b(1) - a(1)) * j / steps);
          const double v = sum_of_distances(pts, m);
          if (v < best_val) {
            best_val = v;
            best = m;
          }
        }
      }
    }
  };
  scan(lo, hi, dim == 1 ? 10000 : 400);
  const double pad = dim == 1 ? (hi(0) - lo(0)) / 10000.0 : (hi - lo).maxCoeff() / 400.0;
  const VectorXd flo = best.array() - 2.0 * pad;
  const VectorXd fhi = best.array() + 2.0 * pad;
  scan(flo, fhi, 400);
  return best;
}

}  // namespace

TEST_CASE("local density hand cases") {
  std::vector<VectorXd> pts = {vec1(0.0), vec1(1.0), vec1(2.0)};
  CHECK(local_density(pts, 1) == doctest::Approx(1.0));

  // Scaling every point by c scales the density by 1/c.
  std::vector<VectorXd> scaled;
  for (const auto& p : pts) scaled.push_back(3.0 * p);
  CHECK(local_density(scaled, 1) == doctest::Approx(1.0 / 3.0));

  // Duplicated cloud: nearest-neighbor distances collapse to zero.
  std::vector<VectorXd> dup = {vec1(0.0), vec1(0.0), vec1(1.0), vec1(1.0)};
  CHECK(local_density(dup, 1, 1e6) == doctest::Approx(1e6));

  CHECK_THROWS_AS(local_density({vec1(0.0)}, 1), Error);
  CHECK_THROWS_AS(local_density(pts, 3), Error);
}

TEST_CASE("geometric median basics") {
  CHECK((geometric_median({vec2(3.0, 4.0)}) - vec2(3.0, 4.0)).norm() == 0.0);

  std::vector<VectorXd> corners = {vec2(-1, -1), vec2(-1, 1), vec2(1, -1), vec2(1, 1)};
  CHECK(geometric_median(corners).norm() < 1e-6);

  // In one dimension the geometric median is the coordinate median.
  std::vector<VectorXd> line = {vec1(0.0), vec1(1.0), vec1(10.0)};
  CHECK(std::abs(geometric_median(line)(0) - 1.0) < 1e-3);
}

TEST_CASE("weiszfeld matches a brute-force grid minimizer") {
  // The argmin is only unique for odd 1-D sets and non-collinear 2-D
  // sets; an even 1-D set minimizes anywhere between its middle pair.
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + static_cast<int>(rng.uniform_int(2));
    const int count = dim == 1 ? 3 + 2 * static_cast<int>(rng.uniform_int(4))
                               : 3 + static_cast<int>(rng.uniform_int(8));
    std::vector<VectorXd> pts;
    for (int i = 0; i < count; ++i) {
      VectorXd p(dim);
      for (int d = 0; d < dim; ++d) p(d) = rng.uniform(-1.0, 1.0);
      pts.push_back(p);
    }
    const VectorXd mu = geometric_median(pts);
    const VectorXd brute = grid_median(pts);
    CHECK(sum_of_distances(pts, mu) <= sum_of_distances(pts, brute) + 1e-3);
    CHECK((mu - brute).norm() < 1e-3);
  }
}

TEST_CASE("geometric median is a local minimum under random perturbations") {
  Rng rng(22);
  std::vector<VectorXd> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(vec2(rng.uniform(), rng.uniform()));
  const VectorXd mu = geometric_median(pts);
  const double at_mu = sum_of_distances(pts, mu);
  for (int trial = 0; trial < 1000; ++trial) {
    VectorXd delta(2);
    delta << rng.normal(), rng.normal();
    delta.normalize();
    CHECK(at_mu <= sum_of_distances(pts, mu + 1e-3 * delta) + 1e-9);
  }
}

TEST_CASE("anchored iterate does not stall on a data point") {
  // Coordinate-wise median of this set IS a data point; the anchored
  // step must still reach the optimum region.
  std::vector<VectorXd> pts = {vec2(0, 0), vec2(1, 0), vec2(0, 1), vec2(-1, 0), vec2(0, -1)};
  const VectorXd mu = geometric_median(pts);
  CHECK(mu.norm() < 1e-9);  // the center point is the true median here

  std::vector<VectorXd> pts2 = {vec1(0.0), vec1(0.0), vec1(5.0)};
  CHECK(std::abs(geometric_median(pts2)(0)) < 1e-9);
}

TEST_CASE("class scale hand cases") {
  std::vector<VectorXd> pts = {vec1(0.0), vec1(2.0)};
  CHECK(class_scale(pts, vec1(1.0)) == doctest::Approx(1.0));
  CHECK(class_scale({vec1(0.5), vec1(0.5)}, vec1(0.5)) == doctest::Approx(0.0));

  std::vector<VectorXd> scaled = {vec1(0.0), vec1(6.0)};
  CHECK(class_scale(scaled, vec1(3.0)) == doctest::Approx(3.0));  // homogeneity
}

TEST_CASE("retention ratio formula") {
  RetentionPolicy policy;
  policy.keep_min = 0.5;
  policy.keep_max = 0.9;
  policy.lambda = 0.5;

  // Hand case: normalized density and size both 0.5 -> r = 0.7.
  ClassStats lo_stats, mid_stats, hi_stats;
  lo_stats.rho_comp = 0.0;
  lo_stats.queue_size = 10;
  mid_stats.rho_comp = 0.5;
  mid_stats.queue_size = 20;
  hi_stats.rho_comp = 1.0;
  hi_stats.queue_size = 30;
  const auto ratios = retention_ratios({lo_stats, mid_stats, hi_stats}, policy);
  CHECK(ratios[0] == doctest::Approx(0.5));  // both normalized to 0
  CHECK(ratios[1] == doctest::Approx(0.7));
  CHECK(ratios[2] == doctest::Approx(0.9));  // both normalized to 1

  // Single class: degenerate normalization defaults to keep_max.
  const auto single = retention_ratios({mid_stats}, policy);
  CHECK(single[0] == doctest::Approx(0.9));
}

TEST_CASE("retention ratios are permutation-equivariant") {
  RetentionPolicy policy;
  Rng rng(31);
  std::vector<ClassStats> stats(4);
  for (auto& st : stats) {
    st.rho_comp = rng.uniform(0.1, 5.0);
    st.queue_size = 5 + static_cast<int>(rng.uniform_int(26));
  }
  const auto base = retention_ratios(stats, policy);
  std::vector<ClassStats> rotated = {stats[2], stats[0], stats[3], stats[1]};
  const auto perm = retention_ratios(rotated, policy);
  CHECK(perm[0] == doctest::Approx(base[2]));
  CHECK(perm[1] == doctest::Approx(base[0]));
  CHECK(perm[2] == doctest::Approx(base[3]));
  CHECK(perm[3] == doctest::Approx(base[1]));
}

TEST_CASE("core subset with identity covariance ranks by euclidean distance") {
  RetentionPolicy policy;
  policy.min_keep = 2;
  std::vector<VectorXd> pts;
  Rng rng(32);
  for (int i = 0; i < 10; ++i) pts.push_back(vec2(rng.uniform(), rng.uniform()));
  const VectorXd mu = vec2(0.5, 0.5);
  const MatrixXd sigma = MatrixXd::Identity(2, 2);
  const CoreSubset subset = core_subset(pts, mu, sigma, 0.5, policy);
  CHECK(subset.kept_indices.size() == 5);

  std::vector<std::pair<double, std::size_t>> byDist;
  for (std::size_t i = 0; i < pts.size(); ++i) byDist.emplace_back((pts[i] - mu).norm(), i);
  std::sort(byDist.begin(), byDist.end());
  std::vector<std::size_t> expect;
  for (int i = 0; i < 5; ++i) expect.push_back(byDist[static_cast<std::size_t>(i)].second);
  std::sort(expect.begin(), expect.end());
  CHECK(subset.kept_indices == expect);
  for (std::size_t idx : subset.kept_indices) {
    CHECK((pts[idx] - mu).norm() <= subset.tau + 1e-12);
  }
}

TEST_CASE("core subset sizes follow the exact formula") {
  RetentionPolicy policy;
  policy.min_keep = 5;
  Rng rng(33);
  for (int n : {3, 6, 12, 30}) {
    std::vector<VectorXd> pts;
    for (int i = 0; i < n; ++i) pts.push_back(vec2(rng.uniform(), rng.uniform()));
    const VectorXd mu = geometric_median(pts);
    const MatrixXd sigma = robust_covariance(pts, mu);
    for (double r : {0.1, 0.5, 0.9, 1.0}) {
      const CoreSubset subset = core_subset(pts, mu, sigma, r, policy);
      const std::size_t expect = std::min<std::size_t>(
          static_cast<std::size_t>(n),
          static_cast<std::size_t>(std::max(5, static_cast<int>(std::floor(r * n)))));
      CHECK(subset.kept_indices.size() == expect);
    }
    // r = 1 keeps the full queue.
    CHECK(core_subset(pts, mu, sigma, 1.0, policy).kept_indices.size() ==
          static_cast<std::size_t>(n));
  }
}

TEST_CASE("a planted far outlier is always dropped") {
  RetentionPolicy policy;
  Rng rng(34);
  std::vector<VectorXd> pts;
  for (int i = 0; i < 29; ++i) pts.push_back(vec2(0.5 + 0.01 * rng.normal(), 0.5 + 0.01 * rng.normal()));
  pts.push_back(vec2(1.5, 1.5));  // ~100 sigma away
  const std::size_t outlier_index = 29;

  const VectorXd mu = geometric_median(pts);
  const MatrixXd sigma = robust_covariance(pts, mu);
  const CoreSubset subset = core_subset(pts, mu, sigma, 0.9, policy);
  CHECK(subset.kept_indices.size() == 27);
  CHECK(std::find(subset.kept_indices.begin(), subset.kept_indices.end(), outlier_index) ==
        subset.kept_indices.end());
}

TEST_CASE("five planted contaminants are fully dropped when r forces five drops") {
  RetentionPolicy policy;
  Rng rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<VectorXd> pts;
    for (int i = 0; i < 25; ++i) {
      pts.push_back(vec2(0.5 + 0.01 * rng.normal(), 0.5 + 0.01 * rng.normal()));
    }
    // Contaminants at >= 10 sigma in a random direction.
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    for (int i = 0; i < 5; ++i) {
      const double d = rng.uniform(0.15, 0.6);
      pts.push_back(vec2(0.5 + d * std::cos(angle) + 0.01 * rng.normal(),
                         0.5 + d * std::sin(angle) + 0.01 * rng.normal()));
    }
    const VectorXd mu = geometric_median(pts);
    const MatrixXd sigma = robust_covariance(pts, mu, policy.cov_trim);
    const CoreSubset subset = core_subset(pts, mu, sigma, 25.0 / 30.0, policy);
    CHECK(subset.kept_indices.size() == 25);
    for (std::size_t idx : subset.kept_indices) CHECK(idx < 25);
  }
}

TEST_CASE("degenerate covariance falls back to euclidean ranking") {
  RetentionPolicy policy;
  policy.min_keep = 1;
  std::vector<VectorXd> pts = {vec2(0.5, 0.5), vec2(0.5, 0.5), vec2(0.5, 0.5), vec2(0.9, 0.9)};
  const VectorXd mu = vec2(0.5, 0.5);
  MatrixXd sigma = MatrixXd::Zero(2, 2);
  const CoreSubset subset = core_subset(pts, mu, sigma, 0.75, policy);
  CHECK(subset.euclidean_fallback);
  CHECK(subset.kept_indices.size() == 3);
  CHECK(std::find(subset.kept_indices.begin(), subset.kept_indices.end(), 3u) ==
        subset.kept_indices.end());
}

TEST_CASE("correct purifies planted contamination and only shrinks queues") {
  RetentionPolicy policy;
  DynamicMemory memory(100, 30, 2);
  Rng rng(35);
  // Class 1: tight cluster. Class 2: tight cluster plus 5 planted
  // contaminants from far away.
  for (int i = 0; i < 30; ++i) {
    memory.append(1, {vec2(0.2 + 0.005 * rng.normal(), 0.2 + 0.005 * rng.normal()), i, 1});
  }
  for (int i = 0; i < 25; ++i) {
    memory.append(2, {vec2(0.8 + 0.005 * rng.normal(), 0.8 + 0.005 * rng.normal()), i, 2});
  }
  for (int i = 0; i < 5; ++i) {
    memory.append(2, {vec2(0.2 + 0.005 * rng.normal(), 0.2 + 0.005 * rng.normal()), 25 + i, 0});
  }

  const std::size_t stored_before = memory.total_stored();
  std::vector<VectorXd> class2_before;
  for (const auto& item : memory.minority(2).items()) class2_before.push_back(item.features);
  VectorXd centroid_before = VectorXd::Zero(2);
  for (const auto& p : class2_before) centroid_before += p;
  centroid_before /= static_cast<double>(class2_before.size());
  const double mdc_before = mdc(class2_before, centroid_before);

  const auto records = correct(memory, policy);
  REQUIRE(records.size() == 2);

  // Majority queue untouched, minority queues only shrank.
  CHECK(memory.total_stored() <= stored_before);
  CHECK(memory.minority(1).size() >= static_cast<std::size_t>(policy.keep_min * 30));

  // Whatever was dropped from class 2 must be contamination, never the
  // genuine cluster.
  int contaminants_left = 0;
  for (const auto& item : memory.minority(2).items()) {
    if (item.true_label == 0) ++contaminants_left;
  }
  CHECK(contaminants_left < 5);

  std::vector<VectorXd> class2_after;
  for (const auto& item : memory.minority(2).items()) class2_after.push_back(item.features);
  VectorXd centroid_after = VectorXd::Zero(2);
  for (const auto& p : class2_after) centroid_after += p;
  centroid_after /= static_cast<double>(class2_after.size());
  CHECK(mdc(class2_after, centroid_after) < mdc_before);
  CHECK(records[1].mdc_after < records[1].mdc_before);

  // Genuine subset in original arrival order.
  long prev = -1;
  for (const auto& item : memory.minority(2).items()) {
    CHECK(item.timestep > prev);
    prev = item.timestep;
  }
}

TEST_CASE("correct requires nonempty minority queues") {
  RetentionPolicy policy;
  DynamicMemory memory(10, 5, 1);
  memory.append(0, {vec2(0.1, 0.1), 0, -1});
  CHECK_THROWS_AS(correct(memory, policy), Error);
}

TEST_CASE("retention bound holds for a lone tight cluster") {
  RetentionPolicy policy;
  DynamicMemory memory(100, 30, 1);
  Rng rng(36);
  for (int i = 0; i < 30; ++i) {
    memory.append(1, {vec2(0.4 + 0.01 * rng.normal(), 0.4 + 0.01 * rng.normal()), i, -1});
  }
  correct(memory, policy);
  CHECK(memory.minority(1).size() >= static_cast<std::size_t>(policy.keep_min * 30));
}
