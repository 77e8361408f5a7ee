#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drift/statistic.hpp"

namespace drift {

// Per-feature rejection thresholds calibrated on the pooled window pair.
struct ThresholdSet {
  std::vector<double> thresholds;
  double alpha = 0.0;
  int replicates = 0;
  std::uint64_t seed = 0;
};

// 0-based position of the empirical q-quantile among k ascending values:
// ceil(q*k) - 1, clamped to [0, k-1].
int quantile_index(double q, int k);

// Per-feature (1 - alpha/dim) empirical quantiles of replicate statistics.
// stats is replicate-major: stats[rep * dim + feature].
std::vector<double> thresholds_from_replicates(std::span<const double> stats, int dim,
                                               double alpha);

// Merges zr and zn, then draws k_replicates without-replacement splits into
// two pseudo-windows of the original size. Each replicate evaluates the test
// statistic for every feature under the shared plan; the per-feature
// threshold is the (1 - alpha/dim) empirical quantile of its replicate
// values (Bonferroni across features). Replicate i draws from a child seed
// derived from (seed, i), so results are independent of evaluation order.
ThresholdSet bootstrap_thresholds(const TrainedModel& model, const SampleWindow& zr,
                                  const SampleWindow& zn, double alpha, int k_replicates,
                                  const SubsetPlan& plan, LossKind kind, std::uint64_t seed);

// Same calibration against a prebuilt pooled table whose first window_count
// entries are zr and the remainder zn. Lets a caller that already evaluated
// the model for the real statistic reuse those losses.
ThresholdSet bootstrap_thresholds_from_table(const PooledLossTable& table,
                                             std::int64_t window_count, double alpha,
                                             int k_replicates, const SubsetPlan& plan,
                                             std::uint64_t seed);

}  // namespace drift
