#include "drift/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drift/rng.hpp"

namespace drift {

int quantile_index(double q, int k) {
  if (k < 1) fail(ErrorKind::config, "config key \"K\": must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) fail(ErrorKind::config, "quantile_index: q must lie in [0, 1]");
  const int idx = static_cast<int>(std::ceil(q * static_cast<double>(k))) - 1;
  return std::clamp(idx, 0, k - 1);
}

std::vector<double> thresholds_from_replicates(std::span<const double> stats, int dim,
                                               double alpha) {
  if (dim < 1) fail(ErrorKind::dimension, "thresholds_from_replicates: dim must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorKind::config, "config key \"alpha\": must lie in (0, 1)");
  if (stats.empty() || stats.size() % static_cast<std::size_t>(dim) != 0)
    fail(ErrorKind::protocol,
         "thresholds_from_replicates: stats must hold whole replicates of dim values");

  const int k_replicates = static_cast<int>(stats.size() / static_cast<std::size_t>(dim));
  const double q = 1.0 - alpha / static_cast<double>(dim);
  const int idx = quantile_index(q, k_replicates);

  std::vector<double> thresholds(static_cast<std::size_t>(dim));
  std::vector<double> column(static_cast<std::size_t>(k_replicates));
  for (int k = 0; k < dim; ++k) {
    for (int rep = 0; rep < k_replicates; ++rep)
      column[static_cast<std::size_t>(rep)] =
          stats[static_cast<std::size_t>(rep) * static_cast<std::size_t>(dim) +
                static_cast<std::size_t>(k)];
    std::sort(column.begin(), column.end());
    thresholds[static_cast<std::size_t>(k)] = column[static_cast<std::size_t>(idx)];
  }
  return thresholds;
}

ThresholdSet bootstrap_thresholds_from_table(const PooledLossTable& table,
                                             std::int64_t window_count, double alpha,
                                             int k_replicates, const SubsetPlan& plan,
                                             std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorKind::config, "config key \"alpha\": must lie in (0, 1)");
  if (k_replicates < 1) fail(ErrorKind::config, "config key \"K\": must be >= 1");
  if (window_count < 1 || table.size() != 2 * window_count)
    fail(ErrorKind::protocol, "bootstrap: pool must hold two windows of equal length");

  const int dim = plan.dim;
  const std::int64_t pool = table.size();
  const double multiplier = static_cast<double>(window_count);

  // replicate-major statistics; each replicate owns a disjoint slot so the
  // parallel fill cannot race and the result never depends on thread count
  std::vector<double> stats(static_cast<std::size_t>(k_replicates) * dim, 0.0);
  parallel_for(k_replicates, [&](std::int64_t rep) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
    std::vector<std::int64_t> perm(static_cast<std::size_t>(pool));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const std::span<const std::int64_t> left(perm.data(), static_cast<std::size_t>(window_count));
    const std::span<const std::int64_t> right(perm.data() + window_count,
                                              static_cast<std::size_t>(window_count));
    for (int k = 0; k < dim; ++k) {
      stats[static_cast<std::size_t>(rep) * dim + static_cast<std::size_t>(k)] =
          multiplier * table.split_stat(k, plan, left, right).value;
    }
  });

  ThresholdSet out;
  out.alpha = alpha;
  out.replicates = k_replicates;
  out.seed = seed;
  out.thresholds = thresholds_from_replicates(stats, dim, alpha);
  return out;
}

ThresholdSet bootstrap_thresholds(const TrainedModel& model, const SampleWindow& zr,
                                  const SampleWindow& zn, double alpha, int k_replicates,
                                  const SubsetPlan& plan, LossKind kind, std::uint64_t seed) {
  if (zr.empty() || zn.empty())
    fail(ErrorKind::insufficient_data, "bootstrap_thresholds: empty window");
  if (zr.size() != zn.size())
    fail(ErrorKind::protocol, "bootstrap_thresholds: windows must have equal length");
  if (zr.dim() != zn.dim())
    fail(ErrorKind::dimension, "bootstrap_thresholds: window widths differ");

  std::vector<LabeledSample> pooled;
  pooled.reserve(static_cast<std::size_t>(zr.size() + zn.size()));
  pooled.insert(pooled.end(), zr.begin(), zr.end());
  pooled.insert(pooled.end(), zn.begin(), zn.end());
  const PooledLossTable table(model, pooled, plan, kind);
  return bootstrap_thresholds_from_table(table, zr.size(), alpha, k_replicates, plan, seed);
}

}  // namespace drift
