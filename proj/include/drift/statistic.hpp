#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "drift/model.hpp"

namespace drift {

// Candidate subsets per feature. Row k holds subsets of [0,dim)\{k}; the
// empty set and the full complement are always present. With budget 0, or
// when 2^(dim-1) fits inside the budget, rows enumerate every subset.
// Sampled rows draw a size uniformly from {1..dim-2}, then a subset of that
// size uniformly, and deduplicate; rows are deterministic in the seed.
struct SubsetPlan {
  int dim = 0;
  int budget = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<FeatureSubset>> per_feature;

  bool exhaustive() const;
};

SubsetPlan build_subset_plan(int dim, int budget, std::uint64_t seed);

// (R_p^S - R_p^{S+k}) - (R_q^S - R_q^{S+k}) on empirical windows dp, dq.
double delta_term(const TrainedModel& model, const SampleWindow& dp, const SampleWindow& dq,
                  FeatureSubset s, int k, LossKind kind);

struct DStat {
  double value = 0.0;       // max |delta_term| across the plan row
  FeatureSubset witness;    // earliest subset attaining the max
};

DStat d_hat(const TrainedModel& model, const SampleWindow& dp, const SampleWindow& dq, int k,
            const SubsetPlan& plan, LossKind kind);

// n~ * d_hat value; dp and dq must have equal positive length n~.
double test_statistic(const TrainedModel& model, const SampleWindow& dp, const SampleWindow& dq,
                      int k, const SubsetPlan& plan, LossKind kind);

// Per-sample losses over one pooled sample block for every subset the plan
// can reference. The real split and each bootstrap replicate then reduce to
// index sums over the same loss values, so the model runs once per subset.
// Summing a contiguous index range in order reproduces subset_risk on that
// window bit for bit.
class PooledLossTable {
 public:
  PooledLossTable(const TrainedModel& model, std::span<const LabeledSample> pooled,
                  const SubsetPlan& plan, LossKind kind);

  int dim() const { return dim_; }
  std::int64_t size() const { return count_; }

  // mean loss over pooled[idx[0]], ..., pooled[idx[count-1]] under subset s
  double risk(FeatureSubset s, std::span<const std::int64_t> idx) const;

  // d statistic for feature k when the pool is split into left/right windows
  DStat split_stat(int k, const SubsetPlan& plan, std::span<const std::int64_t> left,
                   std::span<const std::int64_t> right) const;

 private:
  const std::vector<double>& column(FeatureSubset s) const;

  int dim_ = 0;
  std::int64_t count_ = 0;
  std::unordered_map<std::uint64_t, std::size_t> ids_;
  std::vector<std::vector<double>> losses_;
};

}  // namespace drift
