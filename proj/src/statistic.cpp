#include "drift/statistic.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "drift/rng.hpp"

namespace drift {

namespace {

void check_feature(int k, int dim) {
  if (k < 0 || k >= dim)
    fail(ErrorKind::dimension, "statistic: feature index outside [0, dim)");
}

void check_plan(const SubsetPlan& plan, int dim) {
  if (plan.dim != dim)
    fail(ErrorKind::dimension, "statistic: plan dimension does not match the data");
  if (static_cast<int>(plan.per_feature.size()) != dim)
    fail(ErrorKind::protocol, "statistic: malformed subset plan");
}

}  // namespace

bool SubsetPlan::exhaustive() const {
  return budget == 0 || (dim - 1 < 63 && (1ULL << (dim - 1)) <= static_cast<std::uint64_t>(budget));
}

SubsetPlan build_subset_plan(int dim, int budget, std::uint64_t seed) {
  if (dim < 1 || dim > FeatureSubset::max_dim)
    fail(ErrorKind::dimension, "build_subset_plan: dim must lie in [1, 64]");
  if (budget < 0) fail(ErrorKind::config, "config key \"subset_budget\": must be >= 0");

  SubsetPlan plan;
  plan.dim = dim;
  plan.budget = budget;
  plan.seed = seed;
  plan.per_feature.resize(static_cast<std::size_t>(dim));

  const bool exhaustive = plan.exhaustive();
  for (int k = 0; k < dim; ++k) {
    auto& row = plan.per_feature[static_cast<std::size_t>(k)];
    const std::uint64_t comp = FeatureSubset::all(dim).without(k).bits();
    if (exhaustive) {
      // submask walk emits subsets of comp in ascending bit order, starting
      // with the empty set and ending with comp itself
      std::uint64_t sub = 0;
      while (true) {
        row.push_back(FeatureSubset::from_bits(sub));
        if (sub == comp) break;
        sub = (sub - comp) & comp;
      }
      continue;
    }

    row.push_back(FeatureSubset::none());
    if (comp != 0) row.push_back(FeatureSubset::from_bits(comp));
    std::unordered_set<std::uint64_t> seen{0ULL, comp};

    const int pool = dim - 1;
    if (pool < 2 || budget <= 2) continue;
    std::vector<int> candidates;
    candidates.reserve(static_cast<std::size_t>(pool));
    for (int j = 0; j < dim; ++j)
      if (j != k) candidates.push_back(j);

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    for (int draw = 0; draw < budget - 2; ++draw) {
      const int size = static_cast<int>(rng.uniform_int(1, dim - 2));
      // partial Fisher-Yates: first `size` entries form a uniform subset
      for (int i = 0; i < size; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(pool - i)));
        std::swap(candidates[static_cast<std::size_t>(i)], candidates[static_cast<std::size_t>(j)]);
      }
      std::uint64_t bits = 0;
      for (int i = 0; i < size; ++i) bits |= 1ULL << candidates[static_cast<std::size_t>(i)];
      if (seen.insert(bits).second) row.push_back(FeatureSubset::from_bits(bits));
    }
  }
  return plan;
}

double delta_term(const TrainedModel& model, const SampleWindow& dp, const SampleWindow& dq,
                  FeatureSubset s, int k, LossKind kind) {
  check_feature(k, model.input_dim());
  if (s.contains(k))
    fail(ErrorKind::protocol, "delta_term: subset must not contain the probed feature");
  const FeatureSubset sk = s.with(k);
  const double rp_s = subset_risk(model, dp, s, kind);
  const double rp_sk = subset_risk(model, dp, sk, kind);
  const double rq_s = subset_risk(model, dq, s, kind);
  const double rq_sk = subset_risk(model, dq, sk, kind);
  return (rp_s - rp_sk) - (rq_s - rq_sk);
}

DStat d_hat(const TrainedModel& model, const SampleWindow& dp, const SampleWindow& dq, int k,
            const SubsetPlan& plan, LossKind kind) {
  check_feature(k, model.input_dim());
  check_plan(plan, model.input_dim());
  if (dp.empty() || dq.empty()) fail(ErrorKind::insufficient_data, "d_hat: empty window");

  // memoise risks per window so repeated masks cost one model pass each;
  // values come from the same subset_risk call an oracle would make
  std::unordered_map<std::uint64_t, double> rp, rq;
  const auto risk_p = [&](FeatureSubset s) {
    auto it = rp.find(s.bits());
    if (it != rp.end()) return it->second;
    const double v = subset_risk(model, dp, s, kind);
    rp.emplace(s.bits(), v);
    return v;
  };
  const auto risk_q = [&](FeatureSubset s) {
    auto it = rq.find(s.bits());
    if (it != rq.end()) return it->second;
    const double v = subset_risk(model, dq, s, kind);
    rq.emplace(s.bits(), v);
    return v;
  };

  DStat best;
  bool first = true;
  for (FeatureSubset s : plan.per_feature[static_cast<std::size_t>(k)]) {
    const FeatureSubset sk = s.with(k);
    const double v = (risk_p(s) - risk_p(sk)) - (risk_q(s) - risk_q(sk));
    const double mag = std::fabs(v);
    if (first || mag > best.value) {
      best.value = mag;
      best.witness = s;
      first = false;
    }
  }
  return best;
}

double test_statistic(const TrainedModel& model, const SampleWindow& dp, const SampleWindow& dq,
                      int k, const SubsetPlan& plan, LossKind kind) {
  if (dp.size() != dq.size())
    fail(ErrorKind::protocol, "test_statistic: windows must have equal length");
  if (dp.empty()) fail(ErrorKind::insufficient_data, "test_statistic: empty windows");
  return static_cast<double>(dp.size()) * d_hat(model, dp, dq, k, plan, kind).value;
}

PooledLossTable::PooledLossTable(const TrainedModel& model,
                                 std::span<const LabeledSample> pooled, const SubsetPlan& plan,
                                 LossKind kind) {
  check_plan(plan, model.input_dim());
  if (pooled.empty()) fail(ErrorKind::insufficient_data, "PooledLossTable: empty pool");
  dim_ = model.input_dim();
  count_ = static_cast<std::int64_t>(pooled.size());

  // collect every mask the plan can touch, in first-encounter order
  std::vector<std::uint64_t> masks;
  for (int k = 0; k < plan.dim; ++k) {
    for (FeatureSubset s : plan.per_feature[static_cast<std::size_t>(k)]) {
      for (std::uint64_t bits : {s.bits(), s.with(k).bits()}) {
        if (ids_.emplace(bits, masks.size()).second) masks.push_back(bits);
      }
    }
  }

  for (const LabeledSample& sample : pooled) {
    if (static_cast<int>(sample.features.size()) != dim_)
      fail(ErrorKind::dimension, "PooledLossTable: sample width does not match the model");
  }
  if (model.task().is_classification() != (kind == LossKind::zero_one))
    fail(ErrorKind::protocol, "PooledLossTable: loss kind does not match the task");

  // per-sample losses; summing a range of a column in order reproduces the
  // accumulation subset_risk performs on that range
  losses_.resize(masks.size());
  std::vector<double> masked(static_cast<std::size_t>(dim_));
  std::vector<double> out, scratch;
  for (std::size_t m = 0; m < masks.size(); ++m) {
    auto& col = losses_[m];
    col.resize(pooled.size());
    const FeatureSubset s = FeatureSubset::from_bits(masks[m]);
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      const LabeledSample& sample = pooled[i];
      for (int j = 0; j < dim_; ++j)
        masked[static_cast<std::size_t>(j)] =
            s.contains(j) ? sample.features[static_cast<std::size_t>(j)] : 0.0;
      model.forward_scores(masked, out, scratch);
      const double prediction = model.task().is_classification()
                                    ? static_cast<double>(TrainedModel::argmax_lowest(out))
                                    : out[0];
      col[i] = loss(kind, prediction, sample.target);
    }
  }
}

const std::vector<double>& PooledLossTable::column(FeatureSubset s) const {
  const auto it = ids_.find(s.bits());
  if (it == ids_.end())
    fail(ErrorKind::protocol, "PooledLossTable: subset missing from the plan");
  return losses_[it->second];
}

double PooledLossTable::risk(FeatureSubset s, std::span<const std::int64_t> idx) const {
  if (idx.empty()) fail(ErrorKind::insufficient_data, "PooledLossTable::risk: empty index set");
  const auto& col = column(s);
  double total = 0.0;
  for (const std::int64_t i : idx) total += col[static_cast<std::size_t>(i)];
  return total / static_cast<double>(idx.size());
}

DStat PooledLossTable::split_stat(int k, const SubsetPlan& plan,
                                  std::span<const std::int64_t> left,
                                  std::span<const std::int64_t> right) const {
  check_feature(k, dim_);
  DStat best;
  bool first = true;
  for (FeatureSubset s : plan.per_feature[static_cast<std::size_t>(k)]) {
    const FeatureSubset sk = s.with(k);
    const double rp_s = risk(s, left);
    const double rp_sk = risk(sk, left);
    const double rq_s = risk(s, right);
    const double rq_sk = risk(sk, right);
    const double v = (rp_s - rp_sk) - (rq_s - rq_sk);
    const double mag = std::fabs(v);
    if (first || mag > best.value) {
      best.value = mag;
      best.witness = s;
      first = false;
    }
  }
  return best;
}

}  // namespace drift
