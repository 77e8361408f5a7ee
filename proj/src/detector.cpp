#include "drift/detector.hpp"

#include <cmath>

#include "drift/rng.hpp"

namespace drift {

namespace {

constexpr std::uint64_t kPlanSalt = 0x706c616eULL;
constexpr std::uint64_t kBootSalt = 0x62747374ULL;
constexpr std::uint64_t kFitSalt = 0x666974ULL;

}  // namespace

std::vector<FeatureTestResult> check_window(const TrainedModel& model, const SampleWindow& zr,
                                            const SampleWindow& zn, const DetectorConfig& config,
                                            const SubsetPlan& plan,
                                            std::optional<std::uint64_t> seed_override) {
  if (zr.empty() || zn.empty()) fail(ErrorKind::insufficient_data, "check_window: empty window");
  if (zr.size() != zn.size())
    fail(ErrorKind::protocol, "check_window: windows must have equal length");
  if (zr.dim() != zn.dim()) fail(ErrorKind::dimension, "check_window: window widths differ");
  if (zr.dim() != model.input_dim())
    fail(ErrorKind::dimension, "check_window: window width does not match the model");

  const LossKind kind = loss_for(config.task);
  const std::uint64_t seed = seed_override.value_or(config.seed);

  std::vector<LabeledSample> pooled;
  pooled.reserve(static_cast<std::size_t>(2 * zr.size()));
  pooled.insert(pooled.end(), zr.begin(), zr.end());
  pooled.insert(pooled.end(), zn.begin(), zn.end());
  const PooledLossTable table(model, pooled, plan, kind);

  // real split: the pool keeps each window contiguous and in order, so these
  // sums equal test_statistic on (zr, zn) exactly
  const std::int64_t count = zr.size();
  std::vector<std::int64_t> identity(static_cast<std::size_t>(2 * count));
  for (std::int64_t i = 0; i < 2 * count; ++i) identity[static_cast<std::size_t>(i)] = i;
  const std::span<const std::int64_t> left(identity.data(), static_cast<std::size_t>(count));
  const std::span<const std::int64_t> right(identity.data() + count,
                                            static_cast<std::size_t>(count));

  const ThresholdSet thresholds = bootstrap_thresholds_from_table(
      table, count, config.alpha, config.bootstrap_k, plan, seed);

  std::vector<FeatureTestResult> results(static_cast<std::size_t>(plan.dim));
  parallel_for(plan.dim, [&](std::int64_t k) {
    const DStat stat = table.split_stat(static_cast<int>(k), plan, left, right);
    FeatureTestResult& r = results[static_cast<std::size_t>(k)];
    r.feature = static_cast<int>(k);
    r.statistic = static_cast<double>(count) * stat.value;
    r.threshold = thresholds.thresholds[static_cast<std::size_t>(k)];
    r.flagged = r.statistic > r.threshold;
    r.witness = stat.witness;
  });
  return results;
}

double performance_metric(const TrainedModel& model, const SampleWindow& window,
                          const TaskKind& task) {
  if (window.empty()) fail(ErrorKind::insufficient_data, "performance_metric: empty window");
  if (window.dim() != model.input_dim())
    fail(ErrorKind::dimension, "performance_metric: window width does not match the model");
  if (task != model.task())
    fail(ErrorKind::protocol, "performance_metric: task does not match the model");

  if (task.is_classification()) {
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < window.size(); ++i) {
      if (model.predict_class(window[i].features) == static_cast<int>(window[i].target)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(window.size());
  }

  double mean = 0.0;
  for (std::int64_t i = 0; i < window.size(); ++i) mean += window[i].target;
  mean /= static_cast<double>(window.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::int64_t i = 0; i < window.size(); ++i) {
    const double y = window[i].target;
    const double e = model.predict_value(window[i].features) - y;
    ss_tot += (y - mean) * (y - mean);
    ss_res += e * e;
  }
  if (ss_tot <= 0.0)
    fail(ErrorKind::data, "performance_metric: zero-variance targets leave R^2 undefined");
  return 1.0 - ss_res / ss_tot;
}

std::vector<LabeledSample> prepare_stream(std::span<const LabeledSample> stream,
                                          const DetectorConfig& config) {
  if (!config.standardize) return {stream.begin(), stream.end()};
  if (static_cast<std::int64_t>(stream.size()) < config.train_count())
    fail(ErrorKind::insufficient_data, "prepare_stream: stream shorter than the training block");
  const Standardizer st = Standardizer::fit(stream, config.train_count());
  return st.apply_all(stream);
}

void validate_stream(std::span<const LabeledSample> stream) {
  const int dim = stream.empty() ? 0 : static_cast<int>(stream.front().features.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const LabeledSample& s = stream[i];
    if (static_cast<int>(s.features.size()) != dim)
      fail(ErrorKind::dimension, "stream: feature widths differ between samples");
    for (const double v : s.features)
      if (!std::isfinite(v)) fail(ErrorKind::data, "stream: non-finite feature value");
    if (!std::isfinite(s.target)) fail(ErrorKind::data, "stream: non-finite target");
  }
}

DetectionTrace run_detector(std::span<const LabeledSample> stream, const DetectorConfig& config,
                            DetectorObserver* observer) {
  config.validate();
  validate_stream(stream);
  const std::int64_t length = static_cast<std::int64_t>(stream.size());
  if (length < 2 * static_cast<std::int64_t>(config.n))
    fail(ErrorKind::insufficient_data, "run_detector: stream must hold at least two windows");

  const int nr = config.train_count();
  const int nw = config.window_count();

  DetectionTrace trace;
  trace.config = config;
  trace.stream_length = length;

  int fits = 0;
  TrainedModel model = fit(SampleWindow::slice(stream, 0, nr), config.model, config.task,
                           derive_seed(derive_seed(config.seed, kFitSalt), static_cast<std::uint64_t>(fits++)));
  SampleWindow reference = SampleWindow::slice(stream, nr, nw);

  std::int64_t cursor = config.n;
  std::int64_t check = 0;
  while (cursor + config.n <= length) {
    const SampleWindow incoming_prefix = SampleWindow::slice(stream, cursor, nw);
    const SubsetPlan plan =
        build_subset_plan(reference.dim(), config.subset_budget,
                          derive_seed(derive_seed(config.seed, kPlanSalt), static_cast<std::uint64_t>(check)));
    const std::vector<FeatureTestResult> tests =
        check_window(model, reference, incoming_prefix, config, plan,
                     derive_seed(derive_seed(config.seed, kBootSalt), static_cast<std::uint64_t>(check)));
    ++check;

    std::vector<int> flagged;
    for (const FeatureTestResult& t : tests)
      if (t.flagged) flagged.push_back(t.feature);

    if (!flagged.empty()) {
      DriftEvent event;
      event.stream_index = cursor;
      event.flagged_features = std::move(flagged);
      event.tests = tests;
      if (observer) observer->on_event(event, model, reference, incoming_prefix);
      trace.events.push_back(std::move(event));

      model = fit(SampleWindow::slice(stream, cursor, nr), config.model, config.task,
                  derive_seed(derive_seed(config.seed, kFitSalt), static_cast<std::uint64_t>(fits++)));
      reference = SampleWindow::slice(stream, cursor + nr, nw);
      trace.performance.push_back(performance_metric(model, reference, config.task));
      cursor += config.n;
    } else {
      trace.performance.push_back(
          performance_metric(model, SampleWindow::slice(stream, cursor, config.n), config.task));
      cursor += config.delta;
    }
  }
  return trace;
}

}  // namespace drift
