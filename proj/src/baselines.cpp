#include "drift/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "drift/model.hpp"
#include "drift/rng.hpp"

namespace drift {

namespace {

constexpr std::uint64_t kFitSalt = 0x666974ULL;

std::vector<double> feature_column(const SampleWindow& window, int feature) {
  std::vector<double> column(static_cast<std::size_t>(window.size()));
  for (std::int64_t i = 0; i < window.size(); ++i)
    column[static_cast<std::size_t>(i)] = window[i].features[static_cast<std::size_t>(feature)];
  return column;
}

}  // namespace

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::insufficient_data, "ks_statistic: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const std::size_t m = sa.size();
  const std::size_t n = sb.size();
  std::size_t i = 0, j = 0;
  double gap = 0.0;
  while (i < m || j < n) {
    double v;
    if (i == m) v = sb[j];
    else if (j == n) v = sa[i];
    else v = std::min(sa[i], sb[j]);
    while (i < m && sa[i] == v) ++i;
    while (j < n && sb[j] == v) ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(m);
    const double fb = static_cast<double>(j) / static_cast<double>(n);
    gap = std::max(gap, std::abs(fa - fb));
  }
  return gap;
}

std::vector<KsResult> marginal_ks(const SampleWindow& zr, const SampleWindow& zn, double alpha) {
  if (zr.empty() || zn.empty()) fail(ErrorKind::insufficient_data, "marginal_ks: empty window");
  if (zr.dim() != zn.dim()) fail(ErrorKind::dimension, "marginal_ks: window widths differ");
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorKind::config, "marginal_ks: alpha must lie in (0, 1)");

  const int dim = zr.dim();
  const double level = alpha / static_cast<double>(dim);
  const double c = std::sqrt(-std::log(level / 2.0) / 2.0);
  const double m = static_cast<double>(zr.size());
  const double n = static_cast<double>(zn.size());
  const double critical = c * std::sqrt((m + n) / (m * n));

  std::vector<KsResult> results(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    const std::vector<double> left = feature_column(zr, k);
    const std::vector<double> right = feature_column(zn, k);
    KsResult& r = results[static_cast<std::size_t>(k)];
    r.feature = k;
    r.statistic = ks_statistic(left, right);
    r.critical = critical;
    r.flagged = r.statistic > critical;
  }
  return results;
}

double DdmState::error_rate() const {
  return count > 0 ? static_cast<double>(errors) / static_cast<double>(count) : 0.0;
}

double DdmState::deviation() const {
  if (count <= 0) return 0.0;
  const double p = error_rate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(count));
}

DdmLevel ddm_update(DdmState& state, bool error) {
  ++state.count;
  if (error) ++state.errors;
  if (state.count <= state.warmup) return DdmLevel::learning;

  const double p = state.error_rate();
  const double s = state.deviation();
  if (!state.has_min || p + s < state.p_min + state.s_min) {
    state.p_min = p;
    state.s_min = s;
    state.has_min = true;
  }

  if (p + s > state.p_min + 3.0 * state.s_min) {
    state = DdmState{.warmup = state.warmup};
    return DdmLevel::drift;
  }
  if (p + s > state.p_min + 2.0 * state.s_min) return DdmLevel::warning;
  return DdmLevel::normal;
}

DetectionTrace run_marginal_detector(std::span<const LabeledSample> stream,
                                     const DetectorConfig& config) {
  config.validate();
  validate_stream(stream);
  const std::int64_t length = static_cast<std::int64_t>(stream.size());
  if (length < 2 * static_cast<std::int64_t>(config.n))
    fail(ErrorKind::insufficient_data,
         "run_marginal_detector: stream must hold at least two windows");

  const int nr = config.train_count();
  const int nw = config.window_count();

  DetectionTrace trace;
  trace.config = config;
  trace.stream_length = length;

  int fits = 0;
  TrainedModel model = fit(SampleWindow::slice(stream, 0, nr), config.model, config.task,
                           derive_seed(derive_seed(config.seed, kFitSalt),
                                       static_cast<std::uint64_t>(fits++)));
  SampleWindow reference = SampleWindow::slice(stream, nr, nw);

  std::int64_t cursor = config.n;
  while (cursor + config.n <= length) {
    const SampleWindow incoming_prefix = SampleWindow::slice(stream, cursor, nw);
    const std::vector<KsResult> ks = marginal_ks(reference, incoming_prefix, config.alpha);

    std::vector<FeatureTestResult> tests(ks.size());
    std::vector<int> flagged;
    for (std::size_t k = 0; k < ks.size(); ++k) {
      tests[k].feature = ks[k].feature;
      tests[k].statistic = ks[k].statistic;
      tests[k].threshold = ks[k].critical;
      tests[k].flagged = ks[k].flagged;
      if (ks[k].flagged) flagged.push_back(ks[k].feature);
    }

    if (!flagged.empty()) {
      DriftEvent event;
      event.stream_index = cursor;
      event.flagged_features = std::move(flagged);
      event.tests = std::move(tests);
      trace.events.push_back(std::move(event));

      model = fit(SampleWindow::slice(stream, cursor, nr), config.model, config.task,
                  derive_seed(derive_seed(config.seed, kFitSalt),
                              static_cast<std::uint64_t>(fits++)));
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

DetectionTrace run_ddm_detector(std::span<const LabeledSample> stream,
                                const DetectorConfig& config) {
  config.validate();
  if (!config.task.is_classification())
    fail(ErrorKind::protocol, "run_ddm_detector: needs a classification task");
  validate_stream(stream);
  const std::int64_t length = static_cast<std::int64_t>(stream.size());
  if (length < 2 * static_cast<std::int64_t>(config.n))
    fail(ErrorKind::insufficient_data,
         "run_ddm_detector: stream must hold at least two windows");

  const int nr = config.train_count();

  DetectionTrace trace;
  trace.config = config;
  trace.stream_length = length;

  int fits = 0;
  TrainedModel model = fit(SampleWindow::slice(stream, 0, nr), config.model, config.task,
                           derive_seed(derive_seed(config.seed, kFitSalt),
                                       static_cast<std::uint64_t>(fits++)));
  DdmState state;

  std::int64_t hits = 0;
  std::int64_t seen = 0;
  std::int64_t cursor = nr;
  while (cursor < length) {
    const LabeledSample& sample = stream[static_cast<std::size_t>(cursor)];
    const bool error = model.predict_class(sample.features) != static_cast<int>(sample.target);
    if (!error) ++hits;
    ++seen;
    if (seen == config.n) {
      trace.performance.push_back(static_cast<double>(hits) / static_cast<double>(seen));
      hits = 0;
      seen = 0;
    }

    if (ddm_update(state, error) == DdmLevel::drift) {
      DriftEvent event;
      event.stream_index = cursor;
      trace.events.push_back(std::move(event));
      if (cursor + 1 + nr > length) break;
      model = fit(SampleWindow::slice(stream, cursor + 1, nr), config.model, config.task,
                  derive_seed(derive_seed(config.seed, kFitSalt),
                              static_cast<std::uint64_t>(fits++)));
      cursor += 1 + nr;
      hits = 0;
      seen = 0;
      continue;
    }
    ++cursor;
  }
  return trace;
}

}  // namespace drift
