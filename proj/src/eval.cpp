#include "drift/eval.hpp"

#include <cmath>
#include <cstdlib>

#include "drift/bootstrap.hpp"
#include "drift/rng.hpp"
#include "drift/statistic.hpp"

namespace drift {

namespace {

constexpr std::uint64_t kPowerSalt = 0x706f776572ULL;
constexpr std::uint64_t kPlanSalt = 0x706c616eULL;
constexpr std::uint64_t kBootSalt = 0x62747374ULL;
constexpr std::uint64_t kFitSalt = 0x666974ULL;

void require_ascending(std::span<const std::int64_t> xs, const char* what) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] < xs[i - 1])
      fail(ErrorKind::protocol, std::string("detection_pr: ") + what + " must be ascending");
  }
}

// Window with the features in s replaced by their means over that window.
SampleWindow impute(const SampleWindow& window, FeatureSubset s) {
  const std::vector<int> targets = s.indices();
  std::vector<double> means(targets.size(), 0.0);
  for (std::int64_t i = 0; i < window.size(); ++i) {
    for (std::size_t j = 0; j < targets.size(); ++j)
      means[j] += window[i].features[static_cast<std::size_t>(targets[j])];
  }
  for (double& m : means) m /= static_cast<double>(window.size());

  std::vector<LabeledSample> copy(window.begin(), window.end());
  for (LabeledSample& sample : copy) {
    for (std::size_t j = 0; j < targets.size(); ++j)
      sample.features[static_cast<std::size_t>(targets[j])] = means[j];
  }
  return SampleWindow(std::move(copy), window.start_index());
}

}  // namespace

DetectionScore detection_pr(std::span<const std::int64_t> detected,
                            std::span<const std::int64_t> truth, std::int64_t tolerance) {
  if (tolerance < 0) fail(ErrorKind::config, "detection_pr: tolerance must be >= 0");
  require_ascending(detected, "detections");
  require_ascending(truth, "truths");

  std::vector<bool> claimed(truth.size(), false);
  DetectionScore score;
  for (const std::int64_t d : detected) {
    bool matched = false;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (!claimed[j] && std::llabs(d - truth[j]) <= tolerance) {
        claimed[j] = true;
        matched = true;
        break;
      }
    }
    matched ? ++score.tp : ++score.fp;
  }
  score.fn = static_cast<std::int64_t>(truth.size()) - score.tp;

  score.precision = score.tp + score.fp > 0
                        ? static_cast<double>(score.tp) / static_cast<double>(score.tp + score.fp)
                        : (truth.empty() ? 1.0 : 0.0);
  score.recall = truth.empty() ? 1.0
                               : static_cast<double>(score.tp) /
                                     static_cast<double>(score.tp + score.fn);
  return score;
}

double average_performance(const DetectionTrace& trace) {
  if (trace.performance.empty())
    fail(ErrorKind::insufficient_data, "average_performance: no performance entries");
  double total = 0.0;
  for (const double p : trace.performance) total += p;
  return total / static_cast<double>(trace.performance.size());
}

double occlusion_score(const TrainedModel& model, const SampleWindow& zr, const SampleWindow& zn,
                       FeatureSubset s, const TaskKind& task) {
  if (zr.empty() || zn.empty()) fail(ErrorKind::insufficient_data, "occlusion_score: empty window");
  if (s.empty_set()) fail(ErrorKind::protocol, "occlusion_score: empty feature set");
  if (zr.dim() != zn.dim()) fail(ErrorKind::dimension, "occlusion_score: window widths differ");
  if (s.highest() >= zr.dim())
    fail(ErrorKind::dimension, "occlusion_score: feature set exceeds the window width");

  const double gap_full =
      performance_metric(model, zr, task) - performance_metric(model, zn, task);
  const double gap_imputed =
      performance_metric(model, impute(zr, s), task) - performance_metric(model, impute(zn, s), task);
  const double scale = task.is_classification() ? 100.0 : 1.0;
  return scale * (gap_full - gap_imputed);
}

void SnapshotRecorder::on_event(const DriftEvent& event, const TrainedModel& model,
                                const SampleWindow& zr, const SampleWindow& zn) {
  snapshots_.push_back(EventSnapshot{event.stream_index, event.flagged_features, model, zr, zn});
}

double occlusion_mean(std::span<const EventSnapshot> snapshots, const TaskKind& task) {
  if (snapshots.empty())
    fail(ErrorKind::insufficient_data, "occlusion_mean: no drift events recorded");
  double total = 0.0;
  for (const EventSnapshot& snap : snapshots) {
    total += occlusion_score(snap.model, snap.reference, snap.incoming,
                             FeatureSubset::from_indices(snap.flagged_features), task);
  }
  return total / static_cast<double>(snapshots.size());
}

std::vector<PowerPoint> power_curve(const StreamSpec& spec, std::span<const int> window_sizes,
                                    int trials, const DetectorConfig& config) {
  spec.validate();
  if (trials < 20) fail(ErrorKind::config, "power_curve: trials must be >= 20");
  if (window_sizes.empty()) fail(ErrorKind::config, "power_curve: no window sizes given");
  if (spec.drift_points.size() > 1)
    fail(ErrorKind::config, "power_curve: the stream spec must carry at most one drift");

  const bool with_drift = !spec.drift_points.empty();
  const std::uint64_t base = derive_seed(config.seed, kPowerSalt);

  std::vector<PowerPoint> curve;
  curve.reserve(window_sizes.size());
  for (const int n : window_sizes) {
    DetectorConfig cfg = config;
    cfg.n = n;
    cfg.task = generator_task(spec.generator);
    const int nr = cfg.train_count();
    const int nw = cfg.window_count();
    if (nr < 1 || nw < 1)
      fail(ErrorKind::config, "power_curve: window size " + std::to_string(n) +
                                  " leaves an empty train or test block");

    const std::uint64_t size_seed = derive_seed(base, static_cast<std::uint64_t>(n));
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t trial_seed = derive_seed(size_seed, static_cast<std::uint64_t>(t));

      StreamSpec trial_spec = spec;
      trial_spec.length = nr + 2 * nw;
      trial_spec.drift_points.clear();
      if (with_drift) trial_spec.drift_points.push_back(nr + nw);
      trial_spec.seed = trial_seed;
      const GeneratedStream gen = generate(trial_spec);
      const std::vector<LabeledSample> stream = prepare_stream(gen.samples, cfg);

      const TrainedModel model = fit(SampleWindow::slice(stream, 0, nr), cfg.model, cfg.task,
                                     derive_seed(trial_seed, kFitSalt));
      const SampleWindow zr = SampleWindow::slice(stream, nr, nw);
      const SampleWindow zn = SampleWindow::slice(stream, nr + nw, nw);
      const SubsetPlan plan =
          build_subset_plan(gen.dim, cfg.subset_budget, derive_seed(trial_seed, kPlanSalt));
      const std::vector<FeatureTestResult> tests =
          check_window(model, zr, zn, cfg, plan, derive_seed(trial_seed, kBootSalt));

      for (const FeatureTestResult& r : tests) {
        if (r.flagged) {
          ++hits;
          break;
        }
      }
    }
    curve.push_back(PowerPoint{n, static_cast<double>(hits) / static_cast<double>(trials)});
  }
  return curve;
}

}  // namespace drift
