#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "drift/bootstrap.hpp"

namespace drift {

struct FeatureTestResult {
  int feature = 0;
  double statistic = 0.0;   // n~ * d_hat
  double threshold = 0.0;   // bootstrap threshold for this feature
  bool flagged = false;
  FeatureSubset witness;    // subset attaining the max
};

struct DriftEvent {
  std::int64_t stream_index = 0;  // start of the window whose check fired
  std::vector<int> flagged_features;
  std::vector<FeatureTestResult> tests;  // one per feature
};

struct DetectionTrace {
  std::vector<DriftEvent> events;
  std::vector<double> performance;  // one entry per loop iteration
  DetectorConfig config;
  std::int64_t stream_length = 0;
};

// Hook for side artifacts of a detector run. on_event fires before the
// retrain, while `active` is still the model the check used.
class DetectorObserver {
 public:
  virtual ~DetectorObserver() = default;
  virtual void on_event(const DriftEvent& /*event*/, const TrainedModel& /*active*/,
                        const SampleWindow& /*zr*/, const SampleWindow& /*zn_prefix*/) {}
};

// One detection check: real statistics for every feature plus bootstrap
// thresholds from the pooled pair. Model evaluations are shared between the
// real statistic and the replicates. seed_override replaces config.seed as
// the bootstrap seed (run_detector derives a child seed per check).
std::vector<FeatureTestResult> check_window(const TrainedModel& model, const SampleWindow& zr,
                                            const SampleWindow& zn, const DetectorConfig& config,
                                            const SubsetPlan& plan,
                                            std::optional<std::uint64_t> seed_override = {});

// Accuracy for classification, R^2 for regression.
double performance_metric(const TrainedModel& model, const SampleWindow& window,
                          const TaskKind& task);

// Rejects streams holding non-finite values (data error) or mixed feature
// widths (dimension error). All run_* entry points call this up front.
void validate_stream(std::span<const LabeledSample> stream);

// Applies the standardization step the config asks for: per-feature
// zero-mean/unit-variance fitted on the first floor(n*r) samples. Returns
// the stream unchanged when config.standardize is false. run_detector takes
// the stream as given; callers standardize first.
std::vector<LabeledSample> prepare_stream(std::span<const LabeledSample> stream,
                                          const DetectorConfig& config);

// Sliding-window drift monitor. Trains on the first floor(n*r) samples,
// keeps the next n~ as the reference window, then repeatedly tests the n~
// prefix of the upcoming n-window. On a flag it records the event, retrains
// on the first floor(n*r) samples of that window, adopts the following n~ as
// the new reference, and jumps a full window; otherwise it slides by delta.
// Performance is logged every iteration: on the tested n-window when no
// drift fires, on the fresh reference window after a retrain.
DetectionTrace run_detector(std::span<const LabeledSample> stream, const DetectorConfig& config,
                            DetectorObserver* observer = nullptr);

}  // namespace drift
