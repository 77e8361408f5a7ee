#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drift/datagen.hpp"
#include "drift/detector.hpp"
#include "drift/model.hpp"

namespace drift {

// ----------------------------------------------------- detection scoring

struct DetectionScore {
  double precision = 0.0;
  double recall = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

// Greedy one-to-one matching in index order: each detection claims the
// earliest unmatched truth within +-tolerance. Unclaimed detections are
// false positives (extra alarms near an already-claimed drift included),
// unclaimed truths are misses. With nothing detected and nothing to find,
// precision and recall are both 1.
DetectionScore detection_pr(std::span<const std::int64_t> detected,
                            std::span<const std::int64_t> truth, std::int64_t tolerance);

// Mean of the trace's logged performance values.
double average_performance(const DetectionTrace& trace);

// ------------------------------------------------------------- occlusion

// Drop in the model's pre-to-post-drift performance gap when the features
// in s are replaced by their per-window means: score = (perf(zr) - perf(zn))
// minus the same gap recomputed on the imputed windows. Classification
// scores are accuracy percentage points; regression scores are raw R-squared
// differences. Large positive values mean s carries the drift.
double occlusion_score(const TrainedModel& model, const SampleWindow& zr, const SampleWindow& zn,
                       FeatureSubset s, const TaskKind& task);

// Everything needed to score one drift event after the detector moved on:
// the model that raised it plus the two windows it compared.
struct EventSnapshot {
  std::int64_t stream_index = 0;
  std::vector<int> flagged_features;
  TrainedModel model;
  SampleWindow reference;
  SampleWindow incoming;
};

class SnapshotRecorder : public DetectorObserver {
 public:
  void on_event(const DriftEvent& event, const TrainedModel& model, const SampleWindow& zr,
                const SampleWindow& zn) override;
  std::span<const EventSnapshot> snapshots() const { return snapshots_; }

 private:
  std::vector<EventSnapshot> snapshots_;
};

// Mean occlusion_score over the recorded events, each scored on its own
// flagged feature set.
double occlusion_mean(std::span<const EventSnapshot> snapshots, const TaskKind& task);

// ----------------------------------------------------------- power curve

struct PowerPoint {
  int window_size = 0;
  double power = 0.0;
};

// Empirical detection power as the window size grows. Each trial lays out a
// fresh stream: floor(n*r) training samples, one pre-change window, one
// post-change window, then runs a single test on that pair; power is the
// fraction of trials that flag at least one feature. The stream spec may carry one
// drift point (its position is overridden to sit between the windows) or
// none, in which case the curve measures the false alarm rate on a
// stationary stream instead.
std::vector<PowerPoint> power_curve(const StreamSpec& spec, std::span<const int> window_sizes,
                                    int trials, const DetectorConfig& config);

}  // namespace drift
