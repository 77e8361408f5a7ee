#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drift/detector.hpp"

namespace drift {

// ------------------------------------------------------- marginal KS test

struct KsResult {
  int feature = 0;
  double statistic = 0.0;  // two-sample sup gap of the empirical CDFs
  double critical = 0.0;
  bool flagged = false;
};

// Exact two-sample Kolmogorov-Smirnov statistic (ties handled).
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Feature-wise KS between the windows at level alpha with a Bonferroni
// correction across features. Critical value is the asymptotic
// c(a) * sqrt((m+n)/(m*n)) with c(a) = sqrt(-ln(a/2)/2).
std::vector<KsResult> marginal_ks(const SampleWindow& zr, const SampleWindow& zn, double alpha);

// --------------------------------------------------------------------- DDM

enum class DdmLevel { learning, normal, warning, drift };

// Classic drift detection on a Bernoulli error stream: track the error rate
// p and its deviation s = sqrt(p(1-p)/count); remember the minimum of p + s;
// warn once p + s exceeds p_min + 2*s_min and signal drift once it exceeds
// p_min + 3*s_min (strictly, so an all-correct stream never alarms). The
// state ignores the first `warmup` samples and resets itself after a drift
// so monitoring restarts on the new concept.
struct DdmState {
  std::int64_t count = 0;
  std::int64_t errors = 0;
  double p_min = 0.0;
  double s_min = 0.0;
  bool has_min = false;
  int warmup = 30;

  double error_rate() const;
  double deviation() const;
};

DdmLevel ddm_update(DdmState& state, bool error);

// ------------------------------------------------- stream-protocol runners

// Marginal KS driven through the same sliding-window protocol as
// run_detector: identical windows, retrain rule, and performance logging;
// only the per-window test differs. Event tests carry the KS statistic and
// critical value in the statistic/threshold slots.
DetectionTrace run_marginal_detector(std::span<const LabeledSample> stream,
                                     const DetectorConfig& config);

// DDM driven sample by sample over the stream: the model classifies each
// arriving sample, the error feeds the state, and a drift triggers the same
// retrain-on-next-batch rule. Events carry no per-feature attribution.
// Performance is logged over each completed n-sample stretch.
DetectionTrace run_ddm_detector(std::span<const LabeledSample> stream,
                                const DetectorConfig& config);

}  // namespace drift
