#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drift/core.hpp"

namespace drift {

enum class Generator {
  sine,
  sine_imbalance,
  sea,
  sea_gradual,
  mixed,
  aug_mixed,
  agrawal,
  agrawal_imbalance,
  hyperplane,
  friedmann,
  d1,
  d2,
};

std::string_view generator_name(Generator g);
Generator generator_from_name(std::string_view name);  // usage error on unknown names
std::span<const Generator> all_generators();

int generator_dim(Generator g);
TaskKind generator_task(Generator g);

// Recipe for a synthetic stream. drift_points are 0-based indices of concept
// onsets: sample i obeys concept c where c counts the drift points <= i.
struct StreamSpec {
  Generator generator = Generator::sine;
  std::int64_t length = 0;
  std::vector<std::int64_t> drift_points;  // strictly increasing, each < length
  double noise = 0.0;                      // label flip probability, classification only
  std::uint64_t seed = 0;

  void validate() const;
};

// What actually changed, for scoring detectors against.
struct GroundTruth {
  std::vector<std::int64_t> drift_points;
  std::vector<FeatureSubset> drift_features;  // aligned 1:1 with drift_points
};

struct GeneratedStream {
  std::vector<LabeledSample> samples;
  GroundTruth truth;
  TaskKind task;
  int dim = 0;
};

// Deterministic in spec.seed. Generator catalogue:
//   d1         3 Bernoulli features; y = (x1 xor x2) or x3, after drift x1 or x3
//   d2         4 Bernoulli features; y = x1 and x2, after drift x1 and x3
//   sine       x1, x2 ~ U[0,1] plus 2 noise features; y = [x2 < sin x1],
//              labels invert at drift; imbalance variant keeps class-1
//              samples with probability 0.25
//   sea        3 features ~ U[0,10]; y = [f1 + f2 <= theta], theta cycles
//              8, 9, 7, 9.5 across concepts; gradual variant blends
//              neighbouring concepts linearly over 500 samples
//   mixed      2 Bernoulli + 2 uniform features; y = majority of {v, w,
//              x4 < 0.5 + 0.3 sin(3 pi x3)}, drift flips the numeric
//              comparison; aug variant additionally inverts labels
//   agrawal    9 loan-applicant attributes; concepts cycle the three
//              classic decision functions; imbalance keeps class-1
//              samples with probability 0.25
//   hyperplane 10 features ~ U[0,1]; y = [sum w_i x_i > sum w_i / 2] with
//              5 weights drifting by 0.001 per sample (10% direction-flip
//              chance); motion is continuous, so supplied drift_points
//              only label the stream for scoring
//   friedmann  regression; y = 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4
//              + N(0,1), drift swaps the roles of x1 and x4
GeneratedStream generate(const StreamSpec& spec);

// CSV contract: UTF-8, one header line, feature columns in order, one final
// column named "label"; plain decimal numbers. Classification labels must be
// nonnegative integers. Errors carry 1-based line numbers.
std::vector<LabeledSample> load_csv(const std::string& path, const TaskKind& task);
void save_csv(const std::string& path, std::span<const LabeledSample> samples);

// Ground-truth sidecar: one ascending 0-based drift index per line.
std::vector<std::int64_t> load_truth(const std::string& path);
void save_truth(const std::string& path, std::span<const std::int64_t> drift_points);

}  // namespace drift
