#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "drift/model_spec.hpp"

namespace drift {

enum class ErrorKind {
  config,             // invalid configuration value
  dimension,          // feature index or width mismatch
  insufficient_data,  // not enough samples for the requested operation
  data,               // malformed sample content
  protocol,           // operation invoked outside its contract
  parse,              // unreadable input text, carries a line number when known
  usage,              // bad command-line invocation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

// ---------------------------------------------------------------- tasks

struct TaskKind {
  enum class Kind { classification, regression };

  Kind kind = Kind::classification;
  int classes = 2;  // used only for classification

  static TaskKind classification(int classes = 2) {
    return TaskKind{Kind::classification, classes};
  }
  static TaskKind regression() { return TaskKind{Kind::regression, 0}; }

  bool is_classification() const { return kind == Kind::classification; }
  bool operator==(const TaskKind&) const = default;
};

enum class LossKind { zero_one, squared };

// Loss the drift statistic evaluates under: 0/1 for classification,
// squared error for regression.
LossKind loss_for(const TaskKind& task);

// For zero_one, prediction and target are class indices stored as doubles.
double loss(LossKind kind, double prediction, double target);

// -------------------------------------------------------------- samples

struct LabeledSample {
  std::vector<double> features;
  double target = 0.0;
};

// Immutable run of consecutive samples with uniform feature width.
// start_index records where the run sits in the originating stream.
class SampleWindow {
 public:
  SampleWindow() = default;
  explicit SampleWindow(std::vector<LabeledSample> samples, std::int64_t start_index = 0);

  // Copies stream[start, start+count); bounds-checked.
  static SampleWindow slice(std::span<const LabeledSample> stream, std::int64_t start,
                            std::int64_t count);

  std::int64_t size() const { return static_cast<std::int64_t>(samples_.size()); }
  bool empty() const { return samples_.empty(); }
  int dim() const { return dim_; }
  std::int64_t start_index() const { return start_index_; }
  const LabeledSample& operator[](std::int64_t i) const {
    return samples_[static_cast<std::size_t>(i)];
  }
  std::span<const LabeledSample> samples() const { return samples_; }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

 private:
  std::vector<LabeledSample> samples_;
  std::int64_t start_index_ = 0;
  int dim_ = 0;
};

// -------------------------------------------------------- feature subsets

// Subset of feature indices [0, dim) packed into a 64-bit mask. Streams wider
// than 64 features are rejected by the interaction statistic.
class FeatureSubset {
 public:
  static constexpr int max_dim = 64;

  constexpr FeatureSubset() = default;

  static FeatureSubset none() { return FeatureSubset{}; }
  static FeatureSubset all(int dim);
  static FeatureSubset of(std::initializer_list<int> indices);
  static FeatureSubset from_bits(std::uint64_t bits) { return FeatureSubset{bits}; }
  static FeatureSubset from_indices(std::span<const int> indices);

  bool contains(int k) const { return k >= 0 && k < max_dim && (bits_ >> k) & 1u; }
  FeatureSubset with(int k) const;
  FeatureSubset without(int k) const;
  bool subset_of(FeatureSubset other) const { return (bits_ & ~other.bits_) == 0; }
  int count() const { return __builtin_popcountll(bits_); }
  bool empty_set() const { return bits_ == 0; }
  int highest() const { return bits_ == 0 ? -1 : 63 - __builtin_clzll(bits_); }
  std::uint64_t bits() const { return bits_; }
  std::vector<int> indices() const;

  bool operator==(const FeatureSubset&) const = default;

 private:
  explicit constexpr FeatureSubset(std::uint64_t bits) : bits_(bits) {}
  std::uint64_t bits_ = 0;
};

// Zero-projection onto the coordinates in s: kept indices pass through,
// all others become 0. Errors if s references an index >= x.size().
std::vector<double> mask(std::span<const double> x, FeatureSubset s);

// ---------------------------------------------------------- configuration

struct DetectorConfig {
  int n = 1000;           // detection window size
  double r = 0.8;         // training fraction of each n-window
  int delta = 50;         // slide step when no drift fires
  double alpha = 0.05;    // test size
  int bootstrap_k = 100;  // bootstrap replicates (config key "K")
  int subset_budget = 64; // subsets sampled per feature, 0 = exhaustive
  std::uint64_t seed = 0;
  bool standardize = false;
  TaskKind task = TaskKind::classification(2);
  ModelSpec model;

  int train_count() const { return static_cast<int>(n * r); }  // floor(n*r)
  int window_count() const { return n - train_count(); }       // n~

  void validate() const;  // throws Error(config) naming the offending key
};

// ---------------------------------------------------------- preprocessing

// Per-feature affine transform fitted on the first training block so that a
// masked-out coordinate (zero) coincides with the feature's training mean.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // stddev, or 1 where variance is ~0

  static Standardizer fit(std::span<const LabeledSample> stream, std::int64_t count);
  LabeledSample apply(const LabeledSample& s) const;
  std::vector<LabeledSample> apply_all(std::span<const LabeledSample> stream) const;
};

// ------------------------------------------------------------ parallelism

// Worker cap: min(hardware threads, DRIFT_THREADS) with DRIFT_THREADS >= 1.
int max_threads();

// Runs fn(i) for i in [0, count) over a static partition of worker threads.
// Callers write to disjoint output slots, so results never depend on the
// thread count. Runs inline when count is small or one worker is available.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn);

}  // namespace drift
