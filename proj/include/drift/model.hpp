#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "drift/core.hpp"

namespace drift {

// Feed-forward predictor trained by fit(). Hidden layers use tanh; outputs
// are per-class sigmoid scores for classification and a single linear value
// for regression. Immutable after construction.
class TrainedModel {
 public:
  TrainedModel() = default;

  int input_dim() const { return input_dim_; }
  const TaskKind& task() const { return task_; }
  const ModelSpec& spec() const { return spec_; }
  int output_dim() const;

  // Score vector: `classes` sigmoid activations, or one linear value.
  std::vector<double> predict(std::span<const double> x) const;
  // Highest-scoring class; ties resolve to the lowest index.
  int predict_class(std::span<const double> x) const;
  // Class index as a double (classification) or the raw value (regression);
  // the form consumed by loss().
  double predict_value(std::span<const double> x) const;

  // Flattened parameter vector (layer by layer, weights then biases).
  std::vector<double> parameters() const;
  // Copy of this model with replaced parameters; sizes must match.
  TrainedModel with_parameters(std::span<const double> flat) const;

 private:
  struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;
  };

  void forward_scores(std::span<const double> x, std::vector<double>& out,
                      std::vector<double>& scratch) const;
  static int argmax_lowest(std::span<const double> scores);

  friend TrainedModel fit(const SampleWindow&, const ModelSpec&, const TaskKind&, std::uint64_t);
  friend double subset_risk(const TrainedModel&, const SampleWindow&, FeatureSubset, LossKind);
  friend std::pair<double, std::vector<double>> training_objective_with_gradient(
      const TrainedModel&, const SampleWindow&);
  friend class PooledLossTable;

  std::vector<Layer> layers_;
  TaskKind task_ = TaskKind::classification(2);
  ModelSpec spec_;
  int input_dim_ = 0;
};

// Mini-batch SGD on cross-entropy (classification) or mean squared error
// (regression). Deterministic for a given seed; runs on the calling thread.
TrainedModel fit(const SampleWindow& train, const ModelSpec& spec, const TaskKind& task,
                 std::uint64_t seed);

// Mean loss of the model over the window with inputs zero-projected onto s.
double subset_risk(const TrainedModel& model, const SampleWindow& window, FeatureSubset s,
                   LossKind kind);

// Diagnostic: training objective (data term plus l2 penalty) and its gradient
// with respect to the flattened parameters, for finite-difference checks.
std::pair<double, std::vector<double>> training_objective_with_gradient(
    const TrainedModel& model, const SampleWindow& batch);

}  // namespace drift
