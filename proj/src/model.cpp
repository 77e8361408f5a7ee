#include "drift/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drift/rng.hpp"

namespace drift {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_samples(const SampleWindow& window, const TaskKind& task) {
  for (std::int64_t i = 0; i < window.size(); ++i) {
    for (const double v : window[i].features)
      if (!std::isfinite(v)) fail(ErrorKind::data, "fit: non-finite feature value");
    const double y = window[i].target;
    if (!std::isfinite(y)) fail(ErrorKind::data, "fit: non-finite target");
    if (task.is_classification()) {
      const double rounded = std::nearbyint(y);
      if (rounded != y || y < 0.0 || y >= static_cast<double>(task.classes))
        fail(ErrorKind::data, "fit: class labels must be integers in [0, classes)");
    }
  }
}

// Activations for every layer of one sample; reused across samples.
struct BackpropWork {
  std::vector<std::vector<double>> acts;   // acts[0] = input, acts.back() = scores
  std::vector<std::vector<double>> delta;  // per-layer error terms
};

}  // namespace

int TrainedModel::output_dim() const {
  return task_.is_classification() ? task_.classes : 1;
}

int TrainedModel::argmax_lowest(std::span<const double> scores) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(scores.size()); ++c)
    if (scores[static_cast<std::size_t>(c)] > scores[static_cast<std::size_t>(best)]) best = c;
  return best;
}

void TrainedModel::forward_scores(std::span<const double> x, std::vector<double>& out,
                                  std::vector<double>& scratch) const {
  scratch.assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    const bool last = l + 1 == layers_.size();
    out.assign(static_cast<std::size_t>(layer.out), 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
      double z = layer.b[static_cast<std::size_t>(o)];
      for (int i = 0; i < layer.in; ++i) z += row[i] * scratch[static_cast<std::size_t>(i)];
      if (last)
        out[static_cast<std::size_t>(o)] = task_.is_classification() ? sigmoid(z) : z;
      else
        out[static_cast<std::size_t>(o)] = std::tanh(z);
    }
    if (!last) scratch = out;
  }
}

std::vector<double> TrainedModel::predict(std::span<const double> x) const {
  if (layers_.empty()) fail(ErrorKind::protocol, "predict: model has not been fitted");
  if (static_cast<int>(x.size()) != input_dim_)
    fail(ErrorKind::dimension, "predict: input width does not match the model");
  for (double v : x)
    if (!std::isfinite(v)) fail(ErrorKind::data, "predict: non-finite input");
  std::vector<double> out, scratch;
  forward_scores(x, out, scratch);
  return out;
}

int TrainedModel::predict_class(std::span<const double> x) const {
  if (!task_.is_classification())
    fail(ErrorKind::protocol, "predict_class: regression model has no classes");
  const std::vector<double> scores = predict(x);
  return argmax_lowest(scores);
}

double TrainedModel::predict_value(std::span<const double> x) const {
  if (task_.is_classification()) return static_cast<double>(predict_class(x));
  return predict(x)[0];
}

std::vector<double> TrainedModel::parameters() const {
  std::vector<double> flat;
  for (const Layer& layer : layers_) {
    flat.insert(flat.end(), layer.w.begin(), layer.w.end());
    flat.insert(flat.end(), layer.b.begin(), layer.b.end());
  }
  return flat;
}

TrainedModel TrainedModel::with_parameters(std::span<const double> flat) const {
  TrainedModel copy = *this;
  std::size_t pos = 0;
  for (Layer& layer : copy.layers_) {
    if (pos + layer.w.size() + layer.b.size() > flat.size())
      fail(ErrorKind::dimension, "with_parameters: flat vector too short");
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.w.size(), layer.w.begin());
    pos += layer.w.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.b.size(), layer.b.begin());
    pos += layer.b.size();
  }
  if (pos != flat.size())
    fail(ErrorKind::dimension, "with_parameters: flat vector size mismatch");
  return copy;
}

TrainedModel fit(const SampleWindow& train, const ModelSpec& spec, const TaskKind& task,
                 std::uint64_t seed) {
  spec.validate();
  if (train.empty()) fail(ErrorKind::insufficient_data, "fit: empty training window");
  if (task.is_classification() && task.classes < 2)
    fail(ErrorKind::config, "config key \"task\": classification needs >= 2 classes");
  check_samples(train, task);

  TrainedModel model;
  model.task_ = task;
  model.spec_ = spec;
  model.input_dim_ = train.dim();

  std::vector<int> widths{train.dim()};
  if (spec.arch == ModelSpec::Arch::mlp)
    widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(task.is_classification() ? task.classes : 1);

  Rng rng(derive_seed(seed, 0x6d6f64656cULL));
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    TrainedModel::Layer layer;
    layer.in = widths[l];
    layer.out = widths[l + 1];
    const double a = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
    for (double& w : layer.w) w = rng.uniform(-a, a);
    layer.b.assign(static_cast<std::size_t>(layer.out), 0.0);
    model.layers_.push_back(std::move(layer));
  }

  const std::int64_t count = train.size();
  const int layers = static_cast<int>(model.layers_.size());
  std::vector<std::int64_t> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);

  BackpropWork work;
  work.acts.resize(static_cast<std::size_t>(layers) + 1);
  work.delta.resize(static_cast<std::size_t>(layers));
  std::vector<std::vector<double>> gw(static_cast<std::size_t>(layers));
  std::vector<std::vector<double>> gb(static_cast<std::size_t>(layers));
  for (int l = 0; l < layers; ++l) {
    gw[static_cast<std::size_t>(l)].resize(model.layers_[static_cast<std::size_t>(l)].w.size());
    gb[static_cast<std::size_t>(l)].resize(model.layers_[static_cast<std::size_t>(l)].b.size());
  }

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::int64_t start = 0; start < count; start += spec.batch_size) {
      const std::int64_t stop = std::min<std::int64_t>(start + spec.batch_size, count);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      for (int l = 0; l < layers; ++l) {
        std::fill(gw[static_cast<std::size_t>(l)].begin(), gw[static_cast<std::size_t>(l)].end(), 0.0);
        std::fill(gb[static_cast<std::size_t>(l)].begin(), gb[static_cast<std::size_t>(l)].end(), 0.0);
      }

      for (std::int64_t pos = start; pos < stop; ++pos) {
        const LabeledSample& sample = train[order[static_cast<std::size_t>(pos)]];
        // forward with retained activations
        work.acts[0].assign(sample.features.begin(), sample.features.end());
        for (int l = 0; l < layers; ++l) {
          const auto& layer = model.layers_[static_cast<std::size_t>(l)];
          const bool last = l + 1 == layers;
          auto& out = work.acts[static_cast<std::size_t>(l) + 1];
          out.assign(static_cast<std::size_t>(layer.out), 0.0);
          const auto& in = work.acts[static_cast<std::size_t>(l)];
          for (int o = 0; o < layer.out; ++o) {
            const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
            double z = layer.b[static_cast<std::size_t>(o)];
            for (int i = 0; i < layer.in; ++i) z += row[i] * in[static_cast<std::size_t>(i)];
            if (last)
              out[static_cast<std::size_t>(o)] = model.task_.is_classification() ? sigmoid(z) : z;
            else
              out[static_cast<std::size_t>(o)] = std::tanh(z);
          }
        }

        // output error: sigmoid+cross-entropy and linear+squared both give (score - y)
        auto& dout = work.delta[static_cast<std::size_t>(layers) - 1];
        const auto& scores = work.acts[static_cast<std::size_t>(layers)];
        dout.assign(scores.size(), 0.0);
        if (model.task_.is_classification()) {
          const int label = static_cast<int>(sample.target);
          for (std::size_t c = 0; c < scores.size(); ++c)
            dout[c] = scores[c] - (static_cast<int>(c) == label ? 1.0 : 0.0);
        } else {
          dout[0] = scores[0] - sample.target;
        }

        for (int l = layers - 1; l >= 0; --l) {
          const auto& layer = model.layers_[static_cast<std::size_t>(l)];
          const auto& in = work.acts[static_cast<std::size_t>(l)];
          const auto& d = work.delta[static_cast<std::size_t>(l)];
          auto& layer_gw = gw[static_cast<std::size_t>(l)];
          auto& layer_gb = gb[static_cast<std::size_t>(l)];
          for (int o = 0; o < layer.out; ++o) {
            const double dv = d[static_cast<std::size_t>(o)];
            double* grow = layer_gw.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) grow[i] += dv * in[static_cast<std::size_t>(i)];
            layer_gb[static_cast<std::size_t>(o)] += dv;
          }
          if (l > 0) {
            auto& dprev = work.delta[static_cast<std::size_t>(l) - 1];
            dprev.assign(in.size(), 0.0);
            for (int o = 0; o < layer.out; ++o) {
              const double dv = d[static_cast<std::size_t>(o)];
              const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
              for (int i = 0; i < layer.in; ++i) dprev[static_cast<std::size_t>(i)] += dv * row[i];
            }
            for (std::size_t i = 0; i < dprev.size(); ++i) {
              const double a = in[i];
              dprev[i] *= 1.0 - a * a;  // tanh'
            }
          }
        }
      }

      for (int l = 0; l < layers; ++l) {
        auto& layer = model.layers_[static_cast<std::size_t>(l)];
        const auto& layer_gw = gw[static_cast<std::size_t>(l)];
        const auto& layer_gb = gb[static_cast<std::size_t>(l)];
        for (std::size_t i = 0; i < layer.w.size(); ++i)
          layer.w[i] -= spec.learning_rate * (layer_gw[i] * inv_batch + spec.l2 * layer.w[i]);
        for (std::size_t i = 0; i < layer.b.size(); ++i)
          layer.b[i] -= spec.learning_rate * layer_gb[i] * inv_batch;
      }
    }
  }
  return model;
}

double subset_risk(const TrainedModel& model, const SampleWindow& window, FeatureSubset s,
                   LossKind kind) {
  if (model.layers_.empty()) fail(ErrorKind::protocol, "subset_risk: model has not been fitted");
  if (window.empty()) fail(ErrorKind::insufficient_data, "subset_risk: empty window");
  if (window.dim() != model.input_dim_)
    fail(ErrorKind::dimension, "subset_risk: window width does not match the model");
  if (s.highest() >= model.input_dim_)
    fail(ErrorKind::dimension, "subset_risk: subset references index past the feature width");
  if (model.task_.is_classification() != (kind == LossKind::zero_one))
    fail(ErrorKind::protocol, "subset_risk: loss kind does not match the task");

  std::vector<double> masked(static_cast<std::size_t>(window.dim()));
  std::vector<double> out, scratch;
  double total = 0.0;
  for (std::int64_t i = 0; i < window.size(); ++i) {
    const LabeledSample& sample = window[i];
    for (int j = 0; j < window.dim(); ++j)
      masked[static_cast<std::size_t>(j)] =
          s.contains(j) ? sample.features[static_cast<std::size_t>(j)] : 0.0;
    model.forward_scores(masked, out, scratch);
    const double prediction = model.task_.is_classification()
                                  ? static_cast<double>(TrainedModel::argmax_lowest(out))
                                  : out[0];
    total += loss(kind, prediction, sample.target);
  }
  return total / static_cast<double>(window.size());
}

std::pair<double, std::vector<double>> training_objective_with_gradient(
    const TrainedModel& model, const SampleWindow& batch) {
  if (model.layers_.empty())
    fail(ErrorKind::protocol, "training_objective_with_gradient: model has not been fitted");
  if (batch.empty()) fail(ErrorKind::insufficient_data, "training_objective_with_gradient: empty batch");
  if (batch.dim() != model.input_dim_)
    fail(ErrorKind::dimension, "training_objective_with_gradient: width mismatch");
  check_samples(batch, model.task_);

  const int layers = static_cast<int>(model.layers_.size());
  std::vector<std::vector<double>> acts(static_cast<std::size_t>(layers) + 1);
  std::vector<std::vector<double>> delta(static_cast<std::size_t>(layers));
  std::vector<std::vector<double>> gw(static_cast<std::size_t>(layers));
  std::vector<std::vector<double>> gb(static_cast<std::size_t>(layers));
  for (int l = 0; l < layers; ++l) {
    gw[static_cast<std::size_t>(l)].assign(model.layers_[static_cast<std::size_t>(l)].w.size(), 0.0);
    gb[static_cast<std::size_t>(l)].assign(model.layers_[static_cast<std::size_t>(l)].b.size(), 0.0);
  }

  const double inv_count = 1.0 / static_cast<double>(batch.size());
  double objective = 0.0;
  for (std::int64_t n = 0; n < batch.size(); ++n) {
    const LabeledSample& sample = batch[n];
    acts[0].assign(sample.features.begin(), sample.features.end());
    for (int l = 0; l < layers; ++l) {
      const auto& layer = model.layers_[static_cast<std::size_t>(l)];
      const bool last = l + 1 == layers;
      auto& out = acts[static_cast<std::size_t>(l) + 1];
      out.assign(static_cast<std::size_t>(layer.out), 0.0);
      const auto& in = acts[static_cast<std::size_t>(l)];
      for (int o = 0; o < layer.out; ++o) {
        const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
        double z = layer.b[static_cast<std::size_t>(o)];
        for (int i = 0; i < layer.in; ++i) z += row[i] * in[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(o)] =
            last ? (model.task_.is_classification() ? sigmoid(z) : z) : std::tanh(z);
      }
    }

    const auto& scores = acts[static_cast<std::size_t>(layers)];
    auto& dout = delta[static_cast<std::size_t>(layers) - 1];
    dout.assign(scores.size(), 0.0);
    if (model.task_.is_classification()) {
      const int label = static_cast<int>(sample.target);
      for (std::size_t c = 0; c < scores.size(); ++c) {
        const double y = static_cast<int>(c) == label ? 1.0 : 0.0;
        const double p = std::min(std::max(scores[c], 1e-12), 1.0 - 1e-12);
        objective += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p)) * inv_count;
        dout[c] = scores[c] - y;
      }
    } else {
      const double e = scores[0] - sample.target;
      objective += 0.5 * e * e * inv_count;
      dout[0] = e;
    }

    for (int l = layers - 1; l >= 0; --l) {
      const auto& layer = model.layers_[static_cast<std::size_t>(l)];
      const auto& in = acts[static_cast<std::size_t>(l)];
      const auto& d = delta[static_cast<std::size_t>(l)];
      for (int o = 0; o < layer.out; ++o) {
        const double dv = d[static_cast<std::size_t>(o)] * inv_count;
        double* grow = gw[static_cast<std::size_t>(l)].data() + static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) grow[i] += dv * in[static_cast<std::size_t>(i)];
        gb[static_cast<std::size_t>(l)][static_cast<std::size_t>(o)] += dv;
      }
      if (l > 0) {
        auto& dprev = delta[static_cast<std::size_t>(l) - 1];
        dprev.assign(in.size(), 0.0);
        for (int o = 0; o < layer.out; ++o) {
          const double dv = d[static_cast<std::size_t>(o)];
          const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
          for (int i = 0; i < layer.in; ++i) dprev[static_cast<std::size_t>(i)] += dv * row[i];
        }
        for (std::size_t i = 0; i < dprev.size(); ++i) {
          const double a = in[i];
          dprev[i] *= 1.0 - a * a;
        }
      }
    }
  }

  // l2 penalty on weights only
  const double l2 = model.spec_.l2;
  std::vector<double> flat;
  for (int l = 0; l < layers; ++l) {
    const auto& layer = model.layers_[static_cast<std::size_t>(l)];
    if (l2 > 0.0)
      for (double w : layer.w) objective += 0.5 * l2 * w * w;
    auto& layer_gw = gw[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < layer.w.size(); ++i) layer_gw[i] += l2 * layer.w[i];
    flat.insert(flat.end(), layer_gw.begin(), layer_gw.end());
    flat.insert(flat.end(), gb[static_cast<std::size_t>(l)].begin(), gb[static_cast<std::size_t>(l)].end());
  }
  return {objective, flat};
}

}  // namespace drift
