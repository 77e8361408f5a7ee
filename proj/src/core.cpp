#include "drift/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace drift {

LossKind loss_for(const TaskKind& task) {
  return task.is_classification() ? LossKind::zero_one : LossKind::squared;
}

double loss(LossKind kind, double prediction, double target) {
  if (!std::isfinite(prediction)) fail(ErrorKind::data, "loss: non-finite prediction");
  if (!std::isfinite(target)) fail(ErrorKind::data, "loss: non-finite target");
  switch (kind) {
    case LossKind::zero_one:
      return std::llround(prediction) == std::llround(target) ? 0.0 : 1.0;
    case LossKind::squared: {
      const double e = prediction - target;
      return e * e;
    }
  }
  fail(ErrorKind::protocol, "loss: unknown loss kind");
}

SampleWindow::SampleWindow(std::vector<LabeledSample> samples, std::int64_t start_index)
    : samples_(std::move(samples)), start_index_(start_index) {
  if (samples_.empty()) return;
  dim_ = static_cast<int>(samples_.front().features.size());
  for (const auto& s : samples_) {
    if (static_cast<int>(s.features.size()) != dim_)
      fail(ErrorKind::dimension, "SampleWindow: ragged feature widths");
  }
}

SampleWindow SampleWindow::slice(std::span<const LabeledSample> stream, std::int64_t start,
                                 std::int64_t count) {
  if (start < 0 || count < 0 || start + count > static_cast<std::int64_t>(stream.size()))
    fail(ErrorKind::protocol, "SampleWindow::slice: range outside the stream");
  std::vector<LabeledSample> part(stream.begin() + start, stream.begin() + start + count);
  return SampleWindow(std::move(part), start);
}

FeatureSubset FeatureSubset::all(int dim) {
  if (dim < 0 || dim > max_dim)
    fail(ErrorKind::dimension, "FeatureSubset::all: dim outside [0, 64]");
  if (dim == 0) return FeatureSubset{};
  if (dim == max_dim) return FeatureSubset{~0ULL};
  return FeatureSubset{(1ULL << dim) - 1};
}

FeatureSubset FeatureSubset::of(std::initializer_list<int> indices) {
  FeatureSubset s;
  for (int k : indices) s = s.with(k);
  return s;
}

FeatureSubset FeatureSubset::from_indices(std::span<const int> indices) {
  FeatureSubset s;
  for (int k : indices) s = s.with(k);
  return s;
}

FeatureSubset FeatureSubset::with(int k) const {
  if (k < 0 || k >= max_dim)
    fail(ErrorKind::dimension, "FeatureSubset: index outside [0, 64)");
  return FeatureSubset{bits_ | (1ULL << k)};
}

FeatureSubset FeatureSubset::without(int k) const {
  if (k < 0 || k >= max_dim)
    fail(ErrorKind::dimension, "FeatureSubset: index outside [0, 64)");
  return FeatureSubset{bits_ & ~(1ULL << k)};
}

std::vector<int> FeatureSubset::indices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count()));
  for (int k = 0; k < max_dim; ++k)
    if ((bits_ >> k) & 1u) out.push_back(k);
  return out;
}

std::vector<double> mask(std::span<const double> x, FeatureSubset s) {
  if (s.highest() >= static_cast<int>(x.size()))
    fail(ErrorKind::dimension, "mask: subset references index past the feature width");
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (s.contains(static_cast<int>(i))) out[i] = x[i];
  return out;
}

void ModelSpec::validate() const {
  if (arch == Arch::mlp) {
    if (hidden.empty()) fail(ErrorKind::config, "config key \"hidden\": mlp needs at least one layer");
    for (int h : hidden)
      if (h < 1) fail(ErrorKind::config, "config key \"hidden\": layer widths must be >= 1");
  }
  if (epochs < 1) fail(ErrorKind::config, "config key \"epochs\": must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    fail(ErrorKind::config, "config key \"lr\": must be a positive real");
  if (batch_size < 1) fail(ErrorKind::config, "config key \"batch\": must be >= 1");
  if (l2 < 0.0 || !std::isfinite(l2)) fail(ErrorKind::config, "config key \"l2\": must be >= 0");
}

void DetectorConfig::validate() const {
  if (n < 2) fail(ErrorKind::config, "config key \"n\": must be >= 2");
  if (!(r > 0.0 && r < 1.0)) fail(ErrorKind::config, "config key \"r\": must lie in (0, 1)");
  if (train_count() < 1) fail(ErrorKind::config, "config key \"r\": floor(n*r) must be >= 1");
  if (window_count() < 1) fail(ErrorKind::config, "config key \"r\": n - floor(n*r) must be >= 1");
  if (delta < 1 || delta > n)
    fail(ErrorKind::config, "config key \"delta\": must lie in [1, n]");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::config, "config key \"alpha\": must lie in (0, 1)");
  if (bootstrap_k < 1) fail(ErrorKind::config, "config key \"K\": must be >= 1");
  if (subset_budget < 0) fail(ErrorKind::config, "config key \"subset_budget\": must be >= 0");
  if (task.is_classification() && task.classes < 2)
    fail(ErrorKind::config, "config key \"task\": classification needs >= 2 classes");
  model.validate();
}

Standardizer Standardizer::fit(std::span<const LabeledSample> stream, std::int64_t count) {
  if (count < 1 || count > static_cast<std::int64_t>(stream.size()))
    fail(ErrorKind::insufficient_data, "Standardizer::fit: invalid fitting block");
  const int dim = static_cast<int>(stream.front().features.size());
  Standardizer st;
  st.mean.assign(static_cast<std::size_t>(dim), 0.0);
  st.scale.assign(static_cast<std::size_t>(dim), 1.0);
  for (std::int64_t i = 0; i < count; ++i) {
    const auto& f = stream[static_cast<std::size_t>(i)].features;
    if (static_cast<int>(f.size()) != dim)
      fail(ErrorKind::dimension, "Standardizer::fit: ragged feature widths");
    for (int j = 0; j < dim; ++j) st.mean[static_cast<std::size_t>(j)] += f[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < dim; ++j) st.mean[static_cast<std::size_t>(j)] /= static_cast<double>(count);
  std::vector<double> var(static_cast<std::size_t>(dim), 0.0);
  for (std::int64_t i = 0; i < count; ++i) {
    const auto& f = stream[static_cast<std::size_t>(i)].features;
    for (int j = 0; j < dim; ++j) {
      const double d = f[static_cast<std::size_t>(j)] - st.mean[static_cast<std::size_t>(j)];
      var[static_cast<std::size_t>(j)] += d * d;
    }
  }
  for (int j = 0; j < dim; ++j) {
    const double v = var[static_cast<std::size_t>(j)] / static_cast<double>(count);
    st.scale[static_cast<std::size_t>(j)] = v > 1e-24 ? std::sqrt(v) : 1.0;
  }
  return st;
}

LabeledSample Standardizer::apply(const LabeledSample& s) const {
  if (s.features.size() != mean.size())
    fail(ErrorKind::dimension, "Standardizer::apply: feature width mismatch");
  LabeledSample out;
  out.target = s.target;
  out.features.resize(s.features.size());
  for (std::size_t j = 0; j < s.features.size(); ++j)
    out.features[j] = (s.features[j] - mean[j]) / scale[j];
  return out;
}

std::vector<LabeledSample> Standardizer::apply_all(std::span<const LabeledSample> stream) const {
  std::vector<LabeledSample> out;
  out.reserve(stream.size());
  for (const auto& s : stream) out.push_back(apply(s));
  return out;
}

int max_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("DRIFT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1) hw = std::min(hw, static_cast<int>(v));
  }
  return hw;
}

void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  const int workers = static_cast<int>(std::min<std::int64_t>(max_threads(), count));
  if (workers <= 1 || count < 4) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::exception_ptr first_error;
  std::mutex error_lock;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = count * w / workers;
    const std::int64_t hi = count * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> hold(error_lock);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace drift
