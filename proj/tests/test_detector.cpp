#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "doctest.h"
#include "drift/datagen.hpp"
#include "drift/detector.hpp"
#include "drift/rng.hpp"

using namespace drift;

namespace {

std::vector<LabeledSample> d1_stream(int length, std::vector<std::int64_t> drifts,
                                     std::uint64_t seed) {
  StreamSpec spec;
  spec.generator = Generator::d1;
  spec.length = length;
  spec.drift_points = std::move(drifts);
  spec.seed = seed;
  return generate(spec).samples;
}

// one-feature binary scorer: class-1 score x, class-0 score 0, ties to 0
TrainedModel step_classifier() {
  std::vector<LabeledSample> tiny{{{1.0}, 1.0}, {{-1.0}, 0.0}, {{2.0}, 1.0}, {{-2.0}, 0.0}};
  ModelSpec spec;
  spec.arch = ModelSpec::Arch::linear;
  spec.epochs = 1;
  spec.batch_size = 4;
  TrainedModel model = fit(SampleWindow(tiny), spec, TaskKind::classification(2), 0);
  return model.with_parameters(std::vector<double>{0.0, 1.0, 0.0, 0.0});
}

TrainedModel constant_regressor(double value) {
  std::vector<LabeledSample> tiny{{{1.0}, 1.0}, {{-1.0}, 0.0}, {{0.5}, 2.0}, {{2.0}, 1.5}};
  ModelSpec spec;
  spec.arch = ModelSpec::Arch::linear;
  spec.epochs = 1;
  spec.batch_size = 4;
  TrainedModel model = fit(SampleWindow(tiny), spec, TaskKind::regression(), 0);
  return model.with_parameters(std::vector<double>{0.0, value});
}

SampleWindow window_1d(std::vector<std::pair<double, double>> rows) {
  std::vector<LabeledSample> samples;
  for (const auto& [x, y] : rows) samples.push_back({{x}, y});
  return SampleWindow(std::move(samples));
}

DetectorConfig small_config() {
  DetectorConfig config;
  config.n = 500;
  config.delta = 250;
  config.bootstrap_k = 60;
  config.subset_budget = 0;
  config.model.hidden = {8};
  config.model.epochs = 80;
  return config;
}

// replay the cursor walk implied by the event list and count iterations
void check_cursor_walk(const DetectionTrace& trace) {
  std::int64_t cursor = trace.config.n;
  std::int64_t iterations = 0;
  std::size_t next_event = 0;
  while (cursor + trace.config.n <= trace.stream_length) {
    ++iterations;
    if (next_event < trace.events.size() &&
        trace.events[next_event].stream_index == cursor) {
      cursor += trace.config.n;
      ++next_event;
    } else {
      cursor += trace.config.delta;
    }
  }
  CHECK(next_event == trace.events.size());
  CHECK(std::int64_t(trace.performance.size()) == iterations);
}

}  // namespace

TEST_CASE("performance metric counts correct classifications") {
  const TrainedModel model = step_classifier();
  const TaskKind task = TaskKind::classification(2);

  const SampleWindow three_of_four =
      window_1d({{1.0, 1.0}, {-1.0, 0.0}, {2.0, 1.0}, {3.0, 0.0}});
  CHECK(performance_metric(model, three_of_four, task) == 0.75);

  const SampleWindow all_right = window_1d({{1.0, 1.0}, {-1.0, 0.0}});
  CHECK(performance_metric(model, all_right, task) == 1.0);

  CHECK_THROWS_AS(performance_metric(model, SampleWindow{}, task), Error);
  CHECK_THROWS_AS(performance_metric(model, three_of_four, TaskKind::regression()), Error);
}

TEST_CASE("performance metric is R^2 for regression without clamping") {
  const SampleWindow targets =
      window_1d({{0.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}, {3.0, 4.0}});

  // predicting the target mean exactly zeroes the score
  CHECK(performance_metric(constant_regressor(2.5), targets, TaskKind::regression()) == 0.0);

  // predicting far away goes negative
  CHECK(performance_metric(constant_regressor(50.0), targets, TaskKind::regression()) < 0.0);

  const SampleWindow flat = window_1d({{0.0, 3.0}, {1.0, 3.0}, {2.0, 3.0}});
  try {
    performance_metric(constant_regressor(3.0), flat, TaskKind::regression());
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::data);
  }
}

TEST_CASE("a check against an identical window never flags") {
  const std::vector<LabeledSample> stream = d1_stream(300, {}, 5);
  const SampleWindow train = SampleWindow::slice(stream, 0, 200);
  const SampleWindow zr = SampleWindow::slice(stream, 200, 100);
  DetectorConfig config = small_config();
  const TrainedModel model = fit(train, config.model, config.task, 1);
  const SubsetPlan plan = build_subset_plan(3, 0, 0);

  const std::vector<FeatureTestResult> tests = check_window(model, zr, zr, config, plan, 9);
  REQUIRE(tests.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(tests[std::size_t(k)].feature == k);
    CHECK(tests[std::size_t(k)].statistic == 0.0);
    CHECK(tests[std::size_t(k)].threshold >= 0.0);
    CHECK_FALSE(tests[std::size_t(k)].flagged);
  }
}

TEST_CASE("window checks flag the interaction change and spare the bystander") {
  const int half = 400;
  const std::vector<LabeledSample> stream = d1_stream(2 * half, {half}, 77);
  const SampleWindow train = SampleWindow::slice(stream, 0, 300);
  const SampleWindow zr = SampleWindow::slice(stream, 300, 100);
  const SampleWindow zn = SampleWindow::slice(stream, half, 100);
  DetectorConfig config = small_config();
  config.bootstrap_k = 100;
  const TrainedModel model = fit(train, config.model, config.task, 2);
  const SubsetPlan plan = build_subset_plan(3, 0, 0);

  const std::vector<FeatureTestResult> tests = check_window(model, zr, zn, config, plan, 31);
  REQUIRE(tests.size() == 3);
  for (const FeatureTestResult& t : tests) CHECK(t.flagged == (t.statistic > t.threshold));
  CHECK(tests[0].flagged);
  CHECK(tests[1].flagged);
  CHECK_FALSE(tests[2].flagged);

  const SampleWindow shorter = SampleWindow::slice(stream, half, 60);
  CHECK_THROWS_AS(check_window(model, zr, shorter, config, plan, 0), Error);
}

TEST_CASE("the detector finds a single planted change and explains it") {
  const std::vector<LabeledSample> stream = d1_stream(2000, {1000}, 404);
  DetectorConfig config = small_config();
  config.seed = 6;

  const DetectionTrace trace = run_detector(stream, config);
  REQUIRE(trace.events.size() == 1);
  CHECK(trace.events[0].stream_index == 1000);
  CHECK_FALSE(trace.events[0].flagged_features.empty());
  for (const int k : trace.events[0].flagged_features) CHECK(k <= 1);
  for (const FeatureTestResult& t : trace.events[0].tests)
    if (t.feature == 2) CHECK_FALSE(t.flagged);
  check_cursor_walk(trace);
  for (const double p : trace.performance) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("a stationary stream stays quiet") {
  const std::vector<LabeledSample> stream = d1_stream(2000, {}, 2024);
  DetectorConfig config = small_config();
  config.seed = 3;

  const DetectionTrace trace = run_detector(stream, config);
  CHECK(trace.events.empty());
  CHECK(trace.performance.size() == 5);
  for (const double p : trace.performance) CHECK(p >= 0.9);
  check_cursor_walk(trace);
}

TEST_CASE("detection runs are reproducible") {
  const std::vector<LabeledSample> stream = d1_stream(1600, {800}, 12);
  DetectorConfig config = small_config();
  config.seed = 42;

  const DetectionTrace a = run_detector(stream, config);
  const DetectionTrace b = run_detector(stream, config);
  CHECK(a.performance == b.performance);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].stream_index == b.events[i].stream_index);
    CHECK(a.events[i].flagged_features == b.events[i].flagged_features);
    for (std::size_t k = 0; k < a.events[i].tests.size(); ++k) {
      CHECK(a.events[i].tests[k].statistic == b.events[i].tests[k].statistic);
      CHECK(a.events[i].tests[k].threshold == b.events[i].tests[k].threshold);
    }
  }
}

TEST_CASE("the observer sees the pre-retrain model and windows") {
  struct Probe : DetectorObserver {
    std::vector<std::int64_t> event_at, zr_at, zn_at, zr_size;
    void on_event(const DriftEvent& event, const TrainedModel&, const SampleWindow& zr,
                  const SampleWindow& zn_prefix) override {
      event_at.push_back(event.stream_index);
      zr_at.push_back(zr.start_index());
      zn_at.push_back(zn_prefix.start_index());
      zr_size.push_back(zr.size());
    }
  };

  const std::vector<LabeledSample> stream = d1_stream(2000, {1000}, 404);
  DetectorConfig config = small_config();
  config.seed = 6;

  Probe probe;
  const DetectionTrace trace = run_detector(stream, config, &probe);
  REQUIRE(trace.events.size() == 1);
  REQUIRE(probe.event_at.size() == 1);
  CHECK(probe.event_at[0] == trace.events[0].stream_index);
  CHECK(probe.zr_at[0] == 400);
  CHECK(probe.zn_at[0] == trace.events[0].stream_index);
  CHECK(probe.zr_size[0] == config.window_count());
}

TEST_CASE("the detector rejects malformed streams") {
  DetectorConfig config = small_config();

  std::vector<LabeledSample> short_stream = d1_stream(999, {}, 0);
  CHECK_THROWS_AS(run_detector(short_stream, config), Error);

  std::vector<LabeledSample> poisoned = d1_stream(1200, {}, 0);
  poisoned[1100].features[1] = std::numeric_limits<double>::quiet_NaN();
  try {
    run_detector(poisoned, config);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::data);
  }

  std::vector<LabeledSample> ragged = d1_stream(1200, {}, 0);
  ragged[700].features.pop_back();
  try {
    run_detector(ragged, config);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
  }
}

TEST_CASE("stream preparation standardizes only when asked") {
  const std::vector<LabeledSample> stream = d1_stream(1200, {}, 9);
  DetectorConfig config = small_config();

  const std::vector<LabeledSample> untouched = prepare_stream(stream, config);
  REQUIRE(untouched.size() == stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    CHECK(untouched[i].features == stream[i].features);
    CHECK(untouched[i].target == stream[i].target);
  }

  config.standardize = true;
  const std::vector<LabeledSample> scaled = prepare_stream(stream, config);
  const int nr = config.train_count();
  for (int j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (int i = 0; i < nr; ++i) mean += scaled[std::size_t(i)].features[std::size_t(j)];
    mean /= double(nr);
    CHECK(std::fabs(mean) < 1e-12);
  }
  for (std::size_t i = 0; i < stream.size(); ++i)
    CHECK(scaled[i].target == stream[i].target);
}

TEST_CASE("regression streams flow through the same loop") {
  StreamSpec spec;
  spec.generator = Generator::friedmann;
  spec.length = 900;
  spec.seed = 17;
  const GeneratedStream stream = generate(spec);

  DetectorConfig config;
  config.n = 300;
  config.delta = 150;
  config.bootstrap_k = 40;
  config.subset_budget = 0;
  config.task = TaskKind::regression();
  config.model.hidden = {8};
  config.model.epochs = 60;
  config.seed = 2;

  const DetectionTrace trace = run_detector(stream.samples, config);
  check_cursor_walk(trace);
  REQUIRE_FALSE(trace.performance.empty());
  for (const double p : trace.performance) {
    CHECK(std::isfinite(p));
    CHECK(p <= 1.0);
  }
}
