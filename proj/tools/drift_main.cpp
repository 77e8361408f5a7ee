#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "drift/baselines.hpp"
#include "drift/report.hpp"
#include "drift/rng.hpp"

namespace {

using namespace drift;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string_view trimmed(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

void apply_config_file(DetectorConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::data, "cannot open config file " + path);
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trimmed(line);
    if (row.empty() || row.front() == '#') continue;
    const std::size_t eq = row.find('=');
    if (eq == std::string_view::npos || eq == 0)
      fail(ErrorKind::config,
           path + " line " + std::to_string(line_no) + ": expected key=value");
    apply_config_key(config, trimmed(row.substr(0, eq)), trimmed(row.substr(eq + 1)));
  }
}

void apply_override(DetectorConfig& config, const std::string& kv) {
  const std::size_t eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    fail(ErrorKind::usage, "--set expects key=value, got \"" + kv + "\"");
  apply_config_key(config, trimmed(std::string_view(kv).substr(0, eq)),
                   trimmed(std::string_view(kv).substr(eq + 1)));
}

std::vector<std::int64_t> parse_drift_list(const std::string& text, std::int64_t length) {
  if (text == "none" || text.empty()) return {};
  if (text == "mid") return {length / 2};
  std::vector<std::int64_t> points;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item = trimmed(
        std::string_view(text).substr(start, comma == std::string::npos ? text.size() - start
                                                                        : comma - start));
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc{} || ptr != item.data() + item.size())
      fail(ErrorKind::usage, "--drifts: cannot parse index \"" + std::string(item) + "\"");
    points.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return points;
}

EventRecord to_record(const DriftEvent& event) {
  EventRecord record;
  record.stream_index = event.stream_index;
  record.flagged_features = event.flagged_features;
  record.statistics.reserve(event.tests.size());
  record.thresholds.reserve(event.tests.size());
  for (const FeatureTestResult& t : event.tests) {
    record.statistics.push_back(t.statistic);
    record.thresholds.push_back(t.threshold);
  }
  return record;
}

std::vector<std::int64_t> event_indices(const DetectionTrace& trace) {
  std::vector<std::int64_t> indices;
  indices.reserve(trace.events.size());
  for (const DriftEvent& event : trace.events) indices.push_back(event.stream_index);
  return indices;
}

// ------------------------------------------------------------------- run

struct RunOptions {
  std::string config_path;
  std::string gen_name;
  std::string csv_path;
  std::string truth_path;
  std::string out_path;
  std::vector<std::string> overrides;
  std::int64_t length = 4000;
  std::string drifts = "mid";
  double noise = 0.0;
  bool occlusion = false;
};

int cmd_run(const RunOptions& opt) {
  const auto started = std::chrono::steady_clock::now();
  if (opt.gen_name.empty() == opt.csv_path.empty())
    fail(ErrorKind::usage, "run needs exactly one of --gen or --csv");

  DetectorConfig config;
  if (!opt.config_path.empty()) apply_config_file(config, opt.config_path);
  for (const std::string& kv : opt.overrides) apply_override(config, kv);

  std::vector<LabeledSample> raw;
  std::vector<std::int64_t> truth_points;
  bool have_truth = false;
  std::string source;
  if (!opt.gen_name.empty()) {
    StreamSpec spec;
    spec.generator = generator_from_name(opt.gen_name);
    spec.length = opt.length;
    spec.drift_points = parse_drift_list(opt.drifts, opt.length);
    spec.noise = opt.noise;
    spec.seed = config.seed;
    GeneratedStream gen = generate(spec);
    raw = std::move(gen.samples);
    truth_points = gen.truth.drift_points;
    have_truth = true;
    config.task = gen.task;  // the generator decides the task
    source = "gen:" + std::string(opt.gen_name);
  } else {
    raw = load_csv(opt.csv_path, config.task);
    source = "csv:" + opt.csv_path;
  }
  if (!opt.truth_path.empty()) {
    truth_points = load_truth(opt.truth_path);
    have_truth = true;
  }
  config.validate();

  const std::vector<LabeledSample> stream = prepare_stream(raw, config);
  SnapshotRecorder recorder;
  const DetectionTrace trace =
      run_detector(stream, config, opt.occlusion ? &recorder : nullptr);

  RunReport report;
  report.source = source;
  report.config = config;
  report.stream_length = trace.stream_length;
  for (const DriftEvent& event : trace.events) report.events.push_back(to_record(event));
  report.performance = trace.performance;
  if (have_truth)
    report.detection = detection_pr(event_indices(trace), truth_points, config.n / 2);
  if (opt.occlusion && !recorder.snapshots().empty())
    report.occlusion = occlusion_mean(recorder.snapshots(), config.task);
  report.wall_seconds = seconds_since(started);

  const std::string text = format_report(report);
  std::cout << text;
  if (!opt.out_path.empty()) {
    std::ofstream out(opt.out_path);
    if (!out) fail(ErrorKind::data, "cannot open " + opt.out_path);
    out << text;
    if (!out) fail(ErrorKind::data, "write failed for " + opt.out_path);
  }
  return 0;
}

// ------------------------------------------------------------------ bench

struct BenchDataset {
  Generator generator;
  bool standardize;
  double noise;
  bool with_drift;
};

constexpr std::int64_t kBenchLength = 4000;
constexpr std::int64_t kBenchDrift = 2000;

const std::vector<BenchDataset>& detection_roster() {
  static const std::vector<BenchDataset> roster{
      {Generator::sine, false, 0.0, true},
      {Generator::sine_imbalance, false, 0.0, true},
      {Generator::sea, true, 0.05, true},
      {Generator::sea_gradual, true, 0.05, true},
      {Generator::mixed, false, 0.0, true},
      {Generator::aug_mixed, false, 0.0, true},
      {Generator::agrawal, true, 0.0, true},
      {Generator::agrawal_imbalance, true, 0.0, true},
      {Generator::hyperplane, false, 0.0, false},
      {Generator::friedmann, false, 0.0, true},
      {Generator::d1, false, 0.0, true},
      {Generator::d2, false, 0.0, true},
  };
  return roster;
}

DetectorConfig bench_config(std::uint64_t seed, const std::vector<std::string>& overrides) {
  DetectorConfig config;
  config.n = 1000;
  config.delta = 250;
  config.seed = seed;
  for (const std::string& kv : overrides) apply_override(config, kv);
  return config;
}

GeneratedStream bench_stream(const BenchDataset& dataset, std::uint64_t seed) {
  StreamSpec spec;
  spec.generator = dataset.generator;
  spec.length = kBenchLength;
  if (dataset.with_drift) spec.drift_points = {kBenchDrift};
  spec.noise = dataset.noise;
  spec.seed = seed;
  return generate(spec);
}

std::string metric3(double value) { return format_double(value); }

void bench_detection_row(const std::string& dataset, const std::string& method,
                         const DetectionTrace& trace, const GroundTruth& truth, int tolerance) {
  const double perf = average_performance(trace);
  std::string p = "-", r = "-";
  if (!truth.drift_points.empty()) {
    const DetectionScore score =
        detection_pr(event_indices(trace), truth.drift_points, tolerance);
    p = metric3(score.precision);
    r = metric3(score.recall);
  }
  std::cout << "row: " << dataset << ' ' << method << ' ' << metric3(perf) << ' ' << p << ' '
            << r << ' ' << trace.events.size() << '\n';
}

int cmd_bench_detection(std::uint64_t seed, const std::vector<std::string>& overrides) {
  std::cout << "bench: detection\nseed: " << seed
            << "\ncolumns: dataset method perf precision recall events\n";
  std::uint64_t index = 0;
  for (const BenchDataset& dataset : detection_roster()) {
    const std::string name(generator_name(dataset.generator));
    DetectorConfig config = bench_config(derive_seed(seed, index++), overrides);
    config.task = generator_task(dataset.generator);
    config.standardize = dataset.standardize;

    const GeneratedStream gen = bench_stream(dataset, config.seed);
    const std::vector<LabeledSample> stream = prepare_stream(gen.samples, config);
    const int tolerance = config.n / 2;

    auto started = std::chrono::steady_clock::now();
    bench_detection_row(name, "interaction", run_detector(stream, config), gen.truth, tolerance);
    std::cerr << "[bench] " << name << " interaction " << seconds_since(started) << "s\n";

    started = std::chrono::steady_clock::now();
    bench_detection_row(name, "marginal", run_marginal_detector(stream, config), gen.truth,
                        tolerance);
    std::cerr << "[bench] " << name << " marginal " << seconds_since(started) << "s\n";

    if (config.task.is_classification()) {
      started = std::chrono::steady_clock::now();
      bench_detection_row(name, "ddm", run_ddm_detector(stream, config), gen.truth, tolerance);
      std::cerr << "[bench] " << name << " ddm " << seconds_since(started) << "s\n";
    } else {
      std::cout << "row: " << name << " ddm - - - -\n";
    }
  }
  return 0;
}

const std::vector<BenchDataset>& occlusion_roster() {
  static const std::vector<BenchDataset> roster{
      {Generator::sine, false, 0.0, true},
      {Generator::sine_imbalance, false, 0.0, true},
      {Generator::mixed, false, 0.0, true},
      {Generator::aug_mixed, false, 0.0, true},
      {Generator::sea, true, 0.05, true},
      {Generator::sea_gradual, true, 0.05, true},
      {Generator::hyperplane, false, 0.0, false},
      {Generator::d1, false, 0.0, true},
      {Generator::d2, false, 0.0, true},
      {Generator::friedmann, false, 0.0, true},
  };
  return roster;
}

int cmd_bench_occlusion(std::uint64_t seed, const std::vector<std::string>& overrides) {
  std::cout << "bench: occlusion\nseed: " << seed
            << "\ncolumns: dataset events occlusion\n";
  std::uint64_t index = 0;
  for (const BenchDataset& dataset : occlusion_roster()) {
    const std::string name(generator_name(dataset.generator));
    DetectorConfig config = bench_config(derive_seed(seed, index++), overrides);
    config.task = generator_task(dataset.generator);
    config.standardize = dataset.standardize;

    const GeneratedStream gen = bench_stream(dataset, config.seed);
    const std::vector<LabeledSample> stream = prepare_stream(gen.samples, config);

    const auto started = std::chrono::steady_clock::now();
    SnapshotRecorder recorder;
    run_detector(stream, config, &recorder);
    const std::size_t events = recorder.snapshots().size();
    std::cout << "row: " << name << ' ' << events << ' '
              << (events > 0 ? metric3(occlusion_mean(recorder.snapshots(), config.task)) : "-")
              << '\n';
    std::cerr << "[bench] " << name << ' ' << seconds_since(started) << "s\n";
  }
  return 0;
}

int cmd_bench_power(std::uint64_t seed, const std::vector<std::string>& overrides) {
  std::cout << "bench: power\nseed: " << seed << "\ncolumns: curve n power\n";
  const std::vector<int> sizes{100, 250, 500, 1000};

  DetectorConfig config = bench_config(seed, overrides);
  StreamSpec spec;
  spec.generator = Generator::sine;
  spec.seed = config.seed;
  spec.length = 100;  // power_curve lays out its own trials
  spec.drift_points = {50};
  auto started = std::chrono::steady_clock::now();
  for (const PowerPoint& point : power_curve(spec, sizes, 50, config))
    std::cout << "row: drift " << point.window_size << ' ' << metric3(point.power) << '\n';
  std::cerr << "[bench] power drift curve " << seconds_since(started) << "s\n";

  spec.drift_points.clear();
  started = std::chrono::steady_clock::now();
  for (const PowerPoint& point : power_curve(spec, sizes, 30, config))
    std::cout << "row: null " << point.window_size << ' ' << metric3(point.power) << '\n';
  std::cerr << "[bench] power null curve " << seconds_since(started) << "s\n";
  return 0;
}

int cmd_bench(const std::string& suite, std::uint64_t seed,
              const std::vector<std::string>& overrides) {
  if (suite == "detection") return cmd_bench_detection(seed, overrides);
  if (suite == "occlusion") return cmd_bench_occlusion(seed, overrides);
  if (suite == "power") return cmd_bench_power(seed, overrides);
  fail(ErrorKind::usage, "unknown suite \"" + suite + "\" (known: detection, occlusion, power)");
}

// -------------------------------------------------------------------- gen

struct GenOptions {
  std::string name;
  std::int64_t length = 0;
  std::string drifts = "none";
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string truth_path;
};

int cmd_gen(const GenOptions& opt) {
  StreamSpec spec;
  spec.generator = generator_from_name(opt.name);
  spec.length = opt.length;
  spec.drift_points = parse_drift_list(opt.drifts, opt.length);
  spec.noise = opt.noise;
  spec.seed = opt.seed;

  const GeneratedStream gen = generate(spec);
  save_csv(opt.out_path, gen.samples);
  if (!opt.truth_path.empty()) save_truth(opt.truth_path, gen.truth.drift_points);
  std::cerr << "wrote " << gen.samples.size() << " samples to " << opt.out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming drift detection with per-feature localization"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run the detector over one stream");
  run->add_option("--config", run_opt.config_path, "config file of key=value lines");
  run->add_option("--gen", run_opt.gen_name, "generate the stream (see `drift gen` for names)");
  run->add_option("--csv", run_opt.csv_path, "read the stream from a CSV file");
  run->add_option("--truth", run_opt.truth_path, "drift indices to score detections against");
  run->add_option("--out", run_opt.out_path, "also write the report to this file");
  run->add_option("--set", run_opt.overrides, "override a config key (key=value, repeatable)");
  run->add_option("--length", run_opt.length, "generated stream length")->capture_default_str();
  run->add_option("--drifts", run_opt.drifts, "generated drift indices: i1,i2,... | mid | none")
      ->capture_default_str();
  run->add_option("--noise", run_opt.noise, "generated label noise")->capture_default_str();
  run->add_flag("--occlusion", run_opt.occlusion, "score flagged features by occlusion");

  std::string bench_suite;
  std::uint64_t bench_seed = 0;
  std::vector<std::string> bench_overrides;
  CLI::App* bench = app.add_subcommand("bench", "Run a suite over the synthetic roster");
  bench->add_option("--suite", bench_suite, "detection | occlusion | power")->required();
  bench->add_option("--seed", bench_seed, "master seed")->capture_default_str();
  bench->add_option("--set", bench_overrides, "override a config key (key=value, repeatable)");

  GenOptions gen_opt;
  CLI::App* gen = app.add_subcommand("gen", "Write a synthetic stream to CSV");
  gen->add_option("--name", gen_opt.name, "generator name")->required();
  gen->add_option("--length", gen_opt.length, "stream length")->required();
  gen->add_option("--drifts", gen_opt.drifts, "drift indices: i1,i2,... | mid | none")
      ->capture_default_str();
  gen->add_option("--noise", gen_opt.noise, "label noise")->capture_default_str();
  gen->add_option("--seed", gen_opt.seed, "generator seed")->capture_default_str();
  gen->add_option("--out", gen_opt.out_path, "output CSV path")->required();
  gen->add_option("--truth-out", gen_opt.truth_path, "also write drift indices here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (bench->parsed()) return cmd_bench(bench_suite, bench_seed, bench_overrides);
    if (gen->parsed()) return cmd_gen(gen_opt);
  } catch (const drift::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == drift::ErrorKind::usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
