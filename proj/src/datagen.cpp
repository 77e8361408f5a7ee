#include "drift/datagen.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "drift/rng.hpp"

namespace drift {

namespace {

constexpr std::uint64_t kGenSalt = 0x67656e5fULL;
constexpr double kImbalanceKeep = 0.25;
constexpr int kImbalanceMaxTries = 100000;
constexpr std::int64_t kGradualWidth = 500;
constexpr std::array<double, 4> kSeaThetas{8.0, 9.0, 7.0, 9.5};

struct GeneratorInfo {
  std::string_view name;
  int dim;
  bool classification;
};

constexpr std::array<GeneratorInfo, 12> kGenerators{{
    {"sine", 4, true},
    {"sine-imbalance", 4, true},
    {"sea", 3, true},
    {"sea-gradual", 3, true},
    {"mixed", 4, true},
    {"aug-mixed", 4, true},
    {"agrawal", 9, true},
    {"agrawal-imbalance", 9, true},
    {"hyperplane", 10, true},
    {"friedmann", 4, false},
    {"d1", 3, true},
    {"d2", 4, true},
}};

constexpr std::array<Generator, 12> kAllGenerators{
    Generator::sine,      Generator::sine_imbalance, Generator::sea,
    Generator::sea_gradual, Generator::mixed,        Generator::aug_mixed,
    Generator::agrawal,   Generator::agrawal_imbalance, Generator::hyperplane,
    Generator::friedmann, Generator::d1,             Generator::d2,
};

const GeneratorInfo& info_of(Generator g) {
  return kGenerators[static_cast<std::size_t>(g)];
}

bool uses_imbalance(Generator g) {
  return g == Generator::sine_imbalance || g == Generator::agrawal_imbalance;
}

// Weight trajectory for the hyperplane stream; first five weights wander.
struct HyperplaneState {
  std::array<double, 10> w{};
  std::array<double, 5> dir{};
};

void draw_uniforms(Rng& rng, int count, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(count));
  for (double& v : out) v = rng.next_double();
}

void draw_sine(Rng& rng, int phase, LabeledSample& out) {
  draw_uniforms(rng, 4, out.features);
  int y = out.features[1] < std::sin(out.features[0]) ? 1 : 0;
  if (phase % 2 == 1) y = 1 - y;
  out.target = y;
}

void draw_sea(Rng& rng, int phase, LabeledSample& out) {
  out.features.resize(3);
  for (double& v : out.features) v = rng.uniform(0.0, 10.0);
  const double theta = kSeaThetas[static_cast<std::size_t>(phase % 4)];
  out.target = out.features[0] + out.features[1] <= theta ? 1.0 : 0.0;
}

void draw_mixed(Rng& rng, int phase, bool invert_labels, LabeledSample& out) {
  out.features.resize(4);
  out.features[0] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  out.features[1] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  out.features[2] = rng.next_double();
  out.features[3] = rng.next_double();
  const double bound = 0.5 + 0.3 * std::sin(3.0 * std::numbers::pi * out.features[2]);
  const bool numeric =
      phase % 2 == 0 ? out.features[3] < bound : out.features[3] > bound;
  const int votes =
      static_cast<int>(out.features[0]) + static_cast<int>(out.features[1]) + (numeric ? 1 : 0);
  int y = votes >= 2 ? 1 : 0;
  if (invert_labels && phase % 2 == 1) y = 1 - y;
  out.target = y;
}

void draw_agrawal(Rng& rng, int phase, LabeledSample& out) {
  out.features.resize(9);
  const double salary = rng.uniform(20000.0, 150000.0);
  const double commission = salary >= 75000.0 ? 0.0 : rng.uniform(10000.0, 75000.0);
  const double age = static_cast<double>(rng.uniform_int(20, 80));
  const double elevel = static_cast<double>(rng.uniform_int(0, 4));
  const double car = static_cast<double>(rng.uniform_int(1, 20));
  const double zipcode = static_cast<double>(rng.uniform_int(0, 8));
  const double hvalue = (9.0 - zipcode) * 100000.0 * rng.uniform(0.5, 1.5);
  const double hyears = static_cast<double>(rng.uniform_int(1, 30));
  const double loan = rng.uniform(0.0, 500000.0);
  out.features = {salary, commission, age, elevel, car, zipcode, hvalue, hyears, loan};

  bool group_a = false;
  switch (phase % 3) {
    case 0:
      group_a = age < 40.0 || age >= 60.0;
      break;
    case 1:
      if (age < 40.0) group_a = 50000.0 <= salary && salary <= 100000.0;
      else if (age < 60.0) group_a = 75000.0 <= salary && salary <= 125000.0;
      else group_a = 25000.0 <= salary && salary <= 75000.0;
      break;
    default:
      if (age < 40.0) group_a = elevel <= 1.0;
      else if (age < 60.0) group_a = 1.0 <= elevel && elevel <= 3.0;
      else group_a = elevel >= 2.0;
      break;
  }
  out.target = group_a ? 1.0 : 0.0;
}

void draw_hyperplane(Rng& rng, HyperplaneState& state, LabeledSample& out) {
  draw_uniforms(rng, 10, out.features);
  double dot = 0.0, total = 0.0;
  for (int j = 0; j < 10; ++j) {
    dot += state.w[static_cast<std::size_t>(j)] * out.features[static_cast<std::size_t>(j)];
    total += state.w[static_cast<std::size_t>(j)];
  }
  out.target = dot > total / 2.0 ? 1.0 : 0.0;
  for (int j = 0; j < 5; ++j) {
    state.w[static_cast<std::size_t>(j)] += 0.001 * state.dir[static_cast<std::size_t>(j)];
    if (rng.bernoulli(0.1)) state.dir[static_cast<std::size_t>(j)] *= -1.0;
  }
}

void draw_friedmann(Rng& rng, int phase, LabeledSample& out) {
  draw_uniforms(rng, 4, out.features);
  const double a = phase % 2 == 0 ? out.features[0] : out.features[3];
  const double b = phase % 2 == 0 ? out.features[3] : out.features[0];
  out.target = 10.0 * std::sin(std::numbers::pi * a * out.features[1]) +
               20.0 * (out.features[2] - 0.5) * (out.features[2] - 0.5) + 10.0 * b +
               rng.normal();
}

void draw_d1(Rng& rng, int phase, LabeledSample& out) {
  out.features.resize(3);
  for (double& v : out.features) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  const bool x1 = out.features[0] != 0.0;
  const bool x2 = out.features[1] != 0.0;
  const bool x3 = out.features[2] != 0.0;
  const bool y = phase % 2 == 0 ? ((x1 != x2) || x3) : (x1 || x3);
  out.target = y ? 1.0 : 0.0;
}

void draw_d2(Rng& rng, int phase, LabeledSample& out) {
  out.features.resize(4);
  for (double& v : out.features) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  const bool x1 = out.features[0] != 0.0;
  const bool x2 = out.features[1] != 0.0;
  const bool x3 = out.features[2] != 0.0;
  const bool y = phase % 2 == 0 ? (x1 && x2) : (x1 && x3);
  out.target = y ? 1.0 : 0.0;
}

void draw_sample(Generator g, int phase, Rng& rng, HyperplaneState& hp, LabeledSample& out) {
  switch (g) {
    case Generator::sine:
    case Generator::sine_imbalance:
      draw_sine(rng, phase, out);
      break;
    case Generator::sea:
    case Generator::sea_gradual:
      draw_sea(rng, phase, out);
      break;
    case Generator::mixed:
      draw_mixed(rng, phase, false, out);
      break;
    case Generator::aug_mixed:
      draw_mixed(rng, phase, true, out);
      break;
    case Generator::agrawal:
    case Generator::agrawal_imbalance:
      draw_agrawal(rng, phase, out);
      break;
    case Generator::hyperplane:
      draw_hyperplane(rng, hp, out);
      break;
    case Generator::friedmann:
      draw_friedmann(rng, phase, out);
      break;
    case Generator::d1:
      draw_d1(rng, phase, out);
      break;
    case Generator::d2:
      draw_d2(rng, phase, out);
      break;
  }
}

// Features whose relationship to the label changes when phase -> phase + 1.
FeatureSubset transition_features(Generator g, int phase) {
  switch (g) {
    case Generator::sine:
    case Generator::sine_imbalance:
    case Generator::sea:
    case Generator::sea_gradual:
      return FeatureSubset::of({0, 1});
    case Generator::mixed:
      return FeatureSubset::of({2, 3});
    case Generator::aug_mixed:
      return FeatureSubset::of({0, 1, 2, 3});
    case Generator::agrawal:
    case Generator::agrawal_imbalance: {
      static const std::array<FeatureSubset, 3> involved{
          FeatureSubset::of({2}), FeatureSubset::of({0, 2}), FeatureSubset::of({2, 3})};
      const FeatureSubset from = involved[static_cast<std::size_t>(phase % 3)];
      const FeatureSubset to = involved[static_cast<std::size_t>((phase + 1) % 3)];
      return FeatureSubset::from_bits(from.bits() | to.bits());
    }
    case Generator::hyperplane:
      return FeatureSubset::of({0, 1, 2, 3, 4});
    case Generator::friedmann:
      return FeatureSubset::of({0, 3});
    case Generator::d1:
      return FeatureSubset::of({0, 1});
    case Generator::d2:
      return FeatureSubset::of({1, 2});
  }
  fail(ErrorKind::config, "transition_features: unknown generator");
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view raw, std::int64_t line_no) {
  const std::string_view cell = trim(raw);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value))
    fail(ErrorKind::parse,
         "line " + std::to_string(line_no) + ": cannot parse \"" + std::string(raw) +
             "\" as a number");
  return value;
}

}  // namespace

std::string_view generator_name(Generator g) { return info_of(g).name; }

Generator generator_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kGenerators.size(); ++i) {
    if (kGenerators[i].name == name) return static_cast<Generator>(i);
  }
  std::string known;
  for (const GeneratorInfo& info : kGenerators) {
    if (!known.empty()) known += ", ";
    known += info.name;
  }
  fail(ErrorKind::usage, "unknown generator \"" + std::string(name) + "\" (known: " + known + ")");
}

std::span<const Generator> all_generators() { return kAllGenerators; }

int generator_dim(Generator g) { return info_of(g).dim; }

TaskKind generator_task(Generator g) {
  return info_of(g).classification ? TaskKind::classification(2) : TaskKind::regression();
}

void StreamSpec::validate() const {
  if (length < 1) fail(ErrorKind::config, "stream spec: length must be >= 1");
  if (!(noise >= 0.0 && noise < 1.0))
    fail(ErrorKind::config, "stream spec: noise must lie in [0, 1)");
  for (std::size_t i = 0; i < drift_points.size(); ++i) {
    if (drift_points[i] < 0 || drift_points[i] >= length)
      fail(ErrorKind::config, "stream spec: drift point out of range");
    if (i > 0 && drift_points[i] <= drift_points[i - 1])
      fail(ErrorKind::config, "stream spec: drift points must be strictly increasing");
  }
}

GeneratedStream generate(const StreamSpec& spec) {
  spec.validate();
  const GeneratorInfo& info = info_of(spec.generator);

  GeneratedStream out;
  out.task = generator_task(spec.generator);
  out.dim = info.dim;
  out.truth.drift_points = spec.drift_points;
  for (std::size_t j = 0; j < spec.drift_points.size(); ++j)
    out.truth.drift_features.push_back(
        transition_features(spec.generator, static_cast<int>(j)));

  Rng rng(derive_seed(spec.seed, kGenSalt));
  HyperplaneState hp;
  if (spec.generator == Generator::hyperplane) {
    for (double& w : hp.w) w = rng.next_double();
    hp.dir.fill(1.0);
  }

  const bool imbalance = uses_imbalance(spec.generator);
  const bool add_noise = info.classification && spec.noise > 0.0;

  out.samples.resize(static_cast<std::size_t>(spec.length));
  std::size_t next_drift = 0;
  for (std::int64_t i = 0; i < spec.length; ++i) {
    while (next_drift < spec.drift_points.size() && spec.drift_points[next_drift] <= i)
      ++next_drift;
    int phase = static_cast<int>(next_drift);
    if (spec.generator == Generator::sea_gradual && phase > 0) {
      const std::int64_t into = i - spec.drift_points[next_drift - 1];
      if (into < kGradualWidth) {
        const double p_new = static_cast<double>(into + 1) / static_cast<double>(kGradualWidth);
        if (!rng.bernoulli(p_new)) --phase;
      }
    }

    LabeledSample& sample = out.samples[static_cast<std::size_t>(i)];
    if (imbalance) {
      int tries = 0;
      while (true) {
        draw_sample(spec.generator, phase, rng, hp, sample);
        if (sample.target != 1.0 || rng.bernoulli(kImbalanceKeep)) break;
        if (++tries >= kImbalanceMaxTries)
          fail(ErrorKind::data, "generate: imbalance filter rejected every draw");
      }
    } else {
      draw_sample(spec.generator, phase, rng, hp, sample);
    }
    if (add_noise && rng.bernoulli(spec.noise)) sample.target = 1.0 - sample.target;
  }
  return out;
}

std::vector<LabeledSample> load_csv(const std::string& path, const TaskKind& task) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::data, "load_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::parse, "line 1: missing header");
  const std::vector<std::string> header = split_fields(strip_cr(line));
  if (header.size() < 2 || trim(header.back()) != "label")
    fail(ErrorKind::parse,
         "line 1: header must list feature columns followed by a final \"label\" column");
  const std::size_t width = header.size();

  std::vector<LabeledSample> samples;
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = strip_cr(line);
    if (row.empty()) continue;
    const std::vector<std::string> fields = split_fields(row);
    if (fields.size() != width)
      fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(width) + " columns, got " +
                                 std::to_string(fields.size()));
    LabeledSample sample;
    sample.features.reserve(width - 1);
    for (std::size_t c = 0; c + 1 < width; ++c)
      sample.features.push_back(parse_cell(fields[c], line_no));
    sample.target = parse_cell(fields.back(), line_no);
    if (task.is_classification() &&
        (sample.target != std::floor(sample.target) || sample.target < 0.0))
      fail(ErrorKind::parse, "line " + std::to_string(line_no) +
                                 ": classification label must be a nonnegative integer");
    samples.push_back(std::move(sample));
  }
  return samples;
}

void save_csv(const std::string& path, std::span<const LabeledSample> samples) {
  if (samples.empty()) fail(ErrorKind::protocol, "save_csv: nothing to write");
  const std::size_t width = samples.front().features.size();

  std::ofstream out(path);
  if (!out) fail(ErrorKind::data, "save_csv: cannot open " + path);
  for (std::size_t c = 0; c < width; ++c) out << 'f' << c + 1 << ',';
  out << "label\n";

  char buf[64];
  for (const LabeledSample& sample : samples) {
    if (sample.features.size() != width)
      fail(ErrorKind::dimension, "save_csv: samples have uneven widths");
    for (const double v : sample.features) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", sample.target);
    out << buf << '\n';
  }
  if (!out) fail(ErrorKind::data, "save_csv: write failed for " + path);
}

std::vector<std::int64_t> load_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::data, "load_truth: cannot open " + path);

  std::vector<std::int64_t> points;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = strip_cr(line);
    if (row.empty()) continue;
    const std::string_view cell = trim(row);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
      fail(ErrorKind::parse,
           "line " + std::to_string(line_no) + ": cannot parse drift index \"" + row + "\"");
    if (!points.empty() && value <= points.back())
      fail(ErrorKind::parse,
           "line " + std::to_string(line_no) + ": drift indices must be ascending");
    points.push_back(value);
  }
  return points;
}

void save_truth(const std::string& path, std::span<const std::int64_t> drift_points) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::data, "save_truth: cannot open " + path);
  for (const std::int64_t p : drift_points) out << p << '\n';
  if (!out) fail(ErrorKind::data, "save_truth: write failed for " + path);
}

}  // namespace drift
