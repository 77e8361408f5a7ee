#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "drift/baselines.hpp"
#include "drift/datagen.hpp"

using namespace drift;

namespace {

GeneratedStream make(Generator g, int length, std::vector<std::int64_t> drifts,
                     std::uint64_t seed, double noise = 0.0) {
  StreamSpec spec;
  spec.generator = g;
  spec.length = length;
  spec.drift_points = std::move(drifts);
  spec.noise = noise;
  spec.seed = seed;
  return generate(spec);
}

bool bit(const LabeledSample& s, int j) { return s.features[std::size_t(j)] == 1.0; }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

struct FileGuard {
  std::filesystem::path path;
  ~FileGuard() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("generator names, widths, and tasks round-trip") {
  REQUIRE(all_generators().size() == 12);
  for (const Generator g : all_generators()) {
    CHECK(generator_from_name(generator_name(g)) == g);
    CHECK(generator_dim(g) >= 3);
  }
  CHECK(generator_dim(Generator::sine) == 4);
  CHECK(generator_dim(Generator::sea) == 3);
  CHECK(generator_dim(Generator::mixed) == 4);
  CHECK(generator_dim(Generator::agrawal) == 9);
  CHECK(generator_dim(Generator::hyperplane) == 10);
  CHECK(generator_dim(Generator::friedmann) == 4);
  CHECK(generator_dim(Generator::d1) == 3);
  CHECK(generator_dim(Generator::d2) == 4);
  CHECK(generator_task(Generator::friedmann) == TaskKind::regression());
  CHECK(generator_task(Generator::sine) == TaskKind::classification(2));
  try {
    generator_from_name("bogus");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::usage);
  }
}

TEST_CASE("the boolean streams follow their truth tables exactly") {
  const GeneratedStream d1 = make(Generator::d1, 1600, {800}, 3);
  bool saw_pre_110 = false, saw_post_110 = false;
  for (std::int64_t i = 0; i < 1600; ++i) {
    const LabeledSample& s = d1.samples[std::size_t(i)];
    const bool x1 = bit(s, 0), x2 = bit(s, 1), x3 = bit(s, 2);
    const bool expected = i < 800 ? ((x1 != x2) || x3) : (x1 || x3);
    CHECK(s.target == double(expected));
    if (x1 && x2 && !x3) {
      // this point separates the concepts: label 0 before, 1 after
      if (i < 800) {
        saw_pre_110 = true;
        CHECK(s.target == 0.0);
      } else {
        saw_post_110 = true;
        CHECK(s.target == 1.0);
      }
    }
  }
  CHECK(saw_pre_110);
  CHECK(saw_post_110);

  const GeneratedStream d2 = make(Generator::d2, 1200, {600}, 4);
  for (std::int64_t i = 0; i < 1200; ++i) {
    const LabeledSample& s = d2.samples[std::size_t(i)];
    const bool expected = i < 600 ? (bit(s, 0) && bit(s, 1)) : (bit(s, 0) && bit(s, 2));
    CHECK(s.target == double(expected));
  }
}

TEST_CASE("streams are deterministic and echo their ground truth") {
  for (const Generator g : all_generators()) {
    const GeneratedStream a = make(g, 400, {200}, 77);
    const GeneratedStream b = make(g, 400, {200}, 77);
    REQUIRE(a.samples.size() == 400);
    CHECK(a.dim == generator_dim(g));
    CHECK(a.task == generator_task(g));
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].features == b.samples[i].features);
      CHECK(a.samples[i].target == b.samples[i].target);
    }
    REQUIRE(a.truth.drift_points == std::vector<std::int64_t>{200});
    REQUIRE(a.truth.drift_features.size() == 1);

    const GeneratedStream c = make(g, 400, {200}, 78);
    bool differs = false;
    for (std::size_t i = 0; i < c.samples.size() && !differs; ++i)
      differs = c.samples[i].features != a.samples[i].features;
    CHECK(differs);
  }

  CHECK(make(Generator::d1, 100, {50}, 0).truth.drift_features[0] == FeatureSubset::of({0, 1}));
  CHECK(make(Generator::d2, 100, {50}, 0).truth.drift_features[0] == FeatureSubset::of({1, 2}));
  CHECK(make(Generator::sine, 100, {50}, 0).truth.drift_features[0] == FeatureSubset::of({0, 1}));
  CHECK(make(Generator::mixed, 100, {50}, 0).truth.drift_features[0] == FeatureSubset::of({2, 3}));
  CHECK(make(Generator::aug_mixed, 100, {50}, 0).truth.drift_features[0] ==
        FeatureSubset::of({0, 1, 2, 3}));
  CHECK(make(Generator::friedmann, 100, {50}, 0).truth.drift_features[0] ==
        FeatureSubset::of({0, 3}));
  CHECK(make(Generator::hyperplane, 100, {50}, 0).truth.drift_features[0] ==
        FeatureSubset::of({0, 1, 2, 3, 4}));

  const GeneratedStream agr = make(Generator::agrawal, 300, {100, 200}, 5);
  CHECK(agr.truth.drift_features[0] == FeatureSubset::of({0, 2}));
  CHECK(agr.truth.drift_features[1] == FeatureSubset::of({0, 2, 3}));
}

TEST_CASE("sine labels integrate to the analytic class balance") {
  const GeneratedStream pre = make(Generator::sine, 3000, {}, 12);
  double balance = 0.0;
  for (const LabeledSample& s : pre.samples) balance += s.target;
  balance /= 3000.0;
  const double analytic = 1.0 - std::cos(1.0);  // probability of x2 < sin(x1)
  CHECK(std::fabs(balance - analytic) < 0.02);

  // after the flip the complementary fraction is labeled positive
  const GeneratedStream post = make(Generator::sine, 3000, {0}, 12);
  double flipped = 0.0;
  for (const LabeledSample& s : post.samples) flipped += s.target;
  flipped /= 3000.0;
  CHECK(std::fabs(flipped - (1.0 - analytic)) < 0.02);
}

TEST_CASE("imbalance variants thin out the positive class") {
  const GeneratedStream plain = make(Generator::sine, 3000, {}, 21);
  const GeneratedStream thin = make(Generator::sine_imbalance, 3000, {}, 21);
  double p_plain = 0.0, p_thin = 0.0;
  for (const LabeledSample& s : plain.samples) p_plain += s.target;
  for (const LabeledSample& s : thin.samples) p_thin += s.target;
  p_plain /= 3000.0;
  p_thin /= 3000.0;

  // keeping positives with probability 1/4 turns balance b into b/4 over (1-3b/4)
  const double expected = p_plain / 4.0 / (p_plain / 4.0 + (1.0 - p_plain));
  CHECK(std::fabs(p_thin - expected) < 0.03);

  const GeneratedStream agr = make(Generator::agrawal, 3000, {}, 22);
  const GeneratedStream agr_thin = make(Generator::agrawal_imbalance, 3000, {}, 22);
  double a_plain = 0.0, a_thin = 0.0;
  for (const LabeledSample& s : agr.samples) a_plain += s.target;
  for (const LabeledSample& s : agr_thin.samples) a_thin += s.target;
  CHECK(a_thin / 3000.0 < a_plain / 3000.0 - 0.1);
}

TEST_CASE("label noise corrupts the stated fraction of labels") {
  const GeneratedStream noisy = make(Generator::d1, 4000, {}, 33, 0.1);
  std::int64_t disagreements = 0;
  for (const LabeledSample& s : noisy.samples) {
    const bool rule = (bit(s, 0) != bit(s, 1)) || bit(s, 2);
    if (s.target != double(rule)) ++disagreements;
  }
  const double rate = double(disagreements) / 4000.0;
  CHECK(rate > 0.08);
  CHECK(rate < 0.12);

  // regression streams ignore the noise knob entirely
  const GeneratedStream reg = make(Generator::friedmann, 200, {}, 9, 0.3);
  const GeneratedStream ref = make(Generator::friedmann, 200, {}, 9, 0.0);
  for (std::size_t i = 0; i < 200; ++i) CHECK(reg.samples[i].target == ref.samples[i].target);
}

TEST_CASE("every generator is stationary ahead of its first change") {
  // first versus second quarter of a drift-free block, feature-wise KS at
  // the one-percent critical value; the pooled pass rate must stay high
  const double critical = 1.62762 * std::sqrt(400.0 / (200.0 * 200.0));
  int trials = 0;
  int passed = 0;
  for (const Generator g : all_generators()) {
    int generator_passed = 0;
    for (int seed = 0; seed < 25; ++seed) {
      const GeneratedStream stream = make(g, 400, {}, 9000 + std::uint64_t(seed));
      bool ok = true;
      for (int j = 0; j < stream.dim && ok; ++j) {
        std::vector<double> first, second;
        for (int i = 0; i < 200; ++i) {
          first.push_back(stream.samples[std::size_t(i)].features[std::size_t(j)]);
          second.push_back(stream.samples[std::size_t(200 + i)].features[std::size_t(j)]);
        }
        ok = ks_statistic(first, second) < critical;
      }
      ++trials;
      if (ok) {
        ++passed;
        ++generator_passed;
      }
    }
    CHECK(generator_passed >= 20);
  }
  CHECK(double(passed) / double(trials) >= 0.95);
}

TEST_CASE("gradual drift mixes concepts only inside the transition") {
  const GeneratedStream stream = make(Generator::sea_gradual, 2500, {1000}, 55);
  const auto old_rule = [](const LabeledSample& s) {
    return double(s.features[0] + s.features[1] <= 8.0);
  };
  const auto new_rule = [](const LabeledSample& s) {
    return double(s.features[0] + s.features[1] <= 9.0);
  };

  for (std::int64_t i = 0; i < 1000; ++i)
    CHECK(stream.samples[std::size_t(i)].target == old_rule(stream.samples[std::size_t(i)]));
  for (std::int64_t i = 1500; i < 2500; ++i)
    CHECK(stream.samples[std::size_t(i)].target == new_rule(stream.samples[std::size_t(i)]));

  int follows_old = 0, follows_new = 0;
  for (std::int64_t i = 1000; i < 1500; ++i) {
    const LabeledSample& s = stream.samples[std::size_t(i)];
    if (old_rule(s) == new_rule(s)) continue;  // rules agree, uninformative
    if (s.target == old_rule(s)) ++follows_old;
    else ++follows_new;
  }
  CHECK(follows_old > 0);
  CHECK(follows_new > 0);

  // the abrupt variant switches its rule at the drift point outright
  const GeneratedStream abrupt = make(Generator::sea, 2500, {1000}, 55);
  for (std::int64_t i = 1000; i < 2500; ++i)
    CHECK(abrupt.samples[std::size_t(i)].target == new_rule(abrupt.samples[std::size_t(i)]));
}

TEST_CASE("the comparison flip and the label inversion are distinct changes") {
  const auto rule = [](const LabeledSample& s, bool flipped) {
    const double bound = 0.5 + 0.3 * std::sin(3.0 * std::numbers::pi * s.features[2]);
    const bool numeric = flipped ? s.features[3] > bound : s.features[3] < bound;
    const int votes = int(s.features[0]) + int(s.features[1]) + (numeric ? 1 : 0);
    return double(votes >= 2);
  };

  const GeneratedStream mixed = make(Generator::mixed, 1200, {600}, 66);
  for (std::int64_t i = 0; i < 1200; ++i) {
    const LabeledSample& s = mixed.samples[std::size_t(i)];
    CHECK(s.target == rule(s, i >= 600));
  }

  const GeneratedStream aug = make(Generator::aug_mixed, 1200, {600}, 66);
  for (std::int64_t i = 0; i < 1200; ++i) {
    const LabeledSample& s = aug.samples[std::size_t(i)];
    const double plain = rule(s, i >= 600);
    CHECK(s.target == (i >= 600 ? 1.0 - plain : plain));
  }
}

TEST_CASE("agrawal cycles through its three decision functions") {
  const GeneratedStream stream = make(Generator::agrawal, 1500, {500, 1000}, 14);
  for (std::int64_t i = 0; i < 1500; ++i) {
    const LabeledSample& s = stream.samples[std::size_t(i)];
    const double salary = s.features[0], age = s.features[2], elevel = s.features[3];
    bool expected = false;
    if (i < 500) {
      expected = age < 40.0 || age >= 60.0;
    } else if (i < 1000) {
      if (age < 40.0) expected = 50000.0 <= salary && salary <= 100000.0;
      else if (age < 60.0) expected = 75000.0 <= salary && salary <= 125000.0;
      else expected = 25000.0 <= salary && salary <= 75000.0;
    } else {
      if (age < 40.0) expected = elevel <= 1.0;
      else if (age < 60.0) expected = 1.0 <= elevel && elevel <= 3.0;
      else expected = elevel >= 2.0;
    }
    CHECK(s.target == double(expected));
  }
}

TEST_CASE("stream specs validate their fields") {
  StreamSpec spec;
  spec.generator = Generator::sine;
  spec.length = 100;

  spec.drift_points = {50, 50};
  CHECK_THROWS_AS(generate(spec), Error);
  spec.drift_points = {80, 20};
  CHECK_THROWS_AS(generate(spec), Error);
  spec.drift_points = {100};
  CHECK_THROWS_AS(generate(spec), Error);
  spec.drift_points = {};

  spec.length = 0;
  CHECK_THROWS_AS(generate(spec), Error);
  spec.length = 100;

  spec.noise = 1.0;
  CHECK_THROWS_AS(generate(spec), Error);
  spec.noise = -0.1;
  CHECK_THROWS_AS(generate(spec), Error);
  spec.noise = 0.0;

  try {
    spec.length = -5;
    generate(spec);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
}

TEST_CASE("csv files round-trip samples exactly") {
  const FileGuard guard{temp_file("drift_test_roundtrip.csv")};
  const GeneratedStream stream = make(Generator::sine, 10000, {5000}, 91);
  save_csv(guard.path.string(), stream.samples);
  const std::vector<LabeledSample> back = load_csv(guard.path.string(), stream.task);
  REQUIRE(back.size() == stream.samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].features == stream.samples[i].features);
    CHECK(back[i].target == stream.samples[i].target);
  }

  const FileGuard reg_guard{temp_file("drift_test_regression.csv")};
  const GeneratedStream reg = make(Generator::friedmann, 300, {}, 92);
  save_csv(reg_guard.path.string(), reg.samples);
  const std::vector<LabeledSample> reg_back =
      load_csv(reg_guard.path.string(), TaskKind::regression());
  REQUIRE(reg_back.size() == 300);
  for (std::size_t i = 0; i < reg_back.size(); ++i)
    CHECK(reg_back[i].target == reg.samples[i].target);
}

TEST_CASE("csv ingestion reports precise parse failures") {
  const auto write_and_load = [](const std::string& name, const std::string& body,
                                 const TaskKind& task) {
    const FileGuard guard{temp_file(name)};
    std::ofstream out(guard.path);
    out << body;
    out.close();
    return load_csv(guard.path.string(), task);
  };
  const auto expect_parse_error = [&](const std::string& name, const std::string& body,
                                      const std::string& needle,
                                      const TaskKind& task = TaskKind::classification(2)) {
    try {
      write_and_load(name, body, task);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  const std::vector<LabeledSample> one =
      write_and_load("drift_test_min.csv", "f1,f2,label\n0.1,0.2,1\n", TaskKind::classification(2));
  REQUIRE(one.size() == 1);
  CHECK(one[0].features == std::vector<double>{0.1, 0.2});
  CHECK(one[0].target == 1.0);

  expect_parse_error("drift_test_cell.csv", "f1,f2,label\n0.1,abc,1\n", "line 2");
  expect_parse_error("drift_test_header.csv", "f1,f2\n0.1,0.2\n", "line 1");
  expect_parse_error("drift_test_width.csv", "f1,f2,label\n0.1,0.2,1\n0.3,1\n", "line 3");
  expect_parse_error("drift_test_frac.csv", "f1,label\n0.5,1.5\n", "line 2");
  expect_parse_error("drift_test_neg.csv", "f1,label\n0.5,-1\n", "line 2");

  // the same fractional label is a perfectly fine regression target
  const std::vector<LabeledSample> reg = write_and_load(
      "drift_test_reglabel.csv", "f1,label\n0.5,-1.5\n", TaskKind::regression());
  CHECK(reg[0].target == -1.5);

  // blank lines are skipped but still counted for positions
  const std::vector<LabeledSample> gappy = write_and_load(
      "drift_test_blank.csv", "f1,label\n\n0.5,1\n", TaskKind::classification(2));
  CHECK(gappy.size() == 1);
  expect_parse_error("drift_test_blank2.csv", "f1,label\n\n0.5,oops\n", "line 3");

  CHECK_THROWS_AS(load_csv("/nonexistent/drift_nowhere.csv", TaskKind::classification(2)), Error);
}

TEST_CASE("ground-truth files hold ascending indices") {
  const FileGuard guard{temp_file("drift_test_truth.txt")};
  save_truth(guard.path.string(), std::vector<std::int64_t>{100, 900});
  CHECK(load_truth(guard.path.string()) == std::vector<std::int64_t>{100, 900});

  std::ofstream(guard.path) << "900\n100\n";
  CHECK_THROWS_AS(load_truth(guard.path.string()), Error);

  std::ofstream(guard.path) << "";
  CHECK(load_truth(guard.path.string()).empty());

  std::ofstream(guard.path) << "12.5\n";
  CHECK_THROWS_AS(load_truth(guard.path.string()), Error);
}
