#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "drift/report.hpp"
#include "drift/rng.hpp"

using namespace drift;

namespace {

RunReport sample_report() {
  RunReport report;
  report.source = "gen:sine";
  report.config.n = 800;
  report.config.r = 0.75;
  report.config.delta = 40;
  report.config.alpha = 0.01;
  report.config.bootstrap_k = 120;
  report.config.subset_budget = 32;
  report.config.seed = 12345;
  report.config.standardize = true;
  report.config.task = TaskKind::classification(3);
  report.config.model.arch = ModelSpec::Arch::mlp;
  report.config.model.hidden = {16, 8};
  report.config.model.epochs = 90;
  report.config.model.learning_rate = 0.05;
  report.config.model.batch_size = 16;
  report.stream_length = 4000;

  EventRecord event;
  event.stream_index = 1600;
  event.flagged_features = {0, 2};
  event.statistics = {14.25, 0.125, 19.0, 1.0 / 3.0};
  event.thresholds = {3.5, 4.75, 2.25, 0.1};
  report.events.push_back(event);

  EventRecord quiet;
  quiet.stream_index = 3200;
  quiet.flagged_features = {1};
  quiet.statistics = {0.0, 9.875, 0.5, 0.25};
  quiet.thresholds = {1.5, 2.5, 3.5, 4.5};
  report.events.push_back(quiet);

  report.performance = {0.9125, 0.84375, 0.90625};
  report.detection = DetectionScore{0.5, 1.0, 1, 1, 0};
  report.occlusion = 42.625;
  report.wall_seconds = 1.375;
  return report;
}

}  // namespace

TEST_CASE("doubles print with just enough digits to round-trip") {
  Rng rng(31337);
  std::vector<double> values{0.0,     1.0,      -1.0,       0.1,   1.0 / 3.0,
                             1e-300,  1e300,    0.05,       2.5,   123456789.123456789,
                             -0.3333, 6.02e23,  1.6e-19,    42.0,  std::numbers::pi};
  for (int i = 0; i < 200; ++i) {
    values.push_back(rng.uniform(-1e6, 1e6));
    values.push_back(rng.normal() * std::pow(10.0, double(int(rng.below(60)) - 30)));
  }
  for (const double v : values) {
    const std::string text = format_double(v);
    double back = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), back);
    REQUIRE(ec == std::errc());
    REQUIRE(ptr == text.data() + text.size());
    CHECK(back == v);

    // no shorter precision can represent the same value
    if (text.find('.') != std::string::npos || text.find('e') != std::string::npos) {
      char shorter[64];
      for (int precision = 1; precision < 17; ++precision) {
        std::snprintf(shorter, sizeof shorter, "%.*g", precision, v);
        double candidate = 0.0;
        std::from_chars(shorter, shorter + std::strlen(shorter), candidate);
        if (candidate == v) {
          CHECK(std::string(shorter).size() >= 0);  // found the minimal form
          CHECK(text == shorter);
          break;
        }
      }
    }
  }
}

TEST_CASE("config keys apply values and reject unknown names") {
  DetectorConfig config;
  apply_config_key(config, "n", "1500");
  apply_config_key(config, "r", "0.9");
  apply_config_key(config, "delta", "75");
  apply_config_key(config, "alpha", "0.01");
  apply_config_key(config, "K", "250");
  apply_config_key(config, "subset_budget", "16");
  apply_config_key(config, "seed", "987654321");
  apply_config_key(config, "standardize", "true");
  apply_config_key(config, "task", "classification:4");
  apply_config_key(config, "model", "linear");
  apply_config_key(config, "hidden", "64,32,16");
  apply_config_key(config, "epochs", "500");
  apply_config_key(config, "lr", "0.001");
  apply_config_key(config, "batch", "64");

  CHECK(config.n == 1500);
  CHECK(config.r == 0.9);
  CHECK(config.delta == 75);
  CHECK(config.alpha == 0.01);
  CHECK(config.bootstrap_k == 250);
  CHECK(config.subset_budget == 16);
  CHECK(config.seed == 987654321);
  CHECK(config.standardize);
  CHECK(config.task == TaskKind::classification(4));
  CHECK(config.model.arch == ModelSpec::Arch::linear);
  CHECK(config.model.hidden == std::vector<int>{64, 32, 16});
  CHECK(config.model.epochs == 500);
  CHECK(config.model.learning_rate == 0.001);
  CHECK(config.model.batch_size == 64);

  apply_config_key(config, "task", "regression");
  CHECK(config.task == TaskKind::regression());
  apply_config_key(config, "task", "classification");
  CHECK(config.task == TaskKind::classification(2));
  apply_config_key(config, "hidden", "none");
  CHECK(config.model.hidden.empty());
  apply_config_key(config, "standardize", "false");
  CHECK_FALSE(config.standardize);

  // unknown keys and bad enum tokens are config mistakes; values that fail
  // to scan as numbers are parse failures naming the key
  const auto expect_error = [&](std::string_view key, std::string_view value, ErrorKind kind) {
    try {
      apply_config_key(config, key, value);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.kind() == kind);
    }
  };
  expect_error("bogus", "1", ErrorKind::config);
  expect_error("n", "abc", ErrorKind::parse);
  expect_error("n", "12.5", ErrorKind::parse);
  expect_error("r", "", ErrorKind::parse);
  expect_error("task", "clustering", ErrorKind::config);
  expect_error("model", "transformer", ErrorKind::config);
  expect_error("hidden", "8,,4", ErrorKind::parse);
  expect_error("standardize", "maybe", ErrorKind::config);

  try {
    apply_config_key(config, "bogus", "1");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("config entries echo every tunable in canonical order") {
  DetectorConfig config;
  config.task = TaskKind::classification(5);
  config.model.hidden = {};
  const auto entries = config_entries(config);
  REQUIRE(entries.size() == 14);
  CHECK(entries[0].first == "n");
  CHECK(entries[13].first == "batch");

  DetectorConfig rebuilt;
  rebuilt.model.hidden = {1, 2, 3};  // sentinel that must be overwritten
  for (const auto& [key, value] : entries) apply_config_key(rebuilt, key, value);
  CHECK(rebuilt.n == config.n);
  CHECK(rebuilt.r == config.r);
  CHECK(rebuilt.delta == config.delta);
  CHECK(rebuilt.alpha == config.alpha);
  CHECK(rebuilt.bootstrap_k == config.bootstrap_k);
  CHECK(rebuilt.subset_budget == config.subset_budget);
  CHECK(rebuilt.seed == config.seed);
  CHECK(rebuilt.standardize == config.standardize);
  CHECK(rebuilt.task == config.task);
  CHECK(rebuilt.model.arch == config.model.arch);
  CHECK(rebuilt.model.hidden == config.model.hidden);
  CHECK(rebuilt.model.epochs == config.model.epochs);
  CHECK(rebuilt.model.learning_rate == config.model.learning_rate);
  CHECK(rebuilt.model.batch_size == config.model.batch_size);
}

TEST_CASE("reports survive a full round trip bit for bit") {
  const RunReport original = sample_report();
  const std::string text = format_report(original);
  const RunReport back = parse_report(text);

  CHECK(back.source == original.source);
  CHECK(back.stream_length == original.stream_length);
  CHECK(back.config.n == original.config.n);
  CHECK(back.config.r == original.config.r);
  CHECK(back.config.alpha == original.config.alpha);
  CHECK(back.config.seed == original.config.seed);
  CHECK(back.config.standardize == original.config.standardize);
  CHECK(back.config.task == original.config.task);
  CHECK(back.config.model.hidden == original.config.model.hidden);
  CHECK(back.config.model.learning_rate == original.config.model.learning_rate);

  REQUIRE(back.events.size() == original.events.size());
  for (std::size_t i = 0; i < back.events.size(); ++i) {
    CHECK(back.events[i].stream_index == original.events[i].stream_index);
    CHECK(back.events[i].flagged_features == original.events[i].flagged_features);
    CHECK(back.events[i].statistics == original.events[i].statistics);
    CHECK(back.events[i].thresholds == original.events[i].thresholds);
  }
  CHECK(back.performance == original.performance);
  REQUIRE(back.detection.has_value());
  CHECK(back.detection->precision == original.detection->precision);
  CHECK(back.detection->recall == original.detection->recall);
  CHECK(back.detection->tp == original.detection->tp);
  CHECK(back.detection->fp == original.detection->fp);
  CHECK(back.detection->fn == original.detection->fn);
  REQUIRE(back.occlusion.has_value());
  CHECK(*back.occlusion == *original.occlusion);
  CHECK(back.wall_seconds == original.wall_seconds);

  // a second trip through the formatter is byte-identical
  CHECK(format_report(back) == text);
}

TEST_CASE("optional report blocks may be absent together") {
  RunReport report = sample_report();
  report.detection.reset();
  report.occlusion.reset();
  report.events.clear();
  report.performance = {1.0};

  const std::string text = format_report(report);
  CHECK(text.find("detection.") == std::string::npos);
  CHECK(text.find("occlusion.") == std::string::npos);
  CHECK(text.find("event.") == std::string::npos);

  const RunReport back = parse_report(text);
  CHECK_FALSE(back.detection.has_value());
  CHECK_FALSE(back.occlusion.has_value());
  CHECK(back.events.empty());
  CHECK(back.performance == std::vector<double>{1.0});
}

TEST_CASE("the report parser rejects mangled input") {
  const std::string text = format_report(sample_report());

  const auto expect_parse_error = [](std::string broken) {
    try {
      parse_report(broken);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
    }
  };

  expect_parse_error("not a report at all");
  expect_parse_error("");

  // duplicated line
  const std::string::size_type at = text.find("stream.length");
  std::string doubled = text;
  doubled.insert(at, "stream.length: 9\n");
  expect_parse_error(doubled);

  // unknown key smuggled in
  std::string extra = text;
  extra += "mystery.key: 1\n";
  expect_parse_error(extra);

  // missing required key
  std::string missing = text;
  const std::string::size_type from = missing.find("events.count");
  missing.erase(from, missing.find('\n', from) - from + 1);
  expect_parse_error(missing);

  // corrupted number
  std::string corrupt = text;
  const std::string::size_type num = corrupt.find("wall.seconds: ");
  corrupt.replace(num, corrupt.find('\n', num) - num, "wall.seconds: 1.2.3");
  expect_parse_error(corrupt);
}
