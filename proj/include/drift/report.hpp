#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drift/eval.hpp"

namespace drift {

struct EventRecord {
  std::int64_t stream_index = 0;
  std::vector<int> flagged_features;
  std::vector<double> statistics;  // indexed by feature
  std::vector<double> thresholds;
};

// Everything one detector run produced, in a form that survives a round trip
// through the text report: format_report then parse_report recovers every
// numeric field bit for bit.
struct RunReport {
  std::string source;  // "gen:<name>" or "csv:<path>"
  DetectorConfig config;
  std::int64_t stream_length = 0;
  std::vector<EventRecord> events;
  std::vector<double> performance;
  std::optional<DetectionScore> detection;
  std::optional<double> occlusion;
  double wall_seconds = 0.0;
};

// Line-oriented "key: value" text; numbers print with just enough digits to
// round-trip exactly.
std::string format_report(const RunReport& report);
RunReport parse_report(std::string_view text);

// Shared config-key vocabulary (config files, --set overrides, report echo):
// n, r, delta, alpha, K, subset_budget, seed, standardize, task, model,
// hidden, epochs, lr, batch.
void apply_config_key(DetectorConfig& config, std::string_view key, std::string_view value);
std::vector<std::pair<std::string, std::string>> config_entries(const DetectorConfig& config);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace drift
