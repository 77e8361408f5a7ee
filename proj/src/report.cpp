#include "drift/report.hpp"

#include <charconv>
#include <cstdio>
#include <map>

namespace drift {

namespace {

double parse_double(std::string_view text, const std::string& what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(ErrorKind::parse, what + ": cannot parse number \"" + std::string(text) + "\"");
  return value;
}

template <typename Int>
Int parse_integer(std::string_view text, const std::string& what) {
  Int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(ErrorKind::parse, what + ": cannot parse integer \"" + std::string(text) + "\"");
  return value;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  if (text == "none") return items;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) {
      items.push_back(text.substr(start));
      return items;
    }
    items.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
}

std::vector<int> parse_int_list(std::string_view text, const std::string& what) {
  std::vector<int> values;
  for (const std::string_view item : split_list(text))
    values.push_back(parse_integer<int>(item, what));
  return values;
}

std::vector<double> parse_double_list(std::string_view text, const std::string& what) {
  std::vector<double> values;
  for (const std::string_view item : split_list(text))
    values.push_back(parse_double(item, what));
  return values;
}

std::string join_ints(std::span<const int> values) {
  if (values.empty()) return "none";
  std::string out;
  for (const int v : values) {
    if (!out.empty()) out += ',';
    out += std::to_string(v);
  }
  return out;
}

std::string join_doubles(std::span<const double> values) {
  if (values.empty()) return "none";
  std::string out;
  for (const double v : values) {
    if (!out.empty()) out += ',';
    out += format_double(v);
  }
  return out;
}

// Consumes emitted lines; every key must be recognized exactly once.
class LineMap {
 public:
  explicit LineMap(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t eol = text.find('\n', start);
      const std::string_view line =
          text.substr(start, eol == std::string_view::npos ? text.size() - start : eol - start);
      ++line_no;
      if (!line.empty()) {
        const std::size_t sep = line.find(": ");
        if (sep == std::string_view::npos || sep == 0)
          fail(ErrorKind::parse,
               "report line " + std::to_string(line_no) + ": expected \"key: value\"");
        const std::string key(line.substr(0, sep));
        if (!entries_.emplace(key, line.substr(sep + 2)).second)
          fail(ErrorKind::parse, "report: duplicate key \"" + key + "\"");
      }
      if (eol == std::string_view::npos) break;
      start = eol + 1;
    }
  }

  std::string take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) fail(ErrorKind::parse, "report: missing key \"" + key + "\"");
    std::string value = std::move(it->second);
    entries_.erase(it);
    return value;
  }

  std::optional<std::string> take_optional(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    std::string value = std::move(it->second);
    entries_.erase(it);
    return value;
  }

  void expect_empty() const {
    if (!entries_.empty())
      fail(ErrorKind::parse, "report: unknown key \"" + entries_.begin()->first + "\"");
  }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace

std::string format_double(double value) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    double back = 0.0;
    const auto [ptr, ec] = std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (ec == std::errc{} && ptr == buf + std::char_traits<char>::length(buf) && back == value)
      break;
  }
  return buf;
}

void apply_config_key(DetectorConfig& config, std::string_view key, std::string_view value) {
  const std::string what = "config key \"" + std::string(key) + "\"";
  if (key == "n") config.n = parse_integer<int>(value, what);
  else if (key == "r") config.r = parse_double(value, what);
  else if (key == "delta") config.delta = parse_integer<int>(value, what);
  else if (key == "alpha") config.alpha = parse_double(value, what);
  else if (key == "K") config.bootstrap_k = parse_integer<int>(value, what);
  else if (key == "subset_budget") config.subset_budget = parse_integer<int>(value, what);
  else if (key == "seed") config.seed = parse_integer<std::uint64_t>(value, what);
  else if (key == "standardize") {
    if (value == "1" || value == "true") config.standardize = true;
    else if (value == "0" || value == "false") config.standardize = false;
    else fail(ErrorKind::config, what + ": expected 0/1/true/false");
  } else if (key == "task") {
    if (value == "regression") config.task = TaskKind::regression();
    else if (value == "classification") config.task = TaskKind::classification(2);
    else if (value.starts_with("classification:"))
      config.task = TaskKind::classification(
          parse_integer<int>(value.substr(15), what));
    else fail(ErrorKind::config, what + ": expected classification[:k] or regression");
  } else if (key == "model") {
    if (value == "linear") config.model.arch = ModelSpec::Arch::linear;
    else if (value == "mlp") config.model.arch = ModelSpec::Arch::mlp;
    else fail(ErrorKind::config, what + ": expected linear or mlp");
  } else if (key == "hidden") {
    config.model.hidden = parse_int_list(value, what);
  } else if (key == "epochs") config.model.epochs = parse_integer<int>(value, what);
  else if (key == "lr") config.model.learning_rate = parse_double(value, what);
  else if (key == "batch") config.model.batch_size = parse_integer<int>(value, what);
  else fail(ErrorKind::config, "unknown config key \"" + std::string(key) + "\"");
}

std::vector<std::pair<std::string, std::string>> config_entries(const DetectorConfig& config) {
  std::vector<std::pair<std::string, std::string>> entries;
  entries.emplace_back("n", std::to_string(config.n));
  entries.emplace_back("r", format_double(config.r));
  entries.emplace_back("delta", std::to_string(config.delta));
  entries.emplace_back("alpha", format_double(config.alpha));
  entries.emplace_back("K", std::to_string(config.bootstrap_k));
  entries.emplace_back("subset_budget", std::to_string(config.subset_budget));
  entries.emplace_back("seed", std::to_string(config.seed));
  entries.emplace_back("standardize", config.standardize ? "1" : "0");
  entries.emplace_back("task", config.task.is_classification()
                                   ? "classification:" + std::to_string(config.task.classes)
                                   : "regression");
  entries.emplace_back("model",
                       config.model.arch == ModelSpec::Arch::linear ? "linear" : "mlp");
  entries.emplace_back("hidden", join_ints(config.model.hidden));
  entries.emplace_back("epochs", std::to_string(config.model.epochs));
  entries.emplace_back("lr", format_double(config.model.learning_rate));
  entries.emplace_back("batch", std::to_string(config.model.batch_size));
  return entries;
}

std::string format_report(const RunReport& report) {
  std::string out;
  const auto line = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += ": ";
    out += value;
    out += '\n';
  };

  line("drift-report", "1");
  line("source", report.source);
  for (const auto& [key, value] : config_entries(report.config)) line("config." + key, value);
  line("stream.length", std::to_string(report.stream_length));

  line("events.count", std::to_string(report.events.size()));
  for (std::size_t i = 0; i < report.events.size(); ++i) {
    const EventRecord& event = report.events[i];
    const std::string prefix = "event." + std::to_string(i);
    line(prefix + ".index", std::to_string(event.stream_index));
    line(prefix + ".features", join_ints(event.flagged_features));
    line(prefix + ".statistics", join_doubles(event.statistics));
    line(prefix + ".thresholds", join_doubles(event.thresholds));
  }

  line("performance.count", std::to_string(report.performance.size()));
  line("performance.values", join_doubles(report.performance));
  if (!report.performance.empty()) {
    double mean = 0.0;
    for (const double p : report.performance) mean += p;
    line("performance.mean", format_double(mean / static_cast<double>(report.performance.size())));
  }

  if (report.detection) {
    line("detection.tp", std::to_string(report.detection->tp));
    line("detection.fp", std::to_string(report.detection->fp));
    line("detection.fn", std::to_string(report.detection->fn));
    line("detection.precision", format_double(report.detection->precision));
    line("detection.recall", format_double(report.detection->recall));
  }
  if (report.occlusion) line("occlusion.mean", format_double(*report.occlusion));
  line("wall.seconds", format_double(report.wall_seconds));
  return out;
}

RunReport parse_report(std::string_view text) {
  LineMap lines(text);
  if (lines.take("drift-report") != "1")
    fail(ErrorKind::parse, "report: unsupported format version");

  RunReport report;
  report.source = lines.take("source");
  for (const auto& [key, unused] : config_entries(DetectorConfig{})) {
    (void)unused;
    apply_config_key(report.config, key, lines.take("config." + key));
  }
  report.stream_length = parse_integer<std::int64_t>(lines.take("stream.length"), "stream.length");

  const auto event_count =
      parse_integer<std::int64_t>(lines.take("events.count"), "events.count");
  if (event_count < 0) fail(ErrorKind::parse, "report: negative event count");
  for (std::int64_t i = 0; i < event_count; ++i) {
    const std::string prefix = "event." + std::to_string(i);
    EventRecord event;
    event.stream_index =
        parse_integer<std::int64_t>(lines.take(prefix + ".index"), prefix + ".index");
    event.flagged_features =
        parse_int_list(lines.take(prefix + ".features"), prefix + ".features");
    event.statistics =
        parse_double_list(lines.take(prefix + ".statistics"), prefix + ".statistics");
    event.thresholds =
        parse_double_list(lines.take(prefix + ".thresholds"), prefix + ".thresholds");
    report.events.push_back(std::move(event));
  }

  const auto perf_count =
      parse_integer<std::int64_t>(lines.take("performance.count"), "performance.count");
  report.performance = parse_double_list(lines.take("performance.values"), "performance.values");
  if (static_cast<std::int64_t>(report.performance.size()) != perf_count)
    fail(ErrorKind::parse, "report: performance.count disagrees with performance.values");
  if (perf_count > 0) lines.take("performance.mean");

  if (const auto tp = lines.take_optional("detection.tp")) {
    DetectionScore score;
    score.tp = parse_integer<std::int64_t>(*tp, "detection.tp");
    score.fp = parse_integer<std::int64_t>(lines.take("detection.fp"), "detection.fp");
    score.fn = parse_integer<std::int64_t>(lines.take("detection.fn"), "detection.fn");
    score.precision = parse_double(lines.take("detection.precision"), "detection.precision");
    score.recall = parse_double(lines.take("detection.recall"), "detection.recall");
    report.detection = score;
  }
  if (const auto occ = lines.take_optional("occlusion.mean"))
    report.occlusion = parse_double(*occ, "occlusion.mean");
  report.wall_seconds = parse_double(lines.take("wall.seconds"), "wall.seconds");

  lines.expect_empty();
  return report;
}

}  // namespace drift
