#include "nestprune/trace.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>

#include "nestprune/errors.hpp"

namespace nestprune {

namespace {

constexpr std::string_view kHeader = "trial_id,outer_fold,inner_fold,metric,n_selected_features";
constexpr int kMaxSelectedFeatures = 50;

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
T parse_number(std::string_view field, const std::string& where, const char* column) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    throw FormatError(where + ": cannot parse " + column + " '" + std::string(field) + "'");
  }
  return value;
}

struct ParsedRow {
  StepRecord step;
  std::size_t line = 0;
};

}  // namespace

std::vector<double> TrialTrace::metrics() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.metric);
  return out;
}

void TrialTrace::validate() const {
  if (static_cast<std::int64_t>(steps.size()) != shape.total_steps()) {
    throw FormatError(fmt::format("trial '{}': {} steps, expected {} ({}x{})", trial_id, steps.size(),
                                  shape.total_steps(), shape.outer_folds, shape.inner_folds));
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    const auto outer = static_cast<int>(i / static_cast<std::size_t>(shape.inner_folds));
    const auto inner = static_cast<int>(i % static_cast<std::size_t>(shape.inner_folds));
    if (s.trial_id != trial_id || s.outer_idx != outer || s.inner_idx != inner) {
      throw FormatError(fmt::format("trial '{}': step {} is ({}, {}), expected ({}, {})", trial_id, i,
                                    s.outer_idx, s.inner_idx, outer, inner));
    }
    if (!std::isfinite(s.metric)) throw FormatError(fmt::format("trial '{}': non-finite metric", trial_id));
    if (s.selected_feature_count < 0) {
      throw FormatError(fmt::format("trial '{}': negative feature count", trial_id));
    }
  }
}

void TraceGenConfig::validate() const {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  shape.validate();
  if (!(std::isfinite(base_min) && std::isfinite(base_max)) || base_min > base_max) {
    throw ValidationError("base-min must be <= base-max");
  }
  if (!(noise_sd >= 0.0 && std::isfinite(noise_sd))) throw ValidationError("noise-sd must be >= 0");
  if (!(outlier_magnitude >= 0.0 && std::isfinite(outlier_magnitude))) {
    throw ValidationError("outlier magnitude must be >= 0");
  }
  auto check_prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0, 1]");
  };
  check_prob(outlier_prob, "outlier-prob");
  check_prob(zero_feature_prob, "zero-feature-prob");
}

Cohort generate_cohort(const TraceGenConfig& config) {
  config.validate();
  const double pessimistic = config.direction == Direction::minimize ? 1.0 : -1.0;

  Cohort cohort;
  cohort.reserve(static_cast<std::size_t>(config.trials));
  for (int t = 0; t < config.trials; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> base_dist(config.base_min, config.base_max);
    std::bernoulli_distribution zero_features(config.zero_feature_prob);
    std::bernoulli_distribution outlier(config.outlier_prob);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> feature_count(1, kMaxSelectedFeatures);
    std::normal_distribution<double> noise(0.0, config.noise_sd > 0.0 ? config.noise_sd : 1.0);

    TrialTrace trace;
    trace.trial_id = fmt::format("t{:04d}", t);
    trace.shape = config.shape;
    const double base = config.base_min == config.base_max ? config.base_min : base_dist(rng);
    const bool no_features = zero_features(rng);
    trace.steps.reserve(static_cast<std::size_t>(config.shape.total_steps()));
    for (int o = 0; o < config.shape.outer_folds; ++o) {
      for (int i = 0; i < config.shape.inner_folds; ++i) {
        double metric = base;
        if (config.noise_sd > 0.0) metric += noise(rng);
        if (outlier(rng)) {
          const double sign = config.symmetric_outliers && coin(rng) ? -pessimistic : pessimistic;
          metric += sign * config.outlier_magnitude;
        }
        metric = config.direction == Direction::minimize ? std::max(metric, 0.0) : std::clamp(metric, 0.0, 1.0);
        const int features = no_features ? 0 : feature_count(rng);
        trace.steps.push_back(StepRecord{trace.trial_id, o, i, metric, features});
      }
    }
    cohort.push_back(std::move(trace));
  }
  return cohort;
}

void write_traces(const Cohort& cohort, std::ostream& out) {
  out << kHeader << '\n';
  for (const auto& trial : cohort) {
    for (const auto& s : trial.steps) {
      out << fmt::format("{},{},{},{:.17g},{}\n", s.trial_id, s.outer_idx, s.inner_idx, s.metric,
                         s.selected_feature_count);
    }
  }
}

void write_traces(const Cohort& cohort, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_traces(cohort, out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_traces_per_trial(const Cohort& cohort, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  for (const auto& trial : cohort) {
    write_traces(Cohort{trial}, dir / (trial.trial_id + ".csv"));
  }
}

Cohort read_traces(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw FormatError(source_name + ": empty file, expected header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_row(line);
  const auto expected = split_row(kHeader);
  if (header.size() < expected.size() || !std::equal(expected.begin(), expected.end(), header.begin())) {
    throw FormatError(fmt::format("{}:1: header mismatch, expected '{}'", source_name, kHeader));
  }
  const auto columns = header.size();

  // Rows grouped per trial in order of first appearance.
  std::vector<std::vector<ParsedRow>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  std::string previous_id;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = fmt::format("{}:{}", source_name, line_no);
    const auto fields = split_row(line);
    if (fields.size() != columns) {
      throw FormatError(fmt::format("{}: expected {} fields, found {}", where, columns, fields.size()));
    }
    ParsedRow row;
    row.line = line_no;
    row.step.trial_id = std::string(fields[0]);
    if (row.step.trial_id.empty()) throw FormatError(where + ": empty trial_id");
    row.step.outer_idx = parse_number<int>(fields[1], where, "outer_fold");
    row.step.inner_idx = parse_number<int>(fields[2], where, "inner_fold");
    row.step.metric = parse_number<double>(fields[3], where, "metric");
    row.step.selected_feature_count = parse_number<int>(fields[4], where, "n_selected_features");
    if (row.step.outer_idx < 0 || row.step.inner_idx < 0) throw FormatError(where + ": negative fold index");
    if (!std::isfinite(row.step.metric)) throw FormatError(where + ": non-finite metric");
    if (row.step.selected_feature_count < 0) throw FormatError(where + ": negative n_selected_features");

    if (row.step.trial_id != previous_id) {
      if (group_of.contains(row.step.trial_id)) {
        throw FormatError(fmt::format("{}: rows of trial '{}' are not contiguous (duplicate trial id)", where,
                                      row.step.trial_id));
      }
      group_of.emplace(row.step.trial_id, groups.size());
      groups.emplace_back();
      previous_id = row.step.trial_id;
    }
    groups.back().push_back(std::move(row));
  }
  if (groups.empty()) throw FormatError(source_name + ": no trace rows");

  CvShape shape{0, 0};
  for (const auto& g : groups) {
    for (const auto& r : g) {
      shape.outer_folds = std::max(shape.outer_folds, r.step.outer_idx + 1);
      shape.inner_folds = std::max(shape.inner_folds, r.step.inner_idx + 1);
    }
  }
  try {
    shape.validate();
  } catch (const ValidationError& e) {
    throw FormatError(source_name + ": " + e.what());
  }

  Cohort cohort;
  cohort.reserve(groups.size());
  for (auto& g : groups) {
    TrialTrace trace;
    trace.trial_id = g.front().step.trial_id;
    trace.shape = shape;
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto& r = g[i];
      const int outer = static_cast<int>(i / static_cast<std::size_t>(shape.inner_folds));
      const int inner = static_cast<int>(i % static_cast<std::size_t>(shape.inner_folds));
      const auto key = std::pair{r.step.outer_idx, r.step.inner_idx};
      if (!seen.insert(key).second) {
        throw FormatError(fmt::format("{}:{}: duplicate cell (trial '{}', outer {}, inner {})", source_name, r.line,
                                      trace.trial_id, key.first, key.second));
      }
      if (r.step.outer_idx != outer || r.step.inner_idx != inner) {
        throw FormatError(fmt::format("{}:{}: trial '{}' has ({}, {}) where ({}, {}) was expected (grid gap or "
                                      "out-of-order row)",
                                      source_name, r.line, trace.trial_id, r.step.outer_idx, r.step.inner_idx,
                                      outer, inner));
      }
      trace.steps.push_back(r.step);
    }
    if (static_cast<std::int64_t>(g.size()) != shape.total_steps()) {
      const auto missing = g.size();
      throw FormatError(fmt::format("{}:{}: trial '{}' ends after {} of {} steps; missing cell (outer {}, inner {})",
                                    source_name, g.back().line, trace.trial_id, g.size(), shape.total_steps(),
                                    missing / static_cast<std::size_t>(shape.inner_folds),
                                    missing % static_cast<std::size_t>(shape.inner_folds)));
    }
    cohort.push_back(std::move(trace));
  }
  return cohort;
}

Cohort read_traces(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FormatError("'" + path.string() + "': no .csv trace files in directory");
    Cohort cohort;
    for (const auto& f : files) {
      auto part = read_traces(f);
      for (auto& t : part) cohort.push_back(std::move(t));
    }
    validate_cohort(cohort);
    return cohort;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_traces(in, path.string());
}

void validate_cohort(const Cohort& cohort) {
  if (cohort.empty()) throw FormatError("empty cohort");
  std::set<TrialId> ids;
  for (const auto& t : cohort) {
    if (!ids.insert(t.trial_id).second) throw FormatError("duplicate trial id '" + t.trial_id + "'");
    if (!(t.shape == cohort.front().shape)) {
      throw FormatError(fmt::format("trial '{}' has shape {}x{}, cohort uses {}x{}", t.trial_id, t.shape.outer_folds,
                                    t.shape.inner_folds, cohort.front().shape.outer_folds,
                                    cohort.front().shape.inner_folds));
    }
    t.validate();
  }
}

}  // namespace nestprune
