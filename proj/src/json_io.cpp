#include "nestprune/json_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>
#include <string>

#include "nestprune/errors.hpp"

namespace nestprune {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("report field '{}': {}", key, e.what()));
  }
}

std::optional<double> get_optional_double(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw FormatError(fmt::format("report field '{}' must be a number or null", key));
  return it->get<double>();
}

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

template <typename T>
T config_value(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(fmt::format("config key '{}' has the wrong type", key));
  }
}

}  // namespace

ordered_json pruner_config_to_json(const PrunerConfig& c) {
  ordered_json j;
  j["direction"] = std::string(to_string(c.direction));
  j["threshold"] = optional_number(c.threshold);
  j["extrapolation"] = std::string(to_string(c.extrapolation));
  j["optimal_value"] = c.optimal_value;
  j["trim_fraction"] = c.trim_fraction;
  j["min_threshold_steps"] = c.min_threshold_steps;
  j["threshold_window_fraction"] = c.threshold_window_fraction;
  j["asha"] = ordered_json{{"min_resource", c.asha.min_resource},
                           {"reduction_factor", c.asha.reduction_factor},
                           {"min_early_stopping_rate", c.asha.min_early_stopping_rate},
                           {"bootstrap_count", c.asha.bootstrap_count}};
  j["semantic_enabled"] = c.semantic_enabled;
  j["threshold_enabled"] = c.threshold_enabled;
  j["comparison_enabled"] = c.comparison_enabled;
  return j;
}

PrunerConfig pruner_config_from_json(const json& j, PrunerConfig c) {
  if (!j.is_object()) throw ValidationError("pruner config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "direction") {
      c.direction = parse_direction(config_value<std::string>(value, key));
    } else if (key == "threshold") {
      c.threshold = value.is_null() ? std::nullopt : std::optional(config_value<double>(value, key));
    } else if (key == "extrapolation") {
      c.extrapolation = parse_extrapolation(config_value<std::string>(value, key));
    } else if (key == "optimal_value") {
      c.optimal_value = config_value<double>(value, key);
    } else if (key == "trim_fraction") {
      c.trim_fraction = config_value<double>(value, key);
    } else if (key == "min_threshold_steps") {
      c.min_threshold_steps = config_value<int>(value, key);
    } else if (key == "threshold_window_fraction") {
      c.threshold_window_fraction = config_value<double>(value, key);
    } else if (key == "semantic_enabled") {
      c.semantic_enabled = config_value<bool>(value, key);
    } else if (key == "threshold_enabled") {
      c.threshold_enabled = config_value<bool>(value, key);
    } else if (key == "comparison_enabled") {
      c.comparison_enabled = config_value<bool>(value, key);
    } else if (key == "asha") {
      if (!value.is_object()) throw ValidationError("config key 'asha' must be an object");
      for (const auto& [akey, avalue] : value.items()) {
        const std::string full = "asha." + akey;
        if (akey == "min_resource") {
          c.asha.min_resource = config_value<std::int64_t>(avalue, full);
        } else if (akey == "reduction_factor") {
          c.asha.reduction_factor = config_value<int>(avalue, full);
        } else if (akey == "min_early_stopping_rate") {
          c.asha.min_early_stopping_rate = config_value<int>(avalue, full);
        } else if (akey == "bootstrap_count") {
          c.asha.bootstrap_count = config_value<int>(avalue, full);
        } else {
          throw ValidationError("unknown config key '" + full + "'");
        }
      }
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
  return c;
}

std::vector<PrunerVariant> parse_variants(const json& j, const PrunerConfig& base) {
  if (!j.is_object() || !j.contains("variants") || !j["variants"].is_array()) {
    throw ValidationError("variant file must be an object with a 'variants' array");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "variants") throw ValidationError("unknown top-level key '" + key + "' in variant file");
  }
  std::vector<PrunerVariant> out;
  for (const auto& entry : j["variants"]) {
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string()) {
      throw ValidationError("every variant needs a string 'name'");
    }
    PrunerVariant v;
    v.name = entry["name"].get<std::string>();
    PrunerConfig cfg = base;
    json rest = entry;
    rest.erase("name");
    if (rest.contains("pruner")) {
      cfg = preset_config(config_value<std::string>(rest["pruner"], "pruner"), cfg);
      rest.erase("pruner");
    }
    try {
      v.config = pruner_config_from_json(rest, cfg);
    } catch (const ValidationError& e) {
      throw ValidationError("variant '" + v.name + "': " + e.what());
    }
    out.push_back(std::move(v));
  }
  if (out.empty()) throw ValidationError("variant file lists no variants");
  return out;
}

std::vector<PrunerVariant> read_variants(const std::filesystem::path& path, const PrunerConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open variant file '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("variant file '" + path.string() + "': " + e.what());
  }
  return parse_variants(j, base);
}

ordered_json study_report_to_json(const StudyReport& r) {
  ordered_json j;
  j["outer_folds"] = r.shape.outer_folds;
  j["inner_folds"] = r.shape.inner_folds;
  j["workers"] = r.workers;
  j["total_models"] = r.total_models;
  j["completed"] = r.completed;
  j["pruned_semantic"] = r.pruned_semantic;
  j["pruned_threshold"] = r.pruned_threshold;
  j["pruned_comparison"] = r.pruned_comparison;
  j["best_trial"] = r.best_trial ? ordered_json(*r.best_trial) : ordered_json(nullptr);
  j["best_value"] = optional_number(r.best_value);
  auto& trials = j["trials"] = ordered_json::array();
  for (const auto& o : r.outcomes) {
    trials.push_back(ordered_json{{"trial_id", o.trial_id},
                                  {"status", std::string(to_string(o.status))},
                                  {"layer", o.layer ? ordered_json(std::string(to_string(*o.layer))) : ordered_json(nullptr)},
                                  {"models_trained", o.models_trained},
                                  {"reported_value", optional_number(o.reported_value)}});
  }
  return j;
}

void write_study_report_json(const StudyReport& report, std::ostream& out) {
  out << study_report_to_json(report).dump(2) << '\n';
}

ordered_json bench_report_to_json(const BenchReport& r) {
  ordered_json j;
  j["repetitions"] = r.repetitions;
  j["trials_per_rep"] = r.trials_per_rep;
  j["outer_folds"] = r.shape.outer_folds;
  j["inner_folds"] = r.shape.inner_folds;
  j["base_seed"] = r.base_seed;
  j["baseline"] = r.baseline;
  j["workers"] = r.workers;
  j["source"] = r.source;
  auto& variants = j["variants"] = ordered_json::array();
  for (const auto& v : r.variants) {
    ordered_json vj;
    vj["name"] = v.name;
    vj["config"] = pruner_config_to_json(v.config);
    vj["total_models"] = v.total_models;
    vj["mean_models"] = v.mean_models;
    vj["stddev_models"] = v.stddev_models;
    vj["percent_saved"] = v.percent_saved;
    vj["completed"] = v.completed;
    vj["pruned_semantic"] = v.pruned_semantic;
    vj["pruned_threshold"] = v.pruned_threshold;
    vj["pruned_comparison"] = v.pruned_comparison;
    vj["falsely_pruned"] = v.falsely_pruned;
    vj["best_preserved_all"] = v.best_preserved_all;
    auto& reps = vj["repetitions"] = ordered_json::array();
    for (const auto& rep : v.reps) {
      reps.push_back(ordered_json{{"rep", rep.rep},
                                  {"models_trained", rep.models_trained},
                                  {"completed", rep.completed},
                                  {"pruned_semantic", rep.pruned_semantic},
                                  {"pruned_threshold", rep.pruned_threshold},
                                  {"pruned_comparison", rep.pruned_comparison},
                                  {"falsely_pruned", rep.falsely_pruned},
                                  {"max_margin", optional_number(rep.max_margin)},
                                  {"best_preserved", rep.best_preserved},
                                  {"true_best", rep.true_best}});
    }
    auto& margins = vj["false_prunes"] = ordered_json::array();
    for (const auto& f : v.false_prunes) {
      margins.push_back(ordered_json{{"rep", f.rep},
                                     {"trial_id", f.trial_id},
                                     {"full_objective", f.full_objective},
                                     {"threshold", f.threshold},
                                     {"margin", f.margin}});
    }
    variants.push_back(std::move(vj));
  }
  return j;
}

BenchReport bench_report_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("report must be a JSON object");
  BenchReport r;
  r.repetitions = get_as<int>(j, "repetitions");
  r.trials_per_rep = get_as<int>(j, "trials_per_rep");
  r.shape = CvShape{get_as<int>(j, "outer_folds"), get_as<int>(j, "inner_folds")};
  r.base_seed = get_as<std::uint64_t>(j, "base_seed");
  r.baseline = get_as<std::string>(j, "baseline");
  r.workers = get_as<int>(j, "workers");
  r.source = get_as<std::string>(j, "source");
  for (const auto& vj : get_as<json>(j, "variants")) {
    VariantReport v;
    v.name = get_as<std::string>(vj, "name");
    try {
      v.config = pruner_config_from_json(get_as<json>(vj, "config"), PrunerConfig{});
    } catch (const ValidationError& e) {
      throw FormatError(std::string("report variant config: ") + e.what());
    }
    v.total_models = get_as<std::int64_t>(vj, "total_models");
    v.mean_models = get_as<double>(vj, "mean_models");
    v.stddev_models = get_as<double>(vj, "stddev_models");
    v.percent_saved = get_as<double>(vj, "percent_saved");
    v.completed = get_as<std::int64_t>(vj, "completed");
    v.pruned_semantic = get_as<std::int64_t>(vj, "pruned_semantic");
    v.pruned_threshold = get_as<std::int64_t>(vj, "pruned_threshold");
    v.pruned_comparison = get_as<std::int64_t>(vj, "pruned_comparison");
    v.falsely_pruned = get_as<std::int64_t>(vj, "falsely_pruned");
    v.best_preserved_all = get_as<bool>(vj, "best_preserved_all");
    for (const auto& rj : get_as<json>(vj, "repetitions")) {
      RepetitionResult rep;
      rep.rep = get_as<int>(rj, "rep");
      rep.models_trained = get_as<std::int64_t>(rj, "models_trained");
      rep.completed = get_as<std::int64_t>(rj, "completed");
      rep.pruned_semantic = get_as<std::int64_t>(rj, "pruned_semantic");
      rep.pruned_threshold = get_as<std::int64_t>(rj, "pruned_threshold");
      rep.pruned_comparison = get_as<std::int64_t>(rj, "pruned_comparison");
      rep.falsely_pruned = get_as<std::int64_t>(rj, "falsely_pruned");
      rep.max_margin = get_optional_double(rj, "max_margin");
      rep.best_preserved = get_as<bool>(rj, "best_preserved");
      rep.true_best = get_as<std::string>(rj, "true_best");
      v.reps.push_back(std::move(rep));
    }
    for (const auto& fj : get_as<json>(vj, "false_prunes")) {
      v.false_prunes.push_back(FalsePruneRecord{get_as<int>(fj, "rep"), get_as<std::string>(fj, "trial_id"),
                                                get_as<double>(fj, "full_objective"), get_as<double>(fj, "threshold"),
                                                get_as<double>(fj, "margin")});
    }
    r.variants.push_back(std::move(v));
  }
  return r;
}

void write_report_json(const BenchReport& report, std::ostream& out) {
  out << bench_report_to_json(report).dump(2) << '\n';
}

void write_report_csv(const BenchReport& r, std::ostream& out) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); };
  out << "variant,rep,models_trained,completed,pruned_semantic,pruned_threshold,pruned_comparison,falsely_pruned,"
         "max_margin,best_preserved,true_best\n";
  for (const auto& v : r.variants) {
    for (const auto& rep : v.reps) {
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", v.name, rep.rep, rep.models_trained, rep.completed,
                         rep.pruned_semantic, rep.pruned_threshold, rep.pruned_comparison, rep.falsely_pruned,
                         opt(rep.max_margin), rep.best_preserved ? 1 : 0, rep.true_best);
    }
  }
  out << "\n# summary (baseline " << r.baseline << ")\n";
  out << "variant,total_models,mean_models,stddev_models,percent_saved,completed,pruned_semantic,pruned_threshold,"
         "pruned_comparison,falsely_pruned,best_preserved_all\n";
  for (const auto& v : r.variants) {
    out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{},{},{},{},{},{}\n", v.name, v.total_models, v.mean_models,
                       v.stddev_models, v.percent_saved, v.completed, v.pruned_semantic, v.pruned_threshold,
                       v.pruned_comparison, v.falsely_pruned, v.best_preserved_all ? 1 : 0);
  }
  out << "\n# false prunes\n";
  out << "variant,rep,trial_id,full_objective,threshold,margin\n";
  for (const auto& v : r.variants) {
    for (const auto& f : v.false_prunes) {
      out << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g}\n", v.name, f.rep, f.trial_id, f.full_objective,
                         f.threshold, f.margin);
    }
  }
}

BenchReport read_report_json(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("report JSON: ") + e.what());
  }
  return bench_report_from_json(j);
}

BenchReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report '" + path.string() + "'");
  return read_report_json(in);
}

void emit_report(const BenchReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  if (format == ReportFormat::json) {
    write_report_json(report, out);
  } else {
    write_report_csv(report, out);
  }
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace nestprune
