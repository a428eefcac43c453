#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "devmine/errors.hpp"
#include "devmine/evaluation.hpp"
#include "devmine/log.hpp"
#include "devmine/synth.hpp"

namespace devmine {

/// Single JSON document driving every pipeline command. All randomness in a
/// run derives from the one seed.
struct PipelineConfig {
  std::string input;
  CsvFormat format;
  std::optional<LabelingSpec> labeling;
  std::vector<PatternKind> feature_kinds;
  SelectionConfig selection;
  MiningConfig mining;
  std::vector<std::string> classifiers = {"tree", "knn"};
  TreeParams tree;
  KnnConfig knn;
  int folds = 5;
  std::uint64_t seed = 42;
  double oversample_ratio = 1.0;
  std::string output_dir = "out";
  std::optional<SynthSpec> synth;

  BenchmarkConfig benchmark() const {
    BenchmarkConfig b;
    b.feature_kinds = feature_kinds;
    b.classifiers = classifiers;
    b.mining = mining;
    b.selection = selection;
    b.tree = tree;
    b.knn = knn;
    b.folds = folds;
    b.seed = seed;
    b.oversample_ratio = oversample_ratio;
    return b;
  }
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config field \"" + key + "\": " + e.what());
  }
}

inline LabelingSpec parse_labeling(const nlohmann::json& j) {
  LabelingSpec spec;
  const std::string mode = get_or<std::string>(j, "mode", "");
  if (mode == "temporal") {
    spec.mode = LabelingSpec::Mode::temporal;
    if (j.contains("duration_threshold_seconds"))
      spec.duration_threshold_seconds = j.at("duration_threshold_seconds").get<std::int64_t>();
    else if (j.contains("duration_threshold_minutes"))
      spec.duration_threshold_seconds =
          static_cast<std::int64_t>(j.at("duration_threshold_minutes").get<double>() * 60.0);
    else
      throw ConfigError("temporal labeling needs duration_threshold_seconds or _minutes");
    const std::string when = get_or<std::string>(j, "deviant_when", "above");
    if (when == "above") spec.deviant_when = LabelingSpec::DeviantWhen::above;
    else if (when == "below") spec.deviant_when = LabelingSpec::DeviantWhen::below;
    else throw ConfigError("deviant_when must be \"above\" or \"below\"");
  } else if (mode == "outcome") {
    spec.mode = LabelingSpec::Mode::outcome;
    spec.outcome_attribute = get_or<std::string>(j, "outcome_attribute", "");
    spec.deviant_value = get_or<std::string>(j, "deviant_value", "");
    if (spec.outcome_attribute.empty() || spec.deviant_value.empty())
      throw ConfigError("outcome labeling needs outcome_attribute and deviant_value");
  } else {
    throw ConfigError("labeling.mode must be \"temporal\" or \"outcome\"");
  }
  return spec;
}

inline SynthSpec parse_synth(const nlohmann::json& j) {
  SynthSpec spec;
  spec.n_traces = get_or<std::size_t>(j, "n_traces", spec.n_traces);
  spec.alphabet_size = get_or<int>(j, "alphabet_size", spec.alphabet_size);
  spec.mean_trace_length = get_or<double>(j, "mean_trace_length", spec.mean_trace_length);
  spec.seed = get_or<std::uint64_t>(j, "seed", spec.seed);
  spec.planted_pattern = get_or<std::vector<int>>(j, "planted_pattern", {});
  spec.contiguous = get_or<bool>(j, "contiguous", spec.contiguous);
  spec.deviant_fraction = get_or<double>(j, "deviant_fraction", spec.deviant_fraction);
  spec.activity_count_matched =
      get_or<bool>(j, "activity_count_matched", spec.activity_count_matched);
  return spec;
}

}  // namespace detail

inline PipelineConfig parse_pipeline_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig config;
  config.input = detail::get_or<std::string>(j, "input", "");
  config.output_dir = detail::get_or<std::string>(j, "output_dir", config.output_dir);
  config.seed = detail::get_or<std::uint64_t>(j, "seed", config.seed);
  config.folds = detail::get_or<int>(j, "folds", config.folds);
  config.oversample_ratio = detail::get_or<double>(j, "oversample_ratio", config.oversample_ratio);

  if (j.contains("format")) {
    const auto& f = j.at("format");
    config.format.case_column = detail::get_or<std::string>(f, "case_column", "case_id");
    config.format.activity_column = detail::get_or<std::string>(f, "activity_column", "activity");
    if (f.contains("timestamp_column")) {
      if (f.at("timestamp_column").is_null()) config.format.timestamp_column = std::nullopt;
      else config.format.timestamp_column = f.at("timestamp_column").get<std::string>();
    }
    if (f.contains("outcome_column") && !f.at("outcome_column").is_null())
      config.format.outcome_column = f.at("outcome_column").get<std::string>();
  }

  if (j.contains("labeling")) config.labeling = detail::parse_labeling(j.at("labeling"));

  for (const auto& kind : detail::get_or<std::vector<std::string>>(j, "features", {}))
    config.feature_kinds.push_back(pattern_kind_from_string(kind));

  if (j.contains("selection")) {
    const auto& s = j.at("selection");
    config.selection.min_support = detail::get_or<double>(s, "min_support", 0.25);
    config.selection.coverage_threshold = detail::get_or<int>(s, "coverage_threshold", 5);
  }
  config.mining.min_support = config.selection.min_support;
  if (j.contains("mining")) {
    const auto& m = j.at("mining");
    config.mining.ip_max_len = detail::get_or<int>(m, "ip_max_len", 15);
    config.mining.min_support =
        detail::get_or<double>(m, "min_support", config.mining.min_support);
  }

  if (j.contains("classifiers"))
    config.classifiers = j.at("classifiers").get<std::vector<std::string>>();
  for (const std::string& c : config.classifiers)
    if (c != "tree" && c != "knn")
      throw ConfigError("unknown classifier: \"" + c + "\" (expected \"tree\" or \"knn\")");

  if (j.contains("tree")) {
    const auto& t = j.at("tree");
    config.tree.max_depth = detail::get_or<int>(t, "max_depth", 20);
    config.tree.min_samples_split = detail::get_or<int>(t, "min_samples_split", 2);
    config.tree.min_gain = detail::get_or<double>(t, "min_gain", 1e-7);
  }
  if (j.contains("knn")) config.knn.k = detail::get_or<int>(j.at("knn"), "k", 8);
  if (j.contains("synth")) config.synth = detail::parse_synth(j.at("synth"));

  if (!(config.selection.min_support > 0.0) || config.selection.min_support > 1.0)
    throw ConfigError("selection.min_support must be in (0, 1]");
  if (config.selection.coverage_threshold < 1)
    throw ConfigError("selection.coverage_threshold must be >= 1");
  if (config.folds < 2) throw ConfigError("folds must be >= 2");
  if (config.knn.k < 1) throw ConfigError("knn.k must be >= 1");
  return config;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_pipeline_config(j);
}

}  // namespace devmine
