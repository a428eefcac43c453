// Command-line driver for the deviance-mining pipeline. One JSON config is
// the single source of truth; --set overrides individual fields by dotted
// path. Exit codes: 0 success, 1 usage/config error, 2 data error,
// 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "devmine/devmine.hpp"

namespace fs = std::filesystem;
using namespace devmine;

namespace {

constexpr const char* kVersion = "0.1.0";

nlohmann::json parse_override_value(const std::string& raw) {
  try {
    return nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    return nlohmann::json(raw);  // plain string
  }
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like path.to.field=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("empty path segment in override: " + assignment);
    if (dot == std::string::npos) {
      (*node)[key] = parse_override_value(assignment.substr(eq + 1));
      break;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

nlohmann::json load_config_document(const std::string& path,
                                    const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  for (const std::string& o : overrides) apply_override(doc, o);
  return doc;
}

EventLog load_labeled_log(const PipelineConfig& config) {
  if (config.input.empty()) throw ConfigError("config.input is required for this command");
  if (!config.labeling) throw ConfigError("config.labeling is required for this command");
  EventLog log = parse_event_log(config.input, config.format);
  return label_traces(log, *config.labeling);
}

struct OutputTracker {
  fs::path dir;
  std::vector<std::string> files;

  std::string path(const std::string& name) {
    files.push_back(name);
    return (dir / name).string();
  }
};

void write_manifest(const OutputTracker& outputs, const std::string& command,
                    const nlohmann::json& config_doc, std::uint64_t seed) {
  nlohmann::json manifest;
  manifest["command"] = command;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_doc.dump())));
  manifest["config_hash"] = hash;
  manifest["seed"] = seed;
  manifest["version"] = kVersion;
  manifest["outputs"] = outputs.files;
  std::ofstream out(outputs.dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

std::vector<std::string> column_names(const std::vector<Feature>& features,
                                      const ActivityDictionary& dict) {
  std::vector<std::string> names;
  names.reserve(features.size());
  for (const Feature& f : features) names.push_back(pattern_to_string(f, dict));
  return names;
}

struct TrainedRuleset {
  std::vector<Feature> selected;
  DecisionTreeModel tree;
  FeatureVectorDataset eval_vectors;  // where contingencies are counted
  std::size_t training_size = 0;
};

/// Mines, selects and trains on the training slice; rules are evaluated
/// against the non-oversampled training slice by default, or against the
/// held-out test slice of fold 0 when on_test is set.
TrainedRuleset build_ruleset(const EventLog& log, PatternKind kind,
                             const PipelineConfig& config, bool on_test) {
  BenchmarkConfig bench = config.benchmark();
  EventLog train_log = log;
  EventLog eval_log = log;
  if (on_test) {
    FoldPlan plan = stratified_kfold(log, config.folds, config.seed);
    train_log = sublog(log, plan.folds[0].train);
    eval_log = sublog(log, plan.folds[0].test);
  }
  CellArtifacts cell = build_cell(train_log, kind, bench, derive_seed(config.seed, 0x05));
  if (cell.selected_features.empty())
    throw DataError(std::string("no features selected for kind ") + to_string(kind));
  TrainedRuleset out;
  out.selected = cell.selected_features;
  out.tree = cell.tree;
  out.eval_vectors = vectorize(eval_log, cell.selected_features);
  out.training_size = train_log.traces.size();
  return out;
}

int run_command(const std::string& command, const nlohmann::json& config_doc,
                bool rules_on_test) {
  PipelineConfig config = parse_pipeline_config(config_doc);

  // validate command prerequisites before creating any output
  if (command == "synth" && !config.synth)
    throw ConfigError("synth command needs a \"synth\" config section");
  if (command != "synth" && command != "stats" && config.feature_kinds.empty())
    throw ConfigError("config.features must name at least one feature kind");

  OutputTracker outputs;
  outputs.dir = config.output_dir;
  fs::create_directories(outputs.dir);

  if (command == "synth") {
    EventLog log = generate(*config.synth);
    CsvFormat format = config.format;
    if (!format.outcome_column) format.outcome_column = "outcome";
    write_event_log(log, outputs.path("synthetic_log.csv"), format);
  } else if (command == "stats") {
    EventLog log = load_labeled_log(config);
    LogStats stats = compute_log_stats(log);
    write_stats_csv(stats, outputs.path("stats.csv"));
    std::cout << "normal cases:            " << stats.normal_cases << '\n'
              << "deviant cases:           " << stats.deviant_cases << '\n'
              << "total cases:             " << stats.total_cases << '\n'
              << "total event classes:     " << stats.total_event_classes << '\n'
              << "mean event classes/case: " << format_number(stats.mean_event_classes_per_case)
              << '\n'
              << "mean events/case:        " << format_number(stats.mean_events_per_case) << '\n';
  } else if (command == "mine") {
    EventLog log = load_labeled_log(config);
    for (PatternKind kind : config.feature_kinds) {
      auto features = mine_features(log, kind, config.mining);
      write_features_jsonl(features, log.dictionary,
                           outputs.path(std::string("patterns_") + to_string(kind) + ".jsonl"));
      std::cout << to_string(kind) << ": " << features.size() << " features\n";
    }
  } else if (command == "select") {
    EventLog log = load_labeled_log(config);
    for (PatternKind kind : config.feature_kinds) {
      auto features = mine_features(log, kind, config.mining);
      auto selected =
          select_by_coverage(score_features(features, log), log, config.selection);
      write_selected_csv(selected, log.dictionary,
                         outputs.path(std::string("selected_") + to_string(kind) + ".csv"));
      std::cout << to_string(kind) << ": " << selected.size() << " of " << features.size()
                << " features selected\n";
    }
  } else if (command == "train") {
    EventLog log = load_labeled_log(config);
    for (PatternKind kind : config.feature_kinds) {
      TrainedRuleset trained = build_ruleset(log, kind, config, false);
      nlohmann::json j =
          tree_to_json(trained.tree, column_names(trained.selected, log.dictionary));
      std::ofstream out(outputs.dir / (std::string("tree_") + to_string(kind) + ".json"));
      out << j.dump(2) << '\n';
      outputs.files.push_back(std::string("tree_") + to_string(kind) + ".json");
    }
  } else if (command == "evaluate") {
    EventLog log = load_labeled_log(config);
    EvalReport report = run_benchmark(log, config.benchmark());
    write_eval_csv(report, outputs.path("eval_report.csv"));
    write_eval_summary_csv(report, outputs.path("eval_summary.csv"));
    {
      std::ofstream out(outputs.dir / "eval_report.json");
      out << eval_report_to_json(report).dump(2) << '\n';
      outputs.files.push_back("eval_report.json");
    }
    write_timings_csv(report, outputs.path("eval_timings.csv"));
    for (const EvalAggregate& agg : report.aggregates) {
      std::cout << to_string(agg.kind) << '/' << agg.classifier << ": accuracy "
                << (agg.mean_accuracy ? format_number(*agg.mean_accuracy) : "n/a") << ", AUC "
                << (agg.mean_auc ? format_number(*agg.mean_auc) : "n/a") << '\n';
    }
  } else if (command == "rules") {
    EventLog log = load_labeled_log(config);
    for (PatternKind kind : config.feature_kinds) {
      TrainedRuleset trained = build_ruleset(log, kind, config, rules_on_test);
      RuleSet ruleset = extract_rules(trained.tree);
      auto names = column_names(trained.selected, log.dictionary);
      write_ruleset_csv(ruleset, trained.eval_vectors, names, trained.training_size,
                        outputs.path(std::string("ruleset_") + to_string(kind) + ".csv"));
      for (const std::string& measure : measure_names()) {
        auto curve = cumulative_curve(ruleset, trained.eval_vectors, measure);
        write_curve_csv(curve, outputs.path(std::string("curve_") + to_string(kind) + "_" +
                                            measure + ".csv"));
      }
      std::cout << to_string(kind) << ": " << ruleset.rules.size() << " rules\n";
    }
  } else {
    throw ConfigError("unknown command: " + command);
  }

  write_manifest(outputs, command, config_doc, config.seed);
  return 0;
}

void report_error(const std::string& category, const std::string& message) {
  nlohmann::json record;
  record["error"] = message;
  record["category"] = category;
  std::cerr << record.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"devmine: deviance mining over labeled event logs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool rules_on_test = false;

  std::vector<std::string> command_names{"stats", "mine", "select", "train",
                                         "evaluate", "rules", "synth"};
  for (const std::string& name : command_names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "pipeline config JSON")->required();
    sub->add_option("--set", overrides, "override a config field, e.g. --set seed=7");
    if (name == "rules")
      sub->add_flag("--on-test", rules_on_test,
                    "evaluate rule interestingness on a held-out test fold");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e) == 0) return 0;
    report_error("usage", e.what());
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    nlohmann::json config_doc = load_config_document(config_path, overrides);
    return run_command(command, config_doc, rules_on_test);
  } catch (const ConfigError& e) {
    report_error("config", e.what());
    return 1;
  } catch (const DataError& e) {
    report_error("data", e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 3;
  }
}
