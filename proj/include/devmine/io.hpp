#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "devmine/evaluation.hpp"
#include "devmine/log.hpp"
#include "devmine/pattern.hpp"
#include "devmine/rules.hpp"
#include "devmine/selection.hpp"

namespace devmine {

/// Fixed rendering so report files are byte-reproducible.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open output file: " + path);
  return out;
}

inline nlohmann::json names_of(const std::vector<ActivityId>& ids, const ActivityDictionary& dict) {
  nlohmann::json arr = nlohmann::json::array();
  for (ActivityId id : ids) arr.push_back(dict.name_of(id));
  return arr;
}

}  // namespace detail

inline nlohmann::json feature_to_json(const Feature& feature, const ActivityDictionary& dict) {
  nlohmann::json j;
  j["id"] = feature.id;
  j["kind"] = to_string(feature.kind);
  switch (feature.kind) {
    case PatternKind::ia:
    case PatternKind::tr:
    case PatternKind::mr:
    case PatternKind::ip:
      j["symbols"] = detail::names_of(std::get<SequencePattern>(feature.pattern).symbols, dict);
      break;
    case PatternKind::tra:
    case PatternKind::mra: {
      const auto& p = std::get<AlphabetPattern>(feature.pattern);
      j["alphabet"] = detail::names_of(p.alphabet, dict);
      nlohmann::json members = nlohmann::json::array();
      for (const auto& m : p.members) members.push_back(detail::names_of(m, dict));
      j["members"] = members;
      break;
    }
    case PatternKind::set:
      j["items"] = detail::names_of(std::get<ItemsetPattern>(feature.pattern).items, dict);
      break;
  }
  j["trace_support"] = feature.trace_support;
  return j;
}

/// One JSON object per line.
inline void write_features_jsonl(const std::vector<Feature>& features,
                                 const ActivityDictionary& dict, const std::string& path) {
  auto out = detail::open_output(path);
  for (const Feature& f : features) out << feature_to_json(f, dict).dump() << '\n';
}

/// Selected-feature report, ranked as selected.
inline void write_selected_csv(const std::vector<ScoredFeature>& selected,
                               const ActivityDictionary& dict, const std::string& path) {
  auto out = detail::open_output(path);
  out << "rank,feature_id,kind,pattern,fisher_score,trace_support\n";
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const ScoredFeature& sf = selected[i];
    out << (i + 1) << ',' << sf.feature.id << ',' << to_string(sf.feature.kind) << ','
        << detail::csv_escape(pattern_to_string(sf.feature, dict)) << ','
        << format_number(sf.fisher) << ',' << format_number(sf.feature.trace_support) << '\n';
  }
}

inline void write_stats_csv(const LogStats& stats, const std::string& path) {
  auto out = detail::open_output(path);
  out << "normal_cases,deviant_cases,total_cases,total_event_classes,"
         "mean_event_classes_per_case,mean_events_per_case\n";
  out << stats.normal_cases << ',' << stats.deviant_cases << ',' << stats.total_cases << ','
      << stats.total_event_classes << ',' << format_number(stats.mean_event_classes_per_case)
      << ',' << format_number(stats.mean_events_per_case) << '\n';
}

inline nlohmann::json tree_to_json(const DecisionTreeModel& model,
                                   const std::vector<std::string>& column_names) {
  auto convert = [&](auto&& self, int index) -> nlohmann::json {
    const TreeNode& node = model.nodes[static_cast<std::size_t>(index)];
    nlohmann::json j;
    j["n_normal"] = node.n_normal;
    j["n_deviant"] = node.n_deviant;
    if (node.leaf) {
      j["prediction"] = to_string(node.prediction);
    } else {
      j["feature"] = column_names.at(static_cast<std::size_t>(node.feature));
      j["feature_id"] = model.feature_ids.at(static_cast<std::size_t>(node.feature));
      j["threshold"] = node.threshold;
      j["left"] = self(self, node.left);
      j["right"] = self(self, node.right);
    }
    return j;
  };
  nlohmann::json j;
  j["arity"] = model.arity;
  j["root"] = model.nodes.empty() ? nlohmann::json() : convert(convert, 0);
  return j;
}

inline std::string selector_to_string(const Selector& s, const std::string& column_name) {
  return "\"" + column_name + "\" " + (s.op == SelectorOp::le ? "<=" : ">") + " " +
         format_number(s.threshold);
}

inline std::string antecedent_to_string(const Rule& rule,
                                        const std::vector<std::string>& column_names) {
  if (rule.antecedent.empty()) return "(always)";
  std::string out;
  for (std::size_t i = 0; i < rule.antecedent.size(); ++i) {
    if (i) out += " AND ";
    out += selector_to_string(rule.antecedent[i],
                              column_names.at(static_cast<std::size_t>(rule.antecedent[i].feature)));
  }
  return out;
}

/// Ruleset report: a stats header line, then one row per rule with its
/// coverage (correctly covered traces, plus percentages over all traces and
/// over the consequent class) and all seven measures.
inline void write_ruleset_csv(const RuleSet& ruleset, const FeatureVectorDataset& data,
                              const std::vector<std::string>& column_names,
                              std::size_t training_size, const std::string& path) {
  RuleSetStats stats = ruleset_stats(ruleset, training_size);
  auto out = detail::open_output(path);
  out << "# rule_count=" << stats.rule_count
      << " mean_rule_length=" << format_number(stats.mean_rule_length)
      << " percent_generalization=" << format_number(stats.percent_generalization) << '\n';
  out << "rule_id,antecedent,consequent,length,coverage_count,coverage_pct_all,"
         "coverage_pct_class,CS,TWS,phi,PS,OR,YuleQ,IG\n";
  for (const Rule& rule : ruleset.rules) {
    ContingencyCounts c = contingency(rule, data);
    MeasureVector m = interestingness(c);
    const double pct_all = c.n > 0 ? 100.0 * static_cast<double>(c.n_ab) / static_cast<double>(c.n) : 0.0;
    const double pct_class =
        c.n_b > 0 ? 100.0 * static_cast<double>(c.n_ab) / static_cast<double>(c.n_b) : 0.0;
    out << rule.id << ',' << detail::csv_escape(antecedent_to_string(rule, column_names)) << ','
        << to_string(rule.consequent) << ',' << rule.length << ',' << c.n_ab << ','
        << format_number(pct_all) << ',' << format_number(pct_class) << ','
        << format_number(m.cs) << ',' << format_number(m.tws) << ',' << format_number(m.phi)
        << ',' << format_number(m.ps) << ',' << format_number(m.odds_ratio) << ','
        << format_number(m.yule_q) << ',' << format_number(m.ig) << '\n';
  }
}

inline void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
  auto out = detail::open_output(path);
  out << "index,rule_id,value,cumulative\n";
  for (const CurvePoint& p : curve)
    out << p.index << ',' << p.rule_id << ',' << format_number(p.value) << ','
        << format_number(p.cumulative) << '\n';
}

/// Deterministic given (log, config, seed): wall-clock timings live in their
/// own file so report files stay byte-reproducible across runs.
inline void write_eval_csv(const EvalReport& report, const std::string& path) {
  auto out = detail::open_output(path);
  out << "feature_kind,classifier,fold,accuracy,auc,selected_features,mean_fisher,error\n";
  for (const EvalCell& cell : report.cells) {
    out << to_string(cell.kind) << ',' << cell.classifier << ',' << cell.fold << ','
        << (cell.accuracy ? format_number(*cell.accuracy) : "") << ','
        << (cell.auc ? format_number(*cell.auc) : "") << ',' << cell.selected_count << ','
        << format_number(cell.mean_fisher) << ','
        << detail::csv_escape(cell.error.value_or("")) << '\n';
  }
}

/// Measured wall-clock mining runtime per feature type and fold (and the
/// per-type mean); the one output that legitimately varies between runs.
inline void write_timings_csv(const EvalReport& report, const std::string& path) {
  auto out = detail::open_output(path);
  out << "feature_kind,fold,mining_seconds\n";
  for (const EvalCell& cell : report.cells) {
    if (!cell.classifier.empty() && cell.classifier != report.config.classifiers.front())
      continue;  // mining happens once per (kind, fold)
    out << to_string(cell.kind) << ',' << cell.fold << ',' << format_number(cell.mining_seconds)
        << '\n';
  }
  for (const EvalAggregate& agg : report.aggregates) {
    if (agg.classifier != report.config.classifiers.front()) continue;
    out << to_string(agg.kind) << ",mean," << format_number(agg.mean_mining_seconds) << '\n';
  }
}

/// Summary table with feature types as columns, one row per metric and
/// classifier.
inline void write_eval_summary_csv(const EvalReport& report, const std::string& path) {
  auto out = detail::open_output(path);
  out << "metric";
  for (PatternKind kind : report.config.feature_kinds) out << ',' << to_string(kind);
  out << '\n';

  auto row = [&](const std::string& name, auto getter) {
    out << name;
    for (PatternKind kind : report.config.feature_kinds) {
      out << ',';
      for (const EvalAggregate& agg : report.aggregates) {
        if (agg.kind == kind && getter(agg, out)) break;
      }
    }
    out << '\n';
  };

  for (const std::string& classifier : report.config.classifiers) {
    row("accuracy_" + classifier, [&](const EvalAggregate& agg, std::ofstream& o) {
      if (agg.classifier != classifier) return false;
      if (agg.mean_accuracy) o << format_number(*agg.mean_accuracy);
      return true;
    });
    row("auc_" + classifier, [&](const EvalAggregate& agg, std::ofstream& o) {
      if (agg.classifier != classifier) return false;
      if (agg.mean_auc) o << format_number(*agg.mean_auc);
      return true;
    });
  }
  row("mean_fisher", [&](const EvalAggregate& agg, std::ofstream& o) {
    o << format_number(agg.mean_fisher);
    return true;
  });
  row("selected_features", [&](const EvalAggregate& agg, std::ofstream& o) {
    o << format_number(agg.mean_selected);
    return true;
  });
}

inline nlohmann::json eval_report_to_json(const EvalReport& report) {
  nlohmann::json j;
  nlohmann::json cells = nlohmann::json::array();
  for (const EvalCell& cell : report.cells) {
    nlohmann::json c;
    c["feature_kind"] = to_string(cell.kind);
    c["classifier"] = cell.classifier;
    c["fold"] = cell.fold;
    if (cell.accuracy) c["accuracy"] = *cell.accuracy;
    if (cell.auc) c["auc"] = *cell.auc;
    c["selected_features"] = cell.selected_count;
    c["mean_fisher"] =
        std::isinf(cell.mean_fisher) ? nlohmann::json("inf") : nlohmann::json(cell.mean_fisher);
    if (cell.error) c["error"] = *cell.error;
    cells.push_back(std::move(c));
  }
  j["cells"] = cells;

  nlohmann::json aggs = nlohmann::json::array();
  for (const EvalAggregate& agg : report.aggregates) {
    nlohmann::json a;
    a["feature_kind"] = to_string(agg.kind);
    a["classifier"] = agg.classifier;
    if (agg.mean_accuracy) a["mean_accuracy"] = *agg.mean_accuracy;
    if (agg.mean_auc) a["mean_auc"] = *agg.mean_auc;
    a["mean_selected"] = agg.mean_selected;
    a["mean_fisher"] =
        std::isinf(agg.mean_fisher) ? nlohmann::json("inf") : nlohmann::json(agg.mean_fisher);
    aggs.push_back(std::move(a));
  }
  j["aggregates"] = aggs;
  // AUC follows the standard convention (positive class ranked above
  // negative), with deviant as the positive class.
  j["auc_convention"] = "P(deviant ranked above normal), ties 0.5";
  return j;
}

}  // namespace devmine
