#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "devmine/classifier.hpp"
#include "devmine/errors.hpp"
#include "devmine/log.hpp"
#include "devmine/mining.hpp"
#include "devmine/random.hpp"
#include "devmine/selection.hpp"

namespace devmine {

struct FoldPlan {
  struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
  };
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
};

/// Shuffles trace indices within each class, then deals them round-robin
/// into k folds, so per-class proportions stay within one trace of the
/// original distribution. Fold i tests on fold i and trains on the rest.
inline FoldPlan stratified_kfold(const EventLog& log, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgumentError("k must be >= 2");
  std::vector<std::size_t> normal, deviant;
  for (std::size_t i = 0; i < log.traces.size(); ++i) {
    if (!log.traces[i].label) throw UnlabeledTraceError(log.traces[i].case_id);
    (*log.traces[i].label == ClassLabel::deviant ? deviant : normal).push_back(i);
  }
  if (normal.size() < static_cast<std::size_t>(k) || deviant.size() < static_cast<std::size_t>(k))
    throw InvalidArgumentError("each class needs at least k traces for k-fold validation");

  Rng rng(derive_seed(seed, 0xf01d));
  shuffle(normal, rng);
  shuffle(deviant, rng);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < normal.size(); ++i)
    buckets[i % static_cast<std::size_t>(k)].push_back(normal[i]);
  for (std::size_t i = 0; i < deviant.size(); ++i)
    buckets[i % static_cast<std::size_t>(k)].push_back(deviant[i]);

  for (int f = 0; f < k; ++f) {
    FoldPlan::Fold fold;
    fold.test = buckets[static_cast<std::size_t>(f)];
    std::sort(fold.test.begin(), fold.test.end());
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      fold.train.insert(fold.train.end(), buckets[static_cast<std::size_t>(g)].begin(),
                        buckets[static_cast<std::size_t>(g)].end());
    }
    std::sort(fold.train.begin(), fold.train.end());
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

/// Duplicates minority-class traces uniformly at random (with replacement)
/// until the classes balance; the majority class and the input order are
/// untouched, duplicates append at the end.
inline std::vector<Trace> oversample(const std::vector<Trace>& train, std::uint64_t seed) {
  std::vector<std::size_t> normal, deviant;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!train[i].label) throw UnlabeledTraceError(train[i].case_id);
    (*train[i].label == ClassLabel::deviant ? deviant : normal).push_back(i);
  }
  if (normal.empty() || deviant.empty())
    throw InvalidArgumentError("oversampling requires both classes present");

  std::vector<Trace> out = train;
  const auto& minority = deviant.size() < normal.size() ? deviant : normal;
  const std::size_t deficit =
      std::max(deviant.size(), normal.size()) - std::min(deviant.size(), normal.size());
  Rng rng(derive_seed(seed, 0x0e54));
  for (std::size_t i = 0; i < deficit; ++i)
    out.push_back(train[minority[rng.below(minority.size())]]);
  return out;
}

struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

struct EvalScore {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::optional<double> auc;  // absent when the truth is single-class
};

/// Accuracy is (tp+tn)/all with deviant as the positive class. AUC is the
/// Mann-Whitney rank statistic: the fraction of (deviant, normal) pairs
/// where the deviant confidence ranks strictly higher, ties counting 0.5.
/// Computed with integer arithmetic so it matches pairwise counting exactly.
inline EvalScore score(std::span<const Prediction> predictions,
                       std::span<const ClassLabel> truth) {
  if (predictions.size() != truth.size() || truth.empty())
    throw InvalidArgumentError("predictions and truth must be equal-length and non-empty");

  EvalScore result;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual_dev = truth[i] == ClassLabel::deviant;
    const bool predicted_dev = predictions[i].label == ClassLabel::deviant;
    if (actual_dev && predicted_dev) ++result.confusion.tp;
    else if (!actual_dev && !predicted_dev) ++result.confusion.tn;
    else if (!actual_dev && predicted_dev) ++result.confusion.fp;
    else ++result.confusion.fn;
  }
  result.accuracy = static_cast<double>(result.confusion.tp + result.confusion.tn) /
                    static_cast<double>(truth.size());

  const std::size_t n_pos = result.confusion.tp + result.confusion.fn;
  const std::size_t n_neg = result.confusion.tn + result.confusion.fp;
  if (n_pos == 0 || n_neg == 0) return result;

  std::vector<std::pair<double, bool>> ranked;  // (confidence, is_deviant)
  ranked.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i)
    ranked.emplace_back(predictions[i].deviant_confidence, truth[i] == ClassLabel::deviant);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::uint64_t wins2 = 0;  // 2 per strict win, 1 per tie
  std::uint64_t negatives_below = 0;
  std::size_t i = 0;
  while (i < ranked.size()) {
    std::size_t j = i;
    std::uint64_t group_pos = 0, group_neg = 0;
    while (j < ranked.size() && ranked[j].first == ranked[i].first) {
      ranked[j].second ? ++group_pos : ++group_neg;
      ++j;
    }
    wins2 += 2 * group_pos * negatives_below + group_pos * group_neg;
    negatives_below += group_neg;
    i = j;
  }
  result.auc = static_cast<double>(wins2) /
               (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return result;
}

struct BenchmarkConfig {
  std::vector<PatternKind> feature_kinds;
  std::vector<std::string> classifiers = {"tree", "knn"};
  MiningConfig mining;
  SelectionConfig selection;
  TreeParams tree;
  KnnConfig knn;
  int folds = 5;
  std::uint64_t seed = 0;
  /// Oversample the training fold when majority > ratio * minority.
  double oversample_ratio = 1.0;
};

/// Everything derived from one training fold for one feature type. Built
/// from the training sublog alone, so test traces cannot leak into mining,
/// selection, or the models.
struct CellArtifacts {
  std::vector<Feature> mined;
  std::vector<ScoredFeature> selected;
  std::vector<Feature> selected_features;  // selection order, for vectorize
  FeatureVectorDataset train_vectors;      // oversampled
  DecisionTreeModel tree;
  double mining_seconds = 0.0;
  double mean_fisher = 0.0;
};

inline EventLog sublog(const EventLog& log, std::span<const std::size_t> trace_indices) {
  EventLog out;
  out.dictionary = log.dictionary;
  out.outcome_attribute = log.outcome_attribute;
  for (std::size_t i : trace_indices) out.traces.push_back(log.traces[i]);
  return out;
}

inline CellArtifacts build_cell(const EventLog& train_log, PatternKind kind,
                                const BenchmarkConfig& config, std::uint64_t oversample_seed) {
  CellArtifacts cell;

  const auto t0 = std::chrono::steady_clock::now();
  cell.mined = mine_features(train_log, kind, config.mining);
  cell.mining_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  // Fisher scores come from the raw training fold, before oversampling.
  std::vector<ScoredFeature> scored = score_features(cell.mined, train_log);
  cell.selected = select_by_coverage(std::move(scored), train_log, config.selection);
  for (const ScoredFeature& sf : cell.selected) cell.selected_features.push_back(sf.feature);

  double fisher_sum = 0.0;
  for (const ScoredFeature& sf : cell.selected) fisher_sum += sf.fisher;
  cell.mean_fisher = cell.selected.empty()
                         ? 0.0
                         : fisher_sum / static_cast<double>(cell.selected.size());

  if (cell.selected_features.empty()) return cell;  // nothing to train on

  std::size_t n_normal = 0, n_deviant = 0;
  for (const Trace& t : train_log.traces)
    (*t.label == ClassLabel::deviant ? n_deviant : n_normal)++;
  const std::size_t majority = std::max(n_normal, n_deviant);
  const std::size_t minority = std::min(n_normal, n_deviant);

  EventLog training = train_log;
  if (minority > 0 && static_cast<double>(majority) >
                          config.oversample_ratio * static_cast<double>(minority)) {
    training.traces = oversample(train_log.traces, oversample_seed);
  }
  cell.train_vectors = vectorize(training, cell.selected_features);
  cell.tree = train_decision_tree(cell.train_vectors, config.tree);
  return cell;
}

struct EvalCell {
  PatternKind kind = PatternKind::ia;
  std::string classifier;
  int fold = 0;
  std::optional<double> accuracy;
  std::optional<double> auc;
  std::size_t selected_count = 0;
  double mean_fisher = 0.0;
  double mining_seconds = 0.0;
  std::optional<std::string> error;
};

struct EvalAggregate {
  PatternKind kind = PatternKind::ia;
  std::string classifier;
  std::optional<double> mean_accuracy;
  std::optional<double> mean_auc;
  double mean_selected = 0.0;
  double mean_fisher = 0.0;
  double mean_mining_seconds = 0.0;
};

struct EvalReport {
  BenchmarkConfig config;
  std::vector<EvalCell> cells;
  std::vector<EvalAggregate> aggregates;
};

namespace detail {

inline void aggregate_report(EvalReport& report) {
  for (PatternKind kind : report.config.feature_kinds) {
    for (const std::string& classifier : report.config.classifiers) {
      EvalAggregate agg;
      agg.kind = kind;
      agg.classifier = classifier;
      double acc_sum = 0, auc_sum = 0, sel_sum = 0, fisher_sum = 0, time_sum = 0;
      std::size_t acc_n = 0, auc_n = 0, n = 0;
      for (const EvalCell& cell : report.cells) {
        if (cell.kind != kind || cell.classifier != classifier) continue;
        ++n;
        sel_sum += static_cast<double>(cell.selected_count);
        fisher_sum += cell.mean_fisher;
        time_sum += cell.mining_seconds;
        if (cell.accuracy) {
          acc_sum += *cell.accuracy;
          ++acc_n;
        }
        if (cell.auc) {
          auc_sum += *cell.auc;
          ++auc_n;
        }
      }
      if (n == 0) continue;
      if (acc_n) agg.mean_accuracy = acc_sum / static_cast<double>(acc_n);
      if (auc_n) agg.mean_auc = auc_sum / static_cast<double>(auc_n);
      agg.mean_selected = sel_sum / static_cast<double>(n);
      agg.mean_fisher = fisher_sum / static_cast<double>(n);
      agg.mean_mining_seconds = time_sum / static_cast<double>(n);
      report.aggregates.push_back(std::move(agg));
    }
  }
}

}  // namespace detail

/// The full protocol: per fold, mine on the training fold only, select by
/// Fisher score, oversample the training traces, train, and score on the
/// untouched test fold. Cell failures are recorded and do not stop the
/// other cells.
inline EvalReport run_benchmark(const EventLog& log, const BenchmarkConfig& config) {
  if (config.feature_kinds.empty() || config.classifiers.empty())
    throw InvalidArgumentError("benchmark needs at least one feature kind and one classifier");

  EvalReport report;
  report.config = config;
  FoldPlan plan = stratified_kfold(log, config.folds, config.seed);

  for (int f = 0; f < config.folds; ++f) {
    const EventLog train_log = sublog(log, plan.folds[static_cast<std::size_t>(f)].train);
    const EventLog test_log = sublog(log, plan.folds[static_cast<std::size_t>(f)].test);
    const std::uint64_t fold_seed = derive_seed(config.seed, 0x05ULL + static_cast<std::uint64_t>(f));

    for (PatternKind kind : config.feature_kinds) {
      CellArtifacts cell;
      std::optional<std::string> build_error;
      try {
        cell = build_cell(train_log, kind, config, fold_seed);
      } catch (const std::exception& e) {
        build_error = e.what();
      }

      for (const std::string& classifier : config.classifiers) {
        EvalCell row;
        row.kind = kind;
        row.classifier = classifier;
        row.fold = f;
        row.selected_count = cell.selected.size();
        row.mean_fisher = cell.mean_fisher;
        row.mining_seconds = cell.mining_seconds;
        if (build_error) {
          row.error = build_error;
          report.cells.push_back(std::move(row));
          continue;
        }
        if (cell.selected_features.empty()) {
          row.error = "no features selected";
          report.cells.push_back(std::move(row));
          continue;
        }
        try {
          FeatureVectorDataset test_vectors = vectorize(test_log, cell.selected_features);
          std::vector<Prediction> predictions;
          predictions.reserve(test_vectors.size());
          for (const auto& test_row : test_vectors.rows) {
            predictions.push_back(classifier == "tree"
                                      ? predict_tree(cell.tree, test_row)
                                      : knn_predict(cell.train_vectors, config.knn, test_row));
          }
          EvalScore s = score(predictions, test_vectors.labels);
          row.accuracy = s.accuracy;
          row.auc = s.auc;
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        report.cells.push_back(std::move(row));
      }
    }
  }
  detail::aggregate_report(report);
  return report;
}

}  // namespace devmine
