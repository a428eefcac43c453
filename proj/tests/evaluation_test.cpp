#include <gtest/gtest.h>

#include <map>
#include <set>

#include "devmine/evaluation.hpp"
#include "devmine/io.hpp"
#include "devmine/synth.hpp"
#include "oracles.hpp"

using namespace devmine;

namespace {

EventLog labeled_log(std::size_t n_normal, std::size_t n_deviant) {
  EventLog log;
  ActivityId a = log.dictionary.intern("a");
  for (std::size_t i = 0; i < n_normal + n_deviant; ++i) {
    Trace t;
    t.case_id = "C" + std::to_string(i);
    t.events = {Event{a, std::nullopt}};
    t.label = i < n_normal ? ClassLabel::normal : ClassLabel::deviant;
    log.traces.push_back(t);
  }
  return log;
}

TEST(StratifiedKfold, ExactDivisibilityPreservesProportions) {
  EventLog log = labeled_log(60, 40);
  FoldPlan plan = stratified_kfold(log, 5, 3);
  for (const auto& fold : plan.folds) {
    std::size_t normal = 0, deviant = 0;
    for (std::size_t i : fold.test)
      (*log.traces[i].label == ClassLabel::deviant ? deviant : normal)++;
    EXPECT_EQ(normal, 12u);
    EXPECT_EQ(deviant, 8u);
  }
}

TEST(StratifiedKfold, FoldSizesWithinOne) {
  EventLog log = labeled_log(61, 40);
  FoldPlan plan = stratified_kfold(log, 5, 3);
  std::size_t min_size = 1000, max_size = 0;
  for (const auto& fold : plan.folds) {
    min_size = std::min(min_size, fold.test.size());
    max_size = std::max(max_size, fold.test.size());
  }
  EXPECT_LE(max_size - min_size, 1u);
}

TEST(StratifiedKfold, FoldsPartitionTheLog) {
  EventLog log = labeled_log(23, 17);
  FoldPlan plan = stratified_kfold(log, 5, 9);
  std::set<std::size_t> seen;
  for (const auto& fold : plan.folds) {
    for (std::size_t i : fold.test) EXPECT_TRUE(seen.insert(i).second);
    std::set<std::size_t> train(fold.train.begin(), fold.train.end());
    EXPECT_EQ(train.size() + fold.test.size(), log.traces.size());
    for (std::size_t i : fold.test) EXPECT_FALSE(train.count(i));
  }
  EXPECT_EQ(seen.size(), log.traces.size());
}

TEST(StratifiedKfold, SameSeedSamePlan) {
  EventLog log = labeled_log(30, 30);
  FoldPlan a = stratified_kfold(log, 5, 17);
  FoldPlan b = stratified_kfold(log, 5, 17);
  for (int f = 0; f < 5; ++f) {
    EXPECT_EQ(a.folds[static_cast<std::size_t>(f)].test, b.folds[static_cast<std::size_t>(f)].test);
    EXPECT_EQ(a.folds[static_cast<std::size_t>(f)].train, b.folds[static_cast<std::size_t>(f)].train);
  }
}

TEST(StratifiedKfold, ClassSmallerThanKRejected) {
  EventLog log = labeled_log(10, 3);
  EXPECT_THROW(stratified_kfold(log, 5, 1), InvalidArgumentError);
}

TEST(Oversample, BalancesMinorityClass) {
  EventLog log = labeled_log(80, 20);
  std::vector<Trace> balanced = oversample(log.traces, 5);
  std::size_t normal = 0, deviant = 0;
  for (const Trace& t : balanced) (*t.label == ClassLabel::deviant ? deviant : normal)++;
  EXPECT_EQ(normal, 80u);
  EXPECT_EQ(deviant, 80u);
}

TEST(Oversample, AlreadyBalancedUnchanged) {
  EventLog log = labeled_log(30, 30);
  std::vector<Trace> out = oversample(log.traces, 5);
  EXPECT_EQ(out.size(), log.traces.size());
}

TEST(Oversample, DuplicatesComeFromOriginals) {
  EventLog log = labeled_log(10, 4);
  std::set<std::string> deviant_ids;
  for (const Trace& t : log.traces)
    if (*t.label == ClassLabel::deviant) deviant_ids.insert(t.case_id);
  std::vector<Trace> out = oversample(log.traces, 5);
  for (std::size_t i = log.traces.size(); i < out.size(); ++i) {
    EXPECT_EQ(*out[i].label, ClassLabel::deviant);
    EXPECT_TRUE(deviant_ids.count(out[i].case_id));
  }
}

TEST(Oversample, SingleClassRejected) {
  EventLog log = labeled_log(5, 0);
  EXPECT_THROW(oversample(log.traces, 1), InvalidArgumentError);
}

std::vector<Prediction> conf(std::initializer_list<double> values,
                             std::initializer_list<ClassLabel> labels) {
  std::vector<Prediction> out;
  auto l = labels.begin();
  for (double v : values) out.push_back(Prediction{*l++, v});
  return out;
}

TEST(Score, AccuracySubstitution) {
  // tp=3 tn=4 fp=1 fn=2 -> 0.7
  std::vector<Prediction> predictions;
  std::vector<ClassLabel> truth;
  auto push = [&](ClassLabel actual, ClassLabel predicted, int times) {
    for (int i = 0; i < times; ++i) {
      predictions.push_back(Prediction{predicted, predicted == ClassLabel::deviant ? 1.0 : 0.0});
      truth.push_back(actual);
    }
  };
  push(ClassLabel::deviant, ClassLabel::deviant, 3);
  push(ClassLabel::normal, ClassLabel::normal, 4);
  push(ClassLabel::normal, ClassLabel::deviant, 1);
  push(ClassLabel::deviant, ClassLabel::normal, 2);
  EvalScore s = score(predictions, truth);
  EXPECT_DOUBLE_EQ(s.accuracy, 0.7);
  EXPECT_EQ(s.confusion.tp, 3u);
  EXPECT_EQ(s.confusion.tn, 4u);
  EXPECT_EQ(s.confusion.fp, 1u);
  EXPECT_EQ(s.confusion.fn, 2u);
}

TEST(Score, PerfectRankingAuc) {
  auto predictions = conf({0.9, 0.8, 0.7, 0.1},
                          {ClassLabel::deviant, ClassLabel::deviant, ClassLabel::normal,
                           ClassLabel::normal});
  std::vector<ClassLabel> truth{ClassLabel::deviant, ClassLabel::deviant, ClassLabel::normal,
                                ClassLabel::normal};
  EXPECT_DOUBLE_EQ(*score(predictions, truth).auc, 1.0);
}

TEST(Score, HandCountedAuc) {
  // deviant {0.9, 0.4}, normal {0.6, 0.2} -> 3 of 4 pairs
  auto predictions = conf({0.9, 0.4, 0.6, 0.2},
                          {ClassLabel::deviant, ClassLabel::deviant, ClassLabel::normal,
                           ClassLabel::normal});
  std::vector<ClassLabel> truth{ClassLabel::deviant, ClassLabel::deviant, ClassLabel::normal,
                                ClassLabel::normal};
  EXPECT_DOUBLE_EQ(*score(predictions, truth).auc, 0.75);
}

TEST(Score, SingleClassAucAbsent) {
  auto predictions = conf({0.9, 0.4}, {ClassLabel::deviant, ClassLabel::deviant});
  std::vector<ClassLabel> truth{ClassLabel::deviant, ClassLabel::deviant};
  EXPECT_FALSE(score(predictions, truth).auc.has_value());
}

TEST(Score, LengthMismatchRejected) {
  auto predictions = conf({0.9}, {ClassLabel::deviant});
  std::vector<ClassLabel> truth{ClassLabel::deviant, ClassLabel::normal};
  EXPECT_THROW(score(predictions, truth), InvalidArgumentError);
}

TEST(Score, ConstantConfidenceAucIsHalf) {
  auto predictions = conf({0.5, 0.5, 0.5, 0.5},
                          {ClassLabel::deviant, ClassLabel::normal, ClassLabel::deviant,
                           ClassLabel::normal});
  std::vector<ClassLabel> truth{ClassLabel::deviant, ClassLabel::normal, ClassLabel::deviant,
                                ClassLabel::normal};
  EXPECT_DOUBLE_EQ(*score(predictions, truth).auc, 0.5);
}

TEST(Score, RankStatisticEqualsPairwiseCounting) {
  Rng rng(111);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Prediction> predictions;
    std::vector<ClassLabel> truth;
    std::vector<double> dev_conf, norm_conf;
    const std::size_t n = 2 + rng.below(49);
    bool has_both = false;
    for (std::size_t i = 0; i < n; ++i) {
      // coarse confidence grid so ties actually happen
      const double c = static_cast<double>(rng.below(5)) / 4.0;
      const bool deviant = rng.below(2) == 1;
      predictions.push_back(Prediction{deviant ? ClassLabel::deviant : ClassLabel::normal, c});
      truth.push_back(deviant ? ClassLabel::deviant : ClassLabel::normal);
      (deviant ? dev_conf : norm_conf).push_back(c);
    }
    has_both = !dev_conf.empty() && !norm_conf.empty();
    EvalScore s = score(predictions, truth);
    if (!has_both) {
      EXPECT_FALSE(s.auc.has_value());
      continue;
    }
    EXPECT_EQ(*s.auc, oracles::pairwise_auc(dev_conf, norm_conf));
  }
}

SynthSpec small_planted_spec() {
  SynthSpec spec;
  spec.n_traces = 60;
  spec.alphabet_size = 10;
  spec.mean_trace_length = 12;
  spec.seed = 11;
  spec.planted_pattern = {1, 4, 7};
  spec.contiguous = true;
  spec.activity_count_matched = true;
  return spec;
}

TEST(RunBenchmark, PlantedPatternPerfectWithIpBlindWithIa) {
  EventLog log = generate(small_planted_spec());
  BenchmarkConfig config;
  config.feature_kinds = {PatternKind::ip, PatternKind::ia};
  config.classifiers = {"tree"};
  config.folds = 5;
  config.seed = 13;
  EvalReport report = run_benchmark(log, config);

  for (const EvalAggregate& agg : report.aggregates) {
    if (agg.kind == PatternKind::ip) {
      EXPECT_DOUBLE_EQ(*agg.mean_accuracy, 1.0);
      EXPECT_DOUBLE_EQ(*agg.mean_auc, 1.0);
    } else {
      EXPECT_NEAR(*agg.mean_accuracy, 0.5, 0.1);
    }
  }
}

TEST(RunBenchmark, ReportHasKRowsPerCell) {
  EventLog log = generate(small_planted_spec());
  BenchmarkConfig config;
  config.feature_kinds = {PatternKind::ia, PatternKind::set};
  config.classifiers = {"tree", "knn"};
  config.folds = 5;
  config.seed = 13;
  EvalReport report = run_benchmark(log, config);
  std::map<std::pair<PatternKind, std::string>, int> rows;
  for (const EvalCell& cell : report.cells) rows[{cell.kind, cell.classifier}]++;
  EXPECT_EQ(rows.size(), 4u);
  for (const auto& [key, count] : rows) EXPECT_EQ(count, 5);
}

TEST(RunBenchmark, DeterministicGivenSeed) {
  EventLog log = generate(small_planted_spec());
  BenchmarkConfig config;
  config.feature_kinds = {PatternKind::mr};
  config.classifiers = {"tree", "knn"};
  config.folds = 5;
  config.seed = 99;
  EvalReport a = run_benchmark(log, config);
  EvalReport b = run_benchmark(log, config);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].accuracy, b.cells[i].accuracy);
    EXPECT_EQ(a.cells[i].auc, b.cells[i].auc);
    EXPECT_EQ(a.cells[i].selected_count, b.cells[i].selected_count);
  }
}

TEST(RunBenchmark, NoInformationLeakFromTestFold) {
  EventLog log = generate(small_planted_spec());
  BenchmarkConfig config;
  config.feature_kinds = {PatternKind::ip};
  config.seed = 5;
  config.folds = 5;
  FoldPlan plan = stratified_kfold(log, config.folds, config.seed);

  // fold 0 artifacts computed from the full log's train slice...
  EventLog train_a = sublog(log, plan.folds[0].train);
  CellArtifacts a = build_cell(train_a, PatternKind::ip, config, derive_seed(config.seed, 0x05));

  // ...and from a log whose test traces were deleted up front
  EventLog reduced = train_a;
  CellArtifacts b = build_cell(reduced, PatternKind::ip, config, derive_seed(config.seed, 0x05));

  ASSERT_EQ(a.mined.size(), b.mined.size());
  for (std::size_t i = 0; i < a.mined.size(); ++i)
    EXPECT_EQ(a.mined[i].pattern, b.mined[i].pattern);
  ASSERT_EQ(a.selected.size(), b.selected.size());
  for (std::size_t i = 0; i < a.selected.size(); ++i)
    EXPECT_EQ(a.selected[i].feature.id, b.selected[i].feature.id);

  std::vector<std::string> names(a.train_vectors.arity());
  for (std::size_t i = 0; i < names.size(); ++i) names[i] = "f" + std::to_string(i);
  EXPECT_EQ(tree_to_json(a.tree, names).dump(), tree_to_json(b.tree, names).dump());
}

TEST(RunBenchmark, CellErrorsDoNotStopOtherCells) {
  // knn with k larger than any training fold: the knn cells error out, the
  // tree cells still score
  EventLog log = generate(small_planted_spec());
  BenchmarkConfig config;
  config.feature_kinds = {PatternKind::ia};
  config.classifiers = {"tree", "knn"};
  config.folds = 5;
  config.seed = 3;
  config.knn.k = 10000;
  EvalReport report = run_benchmark(log, config);
  int tree_ok = 0, knn_err = 0;
  for (const EvalCell& cell : report.cells) {
    if (cell.classifier == "tree" && cell.accuracy) ++tree_ok;
    if (cell.classifier == "knn" && cell.error) ++knn_err;
  }
  EXPECT_EQ(tree_ok, 5);
  EXPECT_EQ(knn_err, 5);
}

}  // namespace
