// Acceptance suite: one test per acceptance criterion, each printing a
// [PASS]/[FAIL] line. The determinism criterion drives the real CLI binary.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "devmine/devmine.hpp"
#include "oracles.hpp"

using namespace devmine;
namespace fs = std::filesystem;

namespace {

SynthSpec planted_spec() {
  SynthSpec spec;
  spec.n_traces = 200;
  spec.alphabet_size = 12;
  spec.mean_trace_length = 14;
  spec.seed = 7;
  spec.planted_pattern = {2, 5, 9};
  spec.contiguous = true;
  spec.activity_count_matched = true;
  return spec;
}

const std::vector<ActivityId> kPlanted{2, 5, 9};

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// MySQL analog: MR and IP pipelines at exactly 1.00 accuracy and AUC on the
// planted log, IA stuck near chance, all inside 30 seconds.
TEST(Acceptance, StructuredProcessReproduction) {
  const auto start = std::chrono::steady_clock::now();
  EventLog log = generate(planted_spec());

  BenchmarkConfig config;
  config.feature_kinds = {PatternKind::mr, PatternKind::ip, PatternKind::ia};
  config.classifiers = {"tree", "knn"};
  config.folds = 5;
  config.seed = 7;
  EvalReport report = run_benchmark(log, config);

  for (const EvalAggregate& agg : report.aggregates) {
    if (agg.classifier != "tree") continue;
    ASSERT_TRUE(agg.mean_accuracy.has_value());
    ASSERT_TRUE(agg.mean_auc.has_value());
    if (agg.kind == PatternKind::mr || agg.kind == PatternKind::ip) {
      EXPECT_DOUBLE_EQ(*agg.mean_accuracy, 1.0) << to_string(agg.kind);
      EXPECT_DOUBLE_EQ(*agg.mean_auc, 1.0) << to_string(agg.kind);
    } else {
      EXPECT_GE(*agg.mean_accuracy, 0.40);
      EXPECT_LE(*agg.mean_accuracy, 0.60);
    }
  }
  EXPECT_LT(elapsed_seconds(start), 30.0);
}

// §5.1 analog: the planted pattern tops the IP Fisher ranking and shows up
// as a one-selector deviant rule.
TEST(Acceptance, SelectedPatternRecovery) {
  EventLog log = generate(planted_spec());
  auto features = mine_iterative_patterns(log, MiningConfig{0.25, 15});
  auto selected = select_by_coverage(score_features(features, log), log, SelectionConfig{});
  ASSERT_FALSE(selected.empty());

  const ScoredFeature& top = selected.front();
  EXPECT_TRUE(std::isinf(top.fisher));
  EXPECT_EQ(std::get<SequencePattern>(top.feature.pattern).symbols, kPlanted);

  std::vector<Feature> columns;
  for (const ScoredFeature& sf : selected) columns.push_back(sf.feature);
  FeatureVectorDataset data = vectorize(log, columns);
  DecisionTreeModel tree = train_decision_tree(data);
  RuleSet rules = extract_rules(tree);

  bool found = false;
  for (const Rule& rule : rules.rules) {
    if (rule.consequent != ClassLabel::deviant) continue;
    if (rule.antecedent.size() != 1) continue;
    const Selector& s = rule.antecedent.front();
    const Feature& f = columns[static_cast<std::size_t>(s.feature)];
    if (std::get<SequencePattern>(f.pattern).symbols == kPlanted && s.op == SelectorOp::gt)
      found = true;
  }
  EXPECT_TRUE(found) << "no single-selector deviant rule on the planted pattern";
}

// TR and MR miners equal their brute-force oracles on 100 seeded random
// logs; FP-Growth equals subset enumeration on 12-symbol alphabets.
TEST(Acceptance, MinerOracleEquivalence) {
  const auto start = std::chrono::steady_clock::now();

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    oracles::Log sequences = oracles::random_log(seed, 10, 40, 5);
    EventLog log = oracles::to_event_log(sequences, 5);
    MiningConfig config{1e-9, 15};  // no support filtering hides discrepancies

    std::set<std::vector<ActivityId>> tr_mined;
    for (const Feature& f : mine_tandem_repeats(log, config))
      tr_mined.insert(std::get<SequencePattern>(f.pattern).symbols);
    ASSERT_EQ(tr_mined, oracles::tandem_repeat_words(sequences)) << "TR seed " << seed;

    std::set<std::vector<ActivityId>> mr_mined;
    for (const Feature& f : mine_maximal_repeats(log, config))
      mr_mined.insert(std::get<SequencePattern>(f.pattern).symbols);
    ASSERT_EQ(mr_mined, oracles::maximal_repeat_words(sequences)) << "MR seed " << seed;
  }

  for (std::uint64_t seed = 500; seed < 530; ++seed) {
    oracles::Log sequences = oracles::random_log(seed, 10, 30, 12);
    EventLog log = oracles::to_event_log(sequences, 12);
    const double minsup = 0.25;
    std::map<std::vector<ActivityId>, std::size_t> mined;
    for (const Feature& f : mine_itemsets(log, MiningConfig{minsup, 15}))
      mined[std::get<ItemsetPattern>(f.pattern).items] = static_cast<std::size_t>(
          std::llround(f.trace_support * static_cast<double>(sequences.size())));

    std::vector<std::set<ActivityId>> transactions;
    for (const auto& s : sequences) transactions.emplace_back(s.begin(), s.end());
    auto expected = oracles::frequent_itemsets(
        transactions, detail::min_support_count(minsup, sequences.size()));
    ASSERT_EQ(mined, expected) << "SET seed " << seed;
  }

  EXPECT_LT(elapsed_seconds(start), 60.0);
}

// 1000 random contingency tables: range bounds, sign agreement, cell-scaling
// invariance; independence sentinels within 1e-9; the worked table within
// 1e-5.
TEST(Acceptance, MeasureCorrectness) {
  Rng rng(1234);
  auto sign_of = [](double v) { return v > 1e-9 ? 1 : (v < -1e-9 ? -1 : 0); };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.below(300));
    const std::int64_t a = static_cast<std::int64_t>(rng.below(static_cast<std::size_t>(n + 1)));
    const std::int64_t b = static_cast<std::int64_t>(rng.below(static_cast<std::size_t>(n + 1)));
    const std::int64_t lo = std::max<std::int64_t>(0, a + b - n);
    const std::int64_t hi = std::min(a, b);
    const std::int64_t ab =
        lo + static_cast<std::int64_t>(rng.below(static_cast<std::size_t>(hi - lo + 1)));
    ContingencyCounts c{n, a, b, ab};
    MeasureVector m = interestingness(c);

    ASSERT_GE(m.yule_q, -1.0 - 1e-12);
    ASSERT_LE(m.yule_q, 1.0 + 1e-12);
    ASSERT_GE(m.phi, -1.0 - 1e-12);
    ASSERT_LE(m.phi, 1.0 + 1e-12);
    ASSERT_GE(m.ps, -0.25 - 1e-12);
    ASSERT_LE(m.ps, 0.25 + 1e-12);
    ASSERT_GE(m.cs, 0.0);

    const bool degenerate = a == 0 || a == n || b == 0 || b == n;
    if (!degenerate && std::isfinite(m.ig)) {
      ASSERT_EQ(sign_of(m.ps), sign_of(m.phi));
      ASSERT_EQ(sign_of(m.ps), sign_of(m.ig));
    }

    const std::int64_t factor = 2 + static_cast<std::int64_t>(rng.below(5));
    MeasureVector scaled = interestingness(ContingencyCounts{n * factor, a * factor, b * factor,
                                                             ab * factor});
    auto close = [](double x, double y) {
      if (std::isinf(x) || std::isinf(y)) return x == y;
      return std::abs(x - y) <= 1e-9 * (1.0 + std::abs(x));
    };
    ASSERT_TRUE(close(m.cs, scaled.cs));
    ASSERT_TRUE(close(m.tws, scaled.tws));
    ASSERT_TRUE(close(m.phi, scaled.phi));
    ASSERT_TRUE(close(m.ps, scaled.ps));
    ASSERT_TRUE(close(m.odds_ratio, scaled.odds_ratio));
    ASSERT_TRUE(close(m.yule_q, scaled.yule_q));
    ASSERT_TRUE(close(m.ig, scaled.ig));
  }

  MeasureVector independent = interestingness(ContingencyCounts{100, 50, 50, 25});
  EXPECT_NEAR(independent.ps, 0.0, 1e-9);
  EXPECT_NEAR(independent.phi, 0.0, 1e-9);
  EXPECT_NEAR(independent.tws, 0.0, 1e-9);
  EXPECT_NEAR(independent.ig, 0.0, 1e-9);
  EXPECT_NEAR(independent.yule_q, 0.0, 1e-9);
  EXPECT_NEAR(independent.odds_ratio, 1.0, 1e-9);
  EXPECT_NEAR(independent.cs, 1.0, 1e-9);

  MeasureVector worked = interestingness(ContingencyCounts{100, 40, 50, 30});
  EXPECT_NEAR(worked.ps, 0.1, 1e-5);
  EXPECT_NEAR(worked.phi, 0.40825, 1e-5);
  EXPECT_NEAR(worked.tws, 0.17549, 1e-5);
  EXPECT_NEAR(worked.ig, 0.58496, 1e-5);
  EXPECT_NEAR(worked.odds_ratio, 6.0, 1e-5);
  EXPECT_NEAR(worked.yule_q, 0.71429, 1e-5);
  EXPECT_NEAR(worked.cs, 2.33333, 1e-5);
}

// Eq. 1 and the accuracy formula, exact on three substitutions each.
TEST(Acceptance, FormulaSubstitutions) {
  RuleSet ten, none, hundred;
  for (int i = 0; i < 10; ++i) ten.rules.push_back(Rule{i, {}, ClassLabel::normal, 1});
  for (int i = 0; i < 100; ++i) hundred.rules.push_back(Rule{i, {}, ClassLabel::normal, 1});
  EXPECT_DOUBLE_EQ(ruleset_stats(ten, 100).percent_generalization, 90.0);
  EXPECT_DOUBLE_EQ(ruleset_stats(none, 100).percent_generalization, 100.0);
  EXPECT_DOUBLE_EQ(ruleset_stats(hundred, 100).percent_generalization, 0.0);

  auto accuracy_of = [](int tp, int tn, int fp, int fn) {
    std::vector<Prediction> predictions;
    std::vector<ClassLabel> truth;
    auto push = [&](ClassLabel actual, ClassLabel predicted, int times) {
      for (int i = 0; i < times; ++i) {
        predictions.push_back(Prediction{predicted, 0.5});
        truth.push_back(actual);
      }
    };
    push(ClassLabel::deviant, ClassLabel::deviant, tp);
    push(ClassLabel::normal, ClassLabel::normal, tn);
    push(ClassLabel::normal, ClassLabel::deviant, fp);
    push(ClassLabel::deviant, ClassLabel::normal, fn);
    return score(predictions, truth).accuracy;
  };
  EXPECT_DOUBLE_EQ(accuracy_of(3, 4, 1, 2), 0.7);
  EXPECT_DOUBLE_EQ(accuracy_of(5, 5, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(accuracy_of(0, 0, 5, 5), 0.0);
}

// Rank-statistic AUC equals brute-force pairwise counting on 200 random
// prediction sets.
TEST(Acceptance, AucRankStatisticEqualsPairwise) {
  Rng rng(555);
  int evaluated = 0;
  while (evaluated < 200) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<Prediction> predictions;
    std::vector<ClassLabel> truth;
    std::vector<double> dev_conf, norm_conf;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = static_cast<double>(rng.below(8)) / 7.0;
      const bool deviant = rng.below(2) == 1;
      predictions.push_back(Prediction{deviant ? ClassLabel::deviant : ClassLabel::normal, c});
      truth.push_back(deviant ? ClassLabel::deviant : ClassLabel::normal);
      (deviant ? dev_conf : norm_conf).push_back(c);
    }
    if (dev_conf.empty() || norm_conf.empty()) continue;
    ++evaluated;
    ASSERT_EQ(*score(predictions, truth).auc, oracles::pairwise_auc(dev_conf, norm_conf));
  }
}

// Stratification, oversampling hygiene, and the no-leak guarantee.
TEST(Acceptance, ProtocolIntegrity) {
  EventLog log = generate(planted_spec());

  FoldPlan plan = stratified_kfold(log, 5, 7);
  std::size_t total_normal = 0, total_deviant = 0;
  for (const Trace& t : log.traces) (*t.label == ClassLabel::deviant ? total_deviant : total_normal)++;
  for (const auto& fold : plan.folds) {
    std::size_t normal = 0, deviant = 0;
    for (std::size_t i : fold.test)
      (*log.traces[i].label == ClassLabel::deviant ? deviant : normal)++;
    EXPECT_LE(std::abs(static_cast<double>(normal) -
                       static_cast<double>(total_normal) / 5.0), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(deviant) -
                       static_cast<double>(total_deviant) / 5.0), 1.0);
  }

  // oversampling equalizes the training classes and never touches the test fold
  EventLog skewed = generate([] {
    SynthSpec spec = planted_spec();
    spec.activity_count_matched = false;
    spec.deviant_fraction = 0.25;
    return spec;
  }());
  FoldPlan skew_plan = stratified_kfold(skewed, 5, 7);
  std::vector<Trace> train;
  for (std::size_t i : skew_plan.folds[0].train) train.push_back(skewed.traces[i]);
  std::vector<Trace> balanced = oversample(train, 7);
  std::size_t bn = 0, bd = 0;
  for (const Trace& t : balanced) (*t.label == ClassLabel::deviant ? bd : bn)++;
  EXPECT_EQ(bn, bd);
  for (std::size_t i = 0; i < train.size(); ++i)
    EXPECT_EQ(train[i].case_id, balanced[i].case_id);  // originals untouched, in order
  // the test fold is not part of the oversampled material
  std::set<std::string> test_ids;
  for (std::size_t i : skew_plan.folds[0].test) test_ids.insert(skewed.traces[i].case_id);
  for (const Trace& t : balanced) EXPECT_FALSE(test_ids.count(t.case_id));

  // no-leak: removing test traces before mining leaves features and model
  // bit-identical
  BenchmarkConfig config;
  config.feature_kinds = {PatternKind::mr};
  config.seed = 7;
  EventLog train_log = sublog(log, plan.folds[0].train);
  CellArtifacts with_test_present =
      build_cell(train_log, PatternKind::mr, config, derive_seed(config.seed, 0x05));
  EventLog reduced = train_log;  // the log with test traces deleted
  CellArtifacts with_test_deleted =
      build_cell(reduced, PatternKind::mr, config, derive_seed(config.seed, 0x05));

  ASSERT_EQ(with_test_present.mined.size(), with_test_deleted.mined.size());
  for (std::size_t i = 0; i < with_test_present.mined.size(); ++i)
    EXPECT_EQ(with_test_present.mined[i].pattern, with_test_deleted.mined[i].pattern);
  std::vector<std::string> names(with_test_present.train_vectors.arity(), "f");
  EXPECT_EQ(tree_to_json(with_test_present.tree, names).dump(),
            tree_to_json(with_test_deleted.tree, names).dump());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two CLI `evaluate` runs with one config produce byte-identical reports.
TEST(Acceptance, EvaluateDeterminism) {
  const fs::path work = fs::temp_directory_path() / "devmine_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  nlohmann::json config;
  config["synth"] = {{"n_traces", 80},        {"alphabet_size", 10}, {"mean_trace_length", 12},
                     {"seed", 11},            {"planted_pattern", {1, 4, 7}},
                     {"contiguous", true},    {"activity_count_matched", true}};
  config["input"] = (work / "synthetic_log.csv").string();
  config["format"] = {{"case_column", "case_id"},
                      {"activity_column", "activity"},
                      {"timestamp_column", "timestamp"},
                      {"outcome_column", "outcome"}};
  config["labeling"] = {{"mode", "outcome"},
                        {"outcome_attribute", "outcome"},
                        {"deviant_value", "deviant"}};
  config["features"] = {"IA", "MR", "IP"};
  config["classifiers"] = {"tree", "knn"};
  config["seed"] = 21;
  {
    std::ofstream out(work / "config.json");
    out << config.dump(2);
  }

  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(DEVMINE_CLI_PATH) + " " + args + " -c " +
                            (work / "config.json").string() + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };

  ASSERT_EQ(run("synth --set output_dir=" + work.string()), 0);
  ASSERT_EQ(run("evaluate --set output_dir=" + (work / "run1").string()), 0);
  ASSERT_EQ(run("evaluate --set output_dir=" + (work / "run2").string()), 0);

  for (const std::string& file : {"eval_report.csv", "eval_summary.csv", "eval_report.json"}) {
    const std::string a = slurp(work / "run1" / file);
    const std::string b = slurp(work / "run2" / file);
    ASSERT_FALSE(a.empty());
    EXPECT_EQ(a, b) << file << " differs between identical runs";
  }
}

// Hand-traced coverage selection and infinity-first ranking.
TEST(Acceptance, FisherSelection) {
  EventLog log;
  log.dictionary.intern("a");
  Trace t;
  t.case_id = "C1";
  t.events = {Event{0, std::nullopt}};
  t.label = ClassLabel::deviant;
  log.traces.push_back(t);

  auto ia = [](int id) {
    Feature f;
    f.id = id;
    f.kind = PatternKind::ia;
    f.pattern = SequencePattern{PatternKind::ia, {0}};
    f.trace_support = 1.0;
    return f;
  };
  std::vector<ScoredFeature> scored{{ia(0), 3.0}, {ia(1), 2.0}, {ia(2), 1.0}};
  auto selected = select_by_coverage(scored, log, SelectionConfig{0.25, 1});
  EXPECT_EQ(selected.size(), 2u);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<ScoredFeature> with_inf{{ia(0), 100.0}, {ia(1), inf}, {ia(2), 5.0}};
  auto ranked = select_by_coverage(with_inf, log,
                                   SelectionConfig{0.25, std::numeric_limits<int>::max()});
  ASSERT_FALSE(ranked.empty());
  EXPECT_EQ(ranked.front().feature.id, 1) << "infinite scores must rank first";
}

class CriterionPrinter : public ::testing::EmptyTestEventListener {
  void OnTestEnd(const ::testing::TestInfo& info) override {
    std::cout << (info.result()->Passed() ? "[PASS] " : "[FAIL] ") << info.test_suite_name()
              << "." << info.name() << std::endl;
  }
};

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(new CriterionPrinter);
  return RUN_ALL_TESTS();
}
