#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "devmine/classifier.hpp"
#include "devmine/errors.hpp"

namespace devmine {

enum class SelectorOp { le, gt };

struct Selector {
  int feature = -1;  // column index, consistent with the source tree
  SelectorOp op = SelectorOp::le;
  double threshold = 0.0;
};

/// A => B rule from one root-to-leaf path. Tests on the same feature are
/// merged into at most one lower and one upper bound, and the rule length
/// counts each such merged interval once.
struct Rule {
  int id = 0;
  std::vector<Selector> antecedent;
  ClassLabel consequent = ClassLabel::normal;
  int length = 0;

  bool empty_antecedent() const { return antecedent.empty(); }
};

struct RuleSet {
  std::vector<Rule> rules;
  std::vector<int> feature_ids;  // column -> feature id, as in the model
};

struct RuleSetStats {
  std::size_t rule_count = 0;
  double mean_rule_length = 0.0;
  double percent_generalization = 0.0;
};

/// Joint counts behind all the probability-based measures:
/// P(A) = n_a/n, P(B) = n_b/n, P(AB) = n_ab/n.
struct ContingencyCounts {
  std::int64_t n = 0;
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
  std::int64_t n_ab = 0;
};

/// The seven objective interestingness measures. OR and CS may be
/// +infinity; IG may be -infinity when P(AB) = 0.
struct MeasureVector {
  double cs = 0.0;
  double tws = 0.0;
  double phi = 0.0;
  double ps = 0.0;
  double odds_ratio = 0.0;
  double yule_q = 0.0;
  double ig = 0.0;

  double by_name(const std::string& name) const {
    if (name == "CS") return cs;
    if (name == "TWS") return tws;
    if (name == "phi") return phi;
    if (name == "PS") return ps;
    if (name == "OR") return odds_ratio;
    if (name == "YuleQ") return yule_q;
    if (name == "IG") return ig;
    throw InvalidArgumentError("unknown measure name: \"" + name + "\"");
  }
};

inline const std::array<std::string, 7>& measure_names() {
  static const std::array<std::string, 7> names = {"CS", "TWS", "phi", "PS",
                                                   "OR", "YuleQ", "IG"};
  return names;
}

/// One rule per leaf: the conjunction of the node tests along the path, with
/// per-feature bounds tightened into intervals. A single-leaf tree yields
/// one rule with an empty antecedent and length 0.
inline RuleSet extract_rules(const DecisionTreeModel& model) {
  RuleSet out;
  out.feature_ids = model.feature_ids;

  struct Bound {
    std::optional<double> lower;  // strict: feature > lower
    std::optional<double> upper;  // inclusive: feature <= upper
  };

  auto walk = [&](auto&& self, int node_index, std::map<int, Bound> bounds) -> void {
    const TreeNode& node = model.nodes[static_cast<std::size_t>(node_index)];
    if (node.leaf) {
      Rule rule;
      rule.id = static_cast<int>(out.rules.size());
      for (const auto& [feature, bound] : bounds) {
        if (bound.lower)
          rule.antecedent.push_back({feature, SelectorOp::gt, *bound.lower});
        if (bound.upper)
          rule.antecedent.push_back({feature, SelectorOp::le, *bound.upper});
      }
      rule.consequent = node.prediction;
      rule.length = static_cast<int>(bounds.size());
      out.rules.push_back(std::move(rule));
      return;
    }
    {
      std::map<int, Bound> left = bounds;
      Bound& b = left[node.feature];
      b.upper = b.upper ? std::min(*b.upper, node.threshold) : node.threshold;
      self(self, node.left, std::move(left));
    }
    {
      std::map<int, Bound> right = std::move(bounds);
      Bound& b = right[node.feature];
      b.lower = b.lower ? std::max(*b.lower, node.threshold) : node.threshold;
      self(self, node.right, std::move(right));
    }
  };

  if (!model.nodes.empty()) walk(walk, 0, {});
  return out;
}

/// Ruleset-level statistics; %Generalization is
/// (1 - rules/training examples) * 100 and may go negative.
inline RuleSetStats ruleset_stats(const RuleSet& ruleset, std::size_t training_size) {
  if (training_size < 1) throw InvalidArgumentError("training_size must be >= 1");
  RuleSetStats stats;
  stats.rule_count = ruleset.rules.size();
  double total_length = 0.0;
  for (const Rule& r : ruleset.rules) total_length += r.length;
  stats.mean_rule_length =
      ruleset.rules.empty() ? 0.0 : total_length / static_cast<double>(ruleset.rules.size());
  stats.percent_generalization =
      (1.0 - static_cast<double>(stats.rule_count) / static_cast<double>(training_size)) * 100.0;
  return stats;
}

inline bool rule_satisfied(const Rule& rule, std::span<const double> row) {
  for (const Selector& s : rule.antecedent) {
    const double v = row[static_cast<std::size_t>(s.feature)];
    if (s.op == SelectorOp::le ? !(v <= s.threshold) : !(v > s.threshold)) return false;
  }
  return true;
}

inline ContingencyCounts contingency(const Rule& rule, const FeatureVectorDataset& data) {
  ContingencyCounts c;
  c.n = static_cast<std::int64_t>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool a = rule_satisfied(rule, data.rows[i]);
    const bool b = data.labels[i] == rule.consequent;
    c.n_a += a;
    c.n_b += b;
    c.n_ab += a && b;
  }
  return c;
}

/// Evaluates all seven measures from the joint counts. Degenerate cells map
/// to fixed sentinel values rather than exceptions: a marginal of 0 or 1
/// zeroes phi/TWS/IG, an odds-ratio 0/0 reads as independence (OR=1), a
/// positive numerator over zero reads as +infinity, and a zero CS
/// denominator yields +infinity. CS uses the joint P(notA and notB) form,
/// which is the variant that actually equals 1 at independence.
inline MeasureVector interestingness(const ContingencyCounts& c) {
  if (c.n < 1) throw InvalidArgumentError("contingency requires n >= 1");
  const std::int64_t n = c.n, a = c.n_a, b = c.n_b, ab = c.n_ab;
  const std::int64_t a_nb = a - ab;          // A and not B
  const std::int64_t na_b = b - ab;          // not A and B
  const std::int64_t na_nb = n - a - b + ab; // neither
  const double nd = static_cast<double>(n);
  const double pa = static_cast<double>(a) / nd;
  const double pb = static_cast<double>(b) / nd;
  const double pab = static_cast<double>(ab) / nd;
  const double p_na_nb = static_cast<double>(na_nb) / nd;
  const double inf = std::numeric_limits<double>::infinity();

  MeasureVector m;
  // exact sign: n*ab - a*b decides positive vs negative correlation
  m.ps = static_cast<double>(n * ab - a * b) / (nd * nd);

  const bool degenerate_marginal = a == 0 || a == n || b == 0 || b == n;
  if (degenerate_marginal) {
    m.phi = 0.0;
    m.tws = 0.0;
    m.ig = 0.0;
  } else {
    m.phi = m.ps / std::sqrt(pa * pb * (1.0 - pa) * (1.0 - pb));
    if (ab == 0) {
      m.tws = 0.0;
      m.ig = -inf;
    } else {
      // integer ratio keeps lift exactly 1 at independence (n*ab == a*b)
      const double lift = static_cast<double>(n * ab) / static_cast<double>(a * b);
      m.ig = std::log2(lift);
      m.tws = pab * m.ig;
    }
  }

  const std::int64_t or_num = ab * na_nb;
  const std::int64_t or_den = a_nb * na_b;
  if (or_den > 0) m.odds_ratio = static_cast<double>(or_num) / static_cast<double>(or_den);
  else m.odds_ratio = or_num > 0 ? inf : 1.0;
  m.yule_q = std::isinf(m.odds_ratio) ? 1.0 : (m.odds_ratio - 1.0) / (m.odds_ratio + 1.0);

  // integer numerators make the zero-denominator checks exact
  const std::int64_t cs_den1_num = a * b + (n - a) * (n - b);   // over n^2
  const std::int64_t cs_den2_num = (a - ab) + (b - ab);         // over n
  if (cs_den1_num == 0 || cs_den2_num == 0) {
    m.cs = inf;
  } else {
    const double d1 = static_cast<double>(cs_den1_num) / (nd * nd);
    const double d2 = static_cast<double>(cs_den2_num) / nd;
    m.cs = ((pab + p_na_nb) / d1) * ((1.0 - d1) / d2);
  }
  return m;
}

struct CurvePoint {
  int index = 0;    // 1-based position in the sorted order
  int rule_id = 0;
  double value = 0.0;
  double cumulative = 0.0;
};

/// Rules sorted by one measure, highest first (+infinity leads, ties by rule
/// id), with the running sum of the measure.
inline std::vector<CurvePoint> cumulative_curve(const RuleSet& ruleset,
                                                const FeatureVectorDataset& data,
                                                const std::string& measure) {
  std::vector<std::pair<double, int>> values;
  for (const Rule& r : ruleset.rules)
    values.emplace_back(interestingness(contingency(r, data)).by_name(measure), r.id);
  std::sort(values.begin(), values.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<CurvePoint> curve;
  double running = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    running += values[i].first;
    curve.push_back({static_cast<int>(i) + 1, values[i].second, values[i].first, running});
  }
  return curve;
}

}  // namespace devmine
