#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "devmine/errors.hpp"
#include "devmine/log.hpp"
#include "devmine/pattern.hpp"

namespace devmine {

struct ScoredFeature {
  Feature feature;
  double fisher = 0.0;
};

struct SelectionConfig {
  double min_support = 0.25;
  int coverage_threshold = 5;  // theta: per-trace cap before a trace goes inactive
};

/// Two-class Fisher score (mu+ - mu-)^2 / (sigma+^2 + sigma-^2) with
/// population variances. A zero denominator yields +infinity when the means
/// differ and 0 when they coincide.
inline double fisher_score(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty() || negative.empty())
    throw InvalidArgumentError("fisher_score requires both classes non-empty");
  auto mean = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto variance = [](std::span<const double> v, double mu) {
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / static_cast<double>(v.size());
  };
  const double mu_pos = mean(positive);
  const double mu_neg = mean(negative);
  const double denom = variance(positive, mu_pos) + variance(negative, mu_neg);
  const double diff = mu_pos - mu_neg;
  if (denom == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff * diff / denom;
}

/// Scores every feature on the labeled log (deviant is the positive class).
inline std::vector<ScoredFeature> score_features(const std::vector<Feature>& features,
                                                 const EventLog& log) {
  const auto traces = encode(log);
  std::vector<ScoredFeature> out;
  out.reserve(features.size());
  for (const Feature& f : features) {
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      if (!log.traces[i].label) throw UnlabeledTraceError(log.traces[i].case_id);
      double value = static_cast<double>(feature_count(f, traces[i]));
      (*log.traces[i].label == ClassLabel::deviant ? pos : neg).push_back(value);
    }
    out.push_back({f, fisher_score(pos, neg)});
  }
  return out;
}

/// Sorts by descending Fisher score (+infinity first, ties by feature id)
/// and scans once: a feature is selected iff it covers at least one still-
/// active trace; each selection bumps the cover counters of the active
/// traces it covers, and a trace whose counter exceeds theta stops being
/// checked against later features. The result is an order-preserving
/// subsequence of the ranking.
inline std::vector<ScoredFeature> select_by_coverage(std::vector<ScoredFeature> scored,
                                                     const EventLog& log,
                                                     const SelectionConfig& config = {}) {
  std::sort(scored.begin(), scored.end(), [](const ScoredFeature& a, const ScoredFeature& b) {
    if (a.fisher != b.fisher) return a.fisher > b.fisher;
    return a.feature.id < b.feature.id;
  });

  const auto traces = encode(log);
  std::vector<int> counter(traces.size(), 0);
  std::vector<bool> active(traces.size(), true);
  std::size_t active_count = traces.size();

  std::vector<ScoredFeature> selected;
  for (const ScoredFeature& sf : scored) {
    if (active_count == 0) break;
    std::vector<std::size_t> covered;
    for (std::size_t t = 0; t < traces.size(); ++t) {
      if (active[t] && feature_count(sf.feature, traces[t]) > 0) covered.push_back(t);
    }
    if (covered.empty()) continue;
    selected.push_back(sf);
    for (std::size_t t : covered) {
      if (++counter[t] > config.coverage_threshold) {
        active[t] = false;
        --active_count;
      }
    }
  }
  return selected;
}

}  // namespace devmine
